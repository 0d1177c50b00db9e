#pragma once

#include <string>
#include <vector>

#include "phaseless/config.hpp"

namespace phaseless {

/// Files per stage, inside the output directory:
///   forward    farfield.csv
///   phaseless  phaseless_single.csv, phaseless_ref.csv, phaseless_super.csv
///   recover    recovered.csv, recovered.csv.meta, phase_error.svg (if farfield.csv is current)
///   invert     indicator.csv, indicator.svg
/// Every file carries config_hash and stage_hash headers. A stage whose
/// outputs already carry the current stage_hash is skipped; a stage whose
/// input carries a different upstream hash refuses to run (Data error).
struct StageOutcome {
  Stage stage = Stage::Forward;
  bool skipped = false;
  std::vector<std::string> files;
  std::vector<std::string> notes;
  double seconds = 0.0;
};

StageOutcome run_stage(const ExperimentConfig& cfg, Stage stage);
/// Runs cfg.stages in order.
std::vector<StageOutcome> run_pipeline(const ExperimentConfig& cfg);

/// Heatmap of the wrapped phase error |arg(F_rec / F_true)| in [0, pi].
void write_phase_error_svg(const std::string& path, const FarFieldMatrix& rec,
                           const FarFieldMatrix& truth, int cell_px = 6,
                           const Header& extra = {});

}  // namespace phaseless
