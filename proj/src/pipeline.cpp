#include "phaseless/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "phaseless/error.hpp"
#include "phaseless/forward_medium.hpp"
#include "phaseless/forward_obstacle.hpp"
#include "phaseless/forward_roughsurface.hpp"
#include "phaseless/inversion_lsm.hpp"
#include "phaseless/phase_recovery.hpp"
#include "phaseless/phaseless.hpp"

namespace phaseless {

namespace fs = std::filesystem;

namespace {

std::string in_out(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output) / name).string();
}

Header header_of(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  return read_header(in);
}

Header provenance(const ExperimentConfig& cfg, Stage s) {
  return {{"config_hash", cfg.hash()},
          {"stage", to_string(s)},
          {"stage_hash", cfg.stage_hash(s)},
          {"version", std::string("phaseless ") + kVersion},
          {"variant", to_string(cfg.scene.variant)}};
}

bool current(const std::string& path, const std::string& stage_hash) {
  const Header h = header_of(path);
  auto it = h.find("stage_hash");
  return it != h.end() && it->second == stage_hash;
}

// Refuses inputs written for a different upstream configuration.
void require_upstream(const ExperimentConfig& cfg, Stage upstream, const std::string& path,
                      Stage consumer) {
  if (!fs::exists(path))
    fail(ErrorKind::Data, "stage '" + to_string(consumer) + "' needs " + path + "; run '" +
                              to_string(upstream) + "' first");
  const Header h = header_of(path);
  const std::string want = cfg.stage_hash(upstream);
  auto it = h.find("stage_hash");
  const std::string got = it == h.end() ? "<none>" : it->second;
  if (got != want)
    fail(ErrorKind::Data, "stale input " + path + ": written by '" + to_string(upstream) +
                              "' with stage_hash " + got + ", current configuration expects " +
                              want + "; rerun '" + to_string(upstream) + "'");
}

FarFieldMatrix compute_forward(const ExperimentConfig& cfg) {
  const Wavenumber k(cfg.k);
  const DirectionGrid obs = cfg.obs_grid(), inc = cfg.inc_grid();
  switch (cfg.scene.variant) {
    case SceneVariant::Obstacle:
      return ObstacleSolver(cfg.scene, k, cfg.quadrature_n).multistatic(obs, inc);
    case SceneVariant::Medium:
      return MediumSolver(cfg.scene, k, cfg.medium_h()).multistatic(obs, inc);
    case SceneVariant::RoughSurface:
      return RoughSurfaceSolver(cfg.scene, k, cfg.quadrature_n, cfg.ball_nodes,
                                cfg.margin_wavelengths)
          .multistatic(obs, inc);
  }
  fail(ErrorKind::Config, "unknown scene variant");
}

void run_forward(const ExperimentConfig& cfg, StageOutcome& out) {
  const std::string path = in_out(cfg, "farfield.csv");
  out.files = {path};
  if (current(path, cfg.stage_hash(Stage::Forward))) {
    out.skipped = true;
    return;
  }
  const FarFieldMatrix F = compute_forward(cfg);
  Header h = provenance(cfg, Stage::Forward);
  h["quadrature_n"] = std::to_string(cfg.quadrature_n);
  // Inclusions and rasters jump across cell faces; the solver's convergence
  // order is only established for smooth contrasts.
  if (cfg.scene.variant == SceneVariant::Medium) h["medium_class"] = "piecewise_constant (illustrative)";
  write_farfield_csv(path, F, h);
}

void run_phaseless(const ExperimentConfig& cfg, StageOutcome& out) {
  const std::string prefix = in_out(cfg, "phaseless");
  out.files = {prefix + "_single.csv", prefix + "_ref.csv", prefix + "_super.csv"};
  const std::string want = cfg.stage_hash(Stage::Phaseless);
  if (std::all_of(out.files.begin(), out.files.end(), [&](const std::string& p) { return current(p, want); })) {
    out.skipped = true;
    return;
  }
  const std::string src = in_out(cfg, "farfield.csv");
  require_upstream(cfg, Stage::Forward, src, Stage::Phaseless);
  const FarFieldMatrix F = read_farfield_csv(src);
  const PhaselessDataset D = synthesize_dataset(F, cfg.d0_index, cfg.noise_level, cfg.seed);
  write_dataset_csv(prefix, D, provenance(cfg, Stage::Phaseless));
}

// The ball model behind fix_global_phase is a sound-soft disk in free space.
bool gauge_fix_applies(const ExperimentConfig& cfg, std::string& why) {
  if (!cfg.fix_gauge) {
    why = "gauge fix disabled in config";
    return false;
  }
  if (cfg.scene.variant != SceneVariant::Obstacle) {
    why = "gauge fix needs a sound-soft ball in free space; skipped for " +
          to_string(cfg.scene.variant) + " scenes";
    return false;
  }
  const ReferenceBall& b = *cfg.scene.ball;
  if (b.center.norm() - b.radius <= cfg.scene.enclosing_radius) {
    why = "gauge fix needs |b| - rho > R";
    return false;
  }
  return true;
}

void run_recover(const ExperimentConfig& cfg, StageOutcome& out) {
  const std::string path = in_out(cfg, "recovered.csv");
  const std::string svg = in_out(cfg, "phase_error.svg");
  out.files = {path, path + ".meta"};
  if (current(path, cfg.stage_hash(Stage::Recover))) {
    out.skipped = true;
    if (fs::exists(svg)) out.files.push_back(svg);
    return;
  }
  const std::string prefix = in_out(cfg, "phaseless");
  for (const char* part : {"_single.csv", "_ref.csv", "_super.csv"})
    require_upstream(cfg, Stage::Phaseless, prefix + part, Stage::Recover);
  const PhaselessDataset D = read_dataset_csv(prefix);
  if (!cfg.scene.ball) fail(ErrorKind::Config, "recover stage needs a reference ball");
  const ReferenceBall& ball = *cfg.scene.ball;

  RecoveredField rec = recover(D, ball);
  std::string why;
  if (gauge_fix_applies(cfg, why)) {
    rec = fix_global_phase(rec, ball, cfg.scene.enclosing_radius, cfg.gauge);
  } else {
    rec.report.warnings.push_back(why);
    out.notes.push_back(why);
  }
  write_recovered(path, rec, provenance(cfg, Stage::Recover));
  out.notes.push_back("branch " + to_string(rec.branch) + ", score ratio " +
                      format_double(rec.branch_score_ratio));

  const std::string truth = in_out(cfg, "farfield.csv");
  if (current(truth, cfg.stage_hash(Stage::Forward))) {
    write_phase_error_svg(svg, rec.F_rec, read_farfield_csv(truth), 6, provenance(cfg, Stage::Recover));
    out.files.push_back(svg);
  } else if (fs::exists(svg)) {
    fs::remove(svg);
  }
}

void run_invert(const ExperimentConfig& cfg, StageOutcome& out) {
  const std::string csv = in_out(cfg, "indicator.csv");
  const std::string svg = in_out(cfg, "indicator.svg");
  out.files = {csv, svg};
  if (current(csv, cfg.stage_hash(Stage::Invert)) && fs::exists(svg)) {
    out.skipped = true;
    return;
  }
  const bool from_recovery = cfg.has_stage(Stage::Recover);
  const std::string src = in_out(cfg, from_recovery ? "recovered.csv" : "farfield.csv");
  require_upstream(cfg, from_recovery ? Stage::Recover : Stage::Forward, src, Stage::Invert);
  const FarFieldMatrix F = read_farfield_csv(src);
  const IndicatorMap map = indicator_map(F, cfg.lsm, cfg.noise_level);
  Header h = provenance(cfg, Stage::Invert);
  h["source"] = fs::path(src).filename().string();
  write_indicator_csv(csv, map, h);
  write_indicator_svg(svg, map, 6, h);
}

}  // namespace

void write_phase_error_svg(const std::string& path, const FarFieldMatrix& rec,
                           const FarFieldMatrix& truth, int cell_px, const Header& extra) {
  if (rec.values.rows() != truth.values.rows() || rec.values.cols() != truth.values.cols())
    fail(ErrorKind::Data, "phase error map needs matching grids");
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write " + path);
  const int rows = static_cast<int>(rec.values.rows()), cols = static_cast<int>(rec.values.cols());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * cell_px << "\" height=\""
      << rows * cell_px << "\" shape-rendering=\"crispEdges\">\n";
  for (const auto& [key, value] : extra) out << "<!-- " << key << '=' << value << " -->\n";
  // Row m = observation, column n = incidence; black = 0, white = pi.
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      const Complex a = rec.values(m, n), b = truth.values(m, n);
      const double err = std::abs(a) > 0 && std::abs(b) > 0 ? std::abs(std::arg(a / b)) : kPi;
      const int g = static_cast<int>(std::lround(255 * err / kPi));
      out << "<rect x=\"" << n * cell_px << "\" y=\"" << m * cell_px << "\" width=\"" << cell_px
          << "\" height=\"" << cell_px << "\" fill=\"rgb(" << g << ',' << g << ',' << g
          << ")\"/>\n";
    }
  out << "</svg>\n";
  if (!out) fail(ErrorKind::Data, "write failed for " + path);
}

StageOutcome run_stage(const ExperimentConfig& cfg, Stage stage) {
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) fail(ErrorKind::Data, "cannot create output directory " + cfg.output + ": " + ec.message());
  StageOutcome out;
  out.stage = stage;
  switch (stage) {
    case Stage::Forward: run_forward(cfg, out); break;
    case Stage::Phaseless: run_phaseless(cfg, out); break;
    case Stage::Recover: run_recover(cfg, out); break;
    case Stage::Invert: run_invert(cfg, out); break;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<StageOutcome> run_pipeline(const ExperimentConfig& cfg) {
  std::vector<StageOutcome> all;
  for (Stage s : cfg.stages) all.push_back(run_stage(cfg, s));
  return all;
}

}  // namespace phaseless
