#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phaseless/farfield.hpp"
#include "phaseless/geometry.hpp"
#include "phaseless/phaseless.hpp"

namespace phaseless {

using MaskMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// delta(m, n) = arg F(xhat_m, d_n) - arg F(xhat_m, d0).
struct RelativePhaseField {
  Eigen::MatrixXd cos_delta;
  Eigen::MatrixXd delta;            // filled by resolve_signs
  Eigen::MatrixXd sign_confidence;  // in [0, 1]
  MaskMatrix mask;                  // true where the entry carries phase information
  Eigen::MatrixXd amplitude;        // mod_single, kept for weighting
  Eigen::VectorXd ref_amplitude;    // mod_ref
  DirectionGrid obs, inc;
  double clamp_excess = 0.0;        // largest |cos| beyond 1 before clamping
};

constexpr double kMaskThreshold = 1e-6;

RelativePhaseField relative_phase(const PhaselessDataset& data,
                                  double mask_threshold = kMaskThreshold);

/// Chooses sign(delta) per entry by a confidence-ordered flood fill from the
/// entry with largest |sin delta|; the seed gets delta > 0. Throws Data if the
/// trusted region splits into several components.
RelativePhaseField resolve_signs(const RelativePhaseField& rp);

/// Index maps for the reciprocity pairing (m, n) <-> (partner_obs, partner_inc):
/// xhat' = -d_n and d' = -xhat_m must both be grid directions.
struct ReciprocityPairing {
  Eigen::MatrixXi obs, inc;

  static ReciprocityPairing build(const DirectionGrid& obs, const DirectionGrid& inc);
  bool self_paired(int m, int n) const { return obs(m, n) == m && inc(m, n) == n; }
};

struct PhaseCandidates {
  FarFieldMatrix direct;
  FarFieldMatrix conjugate;  // entrywise conj(direct)
  Eigen::VectorXd phi;       // arg F(xhat_m, d0) up to a constant, direct branch
  double consistency_residual = 0.0;  // max |F(m,n) - F(pair)| / max |F|
  int sign_updates = 0;
  std::vector<std::string> warnings;
};

/// Lifts the relative phases to absolute ones through reciprocity. The row
/// phases come from an angular synchronization over all pairs; signs are then
/// re-picked pairwise and the two steps alternate until the signs settle.
PhaseCandidates absolute_phase(const RelativePhaseField& rp, const PhaselessDataset& data,
                               double warn_residual = 1e-6);

enum class Branch { Direct, Conjugate };
std::string to_string(Branch b);

struct RecoveryReport {
  double probe_ratio_direct = 0.0;
  double probe_ratio_conjugate = 0.0;
  double consistency_residual = 0.0;
  double gauge_abs = 1.0;          // |c| before normalization
  Complex gauge{1.0, 0.0};         // applied constant
  double boundary_residual = -1.0; // max |u_i + c u_s| on the ball, if fixed
  double fit_residual = -1.0;      // relative far-field misfit of the ball model
  std::vector<std::string> warnings;
};

struct RecoveredField {
  FarFieldMatrix F_rec;
  Branch branch = Branch::Direct;
  double branch_score_ratio = 0.0;  // indicator(b) / indicator(-b) of the chosen candidate
  bool global_phase_fixed = false;
  RecoveryReport report;
};

/// Picks the candidate whose LSM indicator localizes at the ball center b
/// rather than at -b. Throws Ambiguous when the two scores are within 10%.
RecoveredField disambiguate_branch(const PhaseCandidates& candidates, const ReferenceBall& ball,
                                   double noise_level = 0.0);

struct GaugeFixOptions {
  int order = -1;       // origin expansion order, default ceil(k R) + 12
  int ball_order = -1;  // ball-centered order, default ceil(k rho) + 15
  int incidences = 8;   // number of incident directions used
  int boundary_points = 64;
};

/// Pins the global constant through the sound-soft ball. Each far-field column
/// is fitted by an outgoing expansion about the origin (valid outside B_R) plus
/// the exact disk response to c u_i and to that expansion, re-expanded about b
/// (valid on the ball when |b| - rho > R). The common c over all used columns
/// is the data gauge; its inverse is applied and u_i + u_s_rec is checked on
/// the ball boundary.
RecoveredField fix_global_phase(const RecoveredField& rec, const ReferenceBall& ball,
                                double enclosing_radius, const GaugeFixOptions& opts = {});

/// Scattered field u_s(x, d_col) of one far-field column, in the gauge of F,
/// evaluated at points outside B_R and outside the ball. Exposed for tests.
std::vector<Complex> continue_scattered_field(const FarFieldMatrix& F, int col,
                                              const ReferenceBall& ball, double enclosing_radius,
                                              const std::vector<Point>& points,
                                              const GaugeFixOptions& opts = {});

/// Full pipeline without the optional gauge fix.
RecoveredField recover(const PhaselessDataset& data, const ReferenceBall& ball);

/// F_rec as a far-field CSV plus "<path>.meta" key=value sidecar.
void write_recovered(const std::string& path, const RecoveredField& rec, const Header& extra = {});

}  // namespace phaseless
