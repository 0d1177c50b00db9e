#pragma once

// Nystrom discretization of combined-field boundary integral equations on
// smooth closed curves (or periodically parametrized arcs whose density
// vanishes near the ends). Shared by the obstacle and rough-surface solvers.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "phaseless/geometry.hpp"

namespace phaseless::detail {

/// Evaluates p(t), p'(t), p''(t).
using CurveEval = std::function<void(double t, Point& p, Point& d1, Point& d2)>;

struct Panel {
  CurveEval eval;
  int n = 0;
  std::vector<double> t;
  std::vector<Point> x, d1, d2, normal;
  std::vector<double> speed;
  BoundaryKind condition = BoundaryKind::Dirichlet;
  std::vector<Complex> eta;       // impedance at nodes
  Impedance impedance;            // for off-node evaluation
  double spacing() const;         // max arc-length gap between nodes
};

Panel make_panel(CurveEval eval, int n, BoundaryKind condition = BoundaryKind::Dirichlet,
                 Impedance impedance = {});
Panel make_panel(const BoundaryCurve& curve, int n, BoundaryKind condition = BoundaryKind::Dirichlet,
                 Impedance impedance = {});

/// Weights R_j(t) of the product rule for int_0^{2pi} ln(4 sin^2((t-s)/2)) f(s) ds.
std::vector<double> log_weights(int n, double t);

/// Trigonometric cardinal functions for n (even) equispaced nodes at parameter t.
Eigen::VectorXd cardinal(int n, double t);

/// Dirichlet components use u^s = (D - i c S) phi, impedance components
/// u^s = S phi. With `half_plane`, every kernel is replaced by its
/// image-subtracted version G(x,y) = Phi(x,y) - Phi(x,y'), y' = (y1,-y2),
/// which vanishes on the line x2 = 0 (Dirichlet components only).
class LayerSystem {
 public:
  LayerSystem(std::vector<Panel> panels, double k, bool half_plane);

  int size() const { return total_; }
  int offset(int panel) const { return offsets_[panel]; }
  const std::vector<Panel>& panels() const { return panels_; }
  double k() const { return k_; }
  double coupling() const { return coupling_; }
  bool half_plane() const { return half_plane_; }

  /// Full system matrix A with A phi = rhs.
  Eigen::MatrixXcd matrix() const;

  /// Right-hand side from incident value/gradient callbacks.
  Eigen::VectorXcd rhs(const std::function<Complex(const Point&)>& value,
                       const std::function<Eigen::Vector2cd(const Point&)>& grad) const;

  /// Boundary operator (trace for Dirichlet, d/dnu + eta for impedance) of the
  /// scattered field at parameter t of panel a, as row weights on phi.
  /// Includes the jump term; `node` >= 0 when t coincides with that node.
  Eigen::RowVectorXcd trace_row(int a, double t, int node = -1) const;

  /// Scattered field at a point off the boundary (plain trapezoid rule).
  Complex field(const Eigen::VectorXcd& phi, const Point& x) const;

  /// Far-field pattern at unit direction xhat, normalization far_field_constant(k).
  Complex far_field(const Eigen::VectorXcd& phi, const Point& xhat) const;
  /// Row of the far-field operator for direction xhat.
  Eigen::RowVectorXcd far_field_row(const Point& xhat) const;

 private:
  Eigen::RowVectorXcd integral_row(int a, double t, int node) const;
  Eigen::VectorXcd corrected_image_weights(const Point& x, const Point& nx, int target_kind_imp,
                                           Complex lambda, int b) const;
  bool needs_image_correction(const Point& x, int b) const;

  std::vector<Panel> panels_;
  std::vector<int> offsets_;
  std::vector<std::vector<double>> node_log_weights_;  // R_j(0) per panel
  int total_ = 0;
  double k_;
  double coupling_;
  bool half_plane_;
};

}  // namespace phaseless::detail
