#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phaseless/specfun.hpp"

namespace phaseless {

enum class CurveKind { Circle, Kite, TrigPolynomial };

/// Shape parameters. Circle uses `radius`; kite uses `scale`; trig polynomial
/// uses the radial function r(t) = a0 + sum_j (a_j cos jt + b_j sin jt)
/// stored in `cos_coeffs` (a0, a1, ...) and `sin_coeffs` (b1, b2, ...).
/// All kinds are rotated by `rotation` then translated by `center`. A nonzero
/// `bump_amplitude` scales the local shape radially by
/// 1 + a exp(kappa (cos(t - bump_at) - 1)), a smooth localized dent or bulge.
struct CurveParams {
  Point center{0.0, 0.0};
  double radius = 1.0;
  double scale = 1.0;
  double rotation = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
  double bump_amplitude = 0.0;
  double bump_at = 0.0;
  double bump_concentration = 40.0;
};

/// Closed, counterclockwise, C^2 parametric curve p(t), t in [0, 2pi).
class BoundaryCurve {
 public:
  /// Validates the curve (regular, non-self-intersecting, counterclockwise).
  static BoundaryCurve make(CurveKind kind, CurveParams params);
  static BoundaryCurve circle(Point center, double radius);
  static BoundaryCurve kite(Point center = {0.0, 0.0}, double scale = 1.0);

  CurveKind kind() const noexcept { return kind_; }
  const CurveParams& params() const noexcept { return params_; }

  Point point(double t) const;
  Point d1(double t) const;
  Point d2(double t) const;

  /// Dense polygonal sample, `n` points.
  std::vector<Point> sample(int n) const;
  /// Length via the periodic trapezoid rule with n nodes.
  double length(int n = 512) const;
  /// Signed enclosed area (positive for counterclockwise).
  double area(int n = 512) const;
  Point centroid(int n = 512) const;
  double max_radius_about(const Point& c, int n = 1024) const;
  /// Winding-number inclusion test against a dense polygon.
  bool contains(const Point& x) const;

 private:
  BoundaryCurve(CurveKind kind, CurveParams params) : kind_(kind), params_(std::move(params)) {}
  Point local_point(double t, int order) const;
  Point base_point(double t, int order) const;

  CurveKind kind_;
  CurveParams params_;
  std::vector<Point> polygon_;
};

std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& s);

/// Periodic trapezoid rule on a closed curve.
struct QuadratureRule {
  std::vector<double> params;   // t_j = 2 pi j / N
  std::vector<Point> nodes;
  std::vector<Point> d1;        // p'(t_j)
  std::vector<Point> d2;        // p''(t_j)
  std::vector<double> speed;    // |p'(t_j)|
  std::vector<double> weights;  // |p'(t_j)| 2pi/N
  std::vector<Point> normals;   // outward unit normals
  int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule quadrature(const BoundaryCurve& curve, int n);

/// Sound-soft reference ball.
struct ReferenceBall {
  Point center{0.0, 0.0};
  double radius = 0.0;
};

enum class BoundaryKind { Dirichlet, Impedance };

/// Impedance eta(t) = c0 + sum_j (a_j cos jt + b_j sin jt); continuous on the
/// curve by construction.
struct Impedance {
  Complex constant{0.0, 0.0};
  std::vector<Complex> cos_coeffs;  // a_1, a_2, ...
  std::vector<Complex> sin_coeffs;  // b_1, b_2, ...
  Complex at(double t) const;
};

struct ObstacleComponent {
  BoundaryCurve curve;
  BoundaryKind condition = BoundaryKind::Dirichlet;
  Impedance impedance;
};

/// Penetrable inclusion with constant refractive index inside a closed curve.
struct MediumInclusion {
  BoundaryCurve region;
  Complex index{1.0, 0.0};
};

/// Cellwise refractive index on an axis-aligned raster; cell (i, j) covers
/// [x0 + i h, x0 + (i+1) h] x [y0 + j h, y0 + (j+1) h].
struct MediumRaster {
  double x0 = 0.0, y0 = 0.0, h = 0.0;
  int nx = 0, ny = 0;
  std::vector<Complex> index;  // row-major in j, i.e. index[j * nx + i]
  Complex at(const Point& x) const;
};

enum class ProfileKind { SmoothBump, PolyBump };

/// One compactly supported bump. SmoothBump: a exp(1/(u^2 - 1)) (C-infinity);
/// PolyBump: a (1 - u^2)^3 (C^2), u = (x - c)/w, zero for |u| >= 1.
struct Bump {
  ProfileKind kind = ProfileKind::SmoothBump;
  double amplitude = 0.0;
  double center = 0.0;
  double half_width = 1.0;
};

/// Locally rough surface x2 = h(x1).
struct SurfaceProfile {
  std::vector<Bump> bumps;
  double height(double x) const;
  double slope(double x) const;
  double curvature_term(double x) const;  // h''(x)
  /// Smallest interval containing supp(h); {0, 0} when flat.
  std::pair<double, double> support() const;
  bool flat() const;
};

enum class SceneVariant { Obstacle, Medium, RoughSurface };

std::string to_string(SceneVariant v);

struct Scene {
  SceneVariant variant = SceneVariant::Obstacle;
  std::vector<ObstacleComponent> obstacles;
  std::vector<MediumInclusion> inclusions;
  std::optional<MediumRaster> raster;
  SurfaceProfile surface;
  std::optional<ReferenceBall> ball;
  double ball_index = 2.0;  // n0, medium scenes only
  double enclosing_radius = 1.0;  // R of B_R

  /// Refractive index at x including the ball (medium scenes).
  Complex index_at(const Point& x) const;
};

enum class Severity { Error, Warning };

struct Violation {
  std::string code;
  std::string message;
  Severity severity = Severity::Error;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool admissible() const { return violations.empty(); }
  bool passes_hard_checks() const;
  bool has(const std::string& code) const;
  std::string summary() const;
};

ValidationReport validate_scene(const Scene& scene, const Wavenumber& k);

/// Throws a Geometry error if the hard checks fail.
void require_hard_checks(const Scene& scene, const Wavenumber& k);

/// Upper bound on the ball radius free of interior transmission eigenvalues.
double transmission_radius_bound(double k, double n0);

}  // namespace phaseless
