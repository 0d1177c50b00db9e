#include <doctest.h>

#include <cmath>

#include "phaseless/geometry.hpp"
#include "phaseless/scenes.hpp"
#include "support.hpp"

using namespace phaseless;
using test_support::error_kind;

namespace {

Scene obstacle_with_ball(Point b, double rho) {
  Scene s;
  s.variant = SceneVariant::Obstacle;
  s.obstacles.push_back({BoundaryCurve::kite({0.15, 0}, 0.6), BoundaryKind::Dirichlet, {}});
  s.enclosing_radius = 1.2;
  s.ball = ReferenceBall{b, rho};
  return s;
}

}  // namespace

TEST_CASE("circle length and area") {
  const BoundaryCurve c = BoundaryCurve::circle({0, 0}, 1.0);
  CHECK(std::abs(c.length() - 2 * kPi) < 1e-12);
  CHECK(std::abs(c.area() - kPi) < 1e-12);
  CHECK(c.contains(Point(0.5, 0.5)));
  CHECK_FALSE(c.contains(Point(0.8, 0.8)));
}

TEST_CASE("kite bounding box") {
  // x(t) = c + 1.3 c^2 - 1.3 with c = cos t is smallest at c = -1/2.6.
  const double c = -1.0 / 2.6;
  const double xmin = c + 1.3 * c * c - 1.3, xmax = 1.0;
  const BoundaryCurve kite = BoundaryCurve::kite();
  double lo = 1e9, hi = -1e9, ylo = 1e9, yhi = -1e9;
  const int n = 20000;
  for (int j = 0; j < n; ++j) {
    const Point p = kite.point(2 * kPi * j / n);
    lo = std::min(lo, p.x());
    hi = std::max(hi, p.x());
    ylo = std::min(ylo, p.y());
    yhi = std::max(yhi, p.y());
  }
  // Refine the minimum with a local golden-section search.
  double a = std::acos(c) - 0.1, b = std::acos(c) + 0.1;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 100; ++i) {
    const double u = b - g * (b - a), v = a + g * (b - a);
    (kite.point(u).x() < kite.point(v).x() ? b : a) = (kite.point(u).x() < kite.point(v).x() ? v : u);
  }
  lo = std::min(lo, kite.point((a + b) / 2).x());
  CHECK(std::abs(lo - xmin) < 1e-12);
  CHECK(std::abs(hi - xmax) < 1e-12);
  CHECK(std::abs(ylo + 1.5) < 1e-12);
  CHECK(std::abs(yhi - 1.5) < 1e-12);
}

TEST_CASE("self-crossing trig polynomial is rejected") {
  CurveParams p;
  p.cos_coeffs = {0.3, 1.0};  // limacon with an inner loop
  CHECK(error_kind([&] { BoundaryCurve::make(CurveKind::TrigPolynomial, p); }) == ErrorKind::Geometry);
  p.cos_coeffs = {1.0, 0.2, 0.1};
  p.sin_coeffs = {0.0, 0.05};
  CHECK_NOTHROW(BoundaryCurve::make(CurveKind::TrigPolynomial, p));
}

TEST_CASE("invalid curve parameters") {
  CHECK(error_kind([] { BoundaryCurve::circle({0, 0}, 0.0); }) == ErrorKind::Geometry);
  CHECK(error_kind([] { BoundaryCurve::kite({0, 0}, -1.0); }) == ErrorKind::Geometry);
  CurveParams p;
  p.bump_amplitude = -1.0;
  CHECK(error_kind([&] { BoundaryCurve::make(CurveKind::Circle, p); }) == ErrorKind::Geometry);
}

TEST_CASE("bump scales the curve radially") {
  CurveParams p;
  p.scale = 0.6;
  p.bump_amplitude = 1e-3;
  p.bump_at = kPi / 2;
  const BoundaryCurve plain = BoundaryCurve::kite({0, 0}, 0.6);
  const BoundaryCurve bumped = BoundaryCurve::make(CurveKind::Kite, p);
  CHECK((bumped.point(kPi / 2) - plain.point(kPi / 2) * (1 + 1e-3)).norm() < 1e-15);
  CHECK((bumped.point(3 * kPi / 2) - plain.point(3 * kPi / 2)).norm() < 1e-3 * 1e-30);
  // Derivatives against central differences.
  for (double t : {0.3, 1.4, 1.6, 2.9}) {
    const double h = 1e-5;
    const Point fd1 = (bumped.point(t + h) - bumped.point(t - h)) / (2 * h);
    const Point fd2 = (bumped.point(t + h) - 2 * bumped.point(t) + bumped.point(t - h)) / (h * h);
    CHECK((bumped.d1(t) - fd1).norm() < 1e-8);
    CHECK((bumped.d2(t) - fd2).norm() < 1e-4);
  }
}

TEST_CASE("quadrature rule") {
  const QuadratureRule q = quadrature(BoundaryCurve::circle({0.3, -0.2}, 1.0), 64);
  double sum = 0.0, unit = 0.0;
  bool outward = true;
  for (int j = 0; j < q.size(); ++j) {
    sum += q.weights[j];
    unit = std::max(unit, std::abs(q.normals[j].norm() - 1.0));
    outward = outward && q.normals[j].dot(q.nodes[j] - Point(0.3, -0.2)) > 0;
  }
  CHECK(std::abs(sum - 2 * kPi) < 1e-13);
  CHECK(unit < 1e-14);
  CHECK(outward);

  const BoundaryCurve kite = BoundaryCurve::kite();
  CHECK(std::abs(kite.length(128) - kite.length(256)) < 1e-10);
  for (const std::string& name : builtin_scene_names()) {
    const Scene s = builtin_scene(name);
    for (const auto& c : s.obstacles) CHECK(std::abs(c.curve.length(128) - c.curve.length(256)) < 1e-10);
    for (const auto& c : s.inclusions) CHECK(std::abs(c.region.length(128) - c.region.length(256)) < 1e-10);
  }

  CHECK(error_kind([&] { quadrature(kite, 63); }) == ErrorKind::Domain);
  CHECK(error_kind([&] { quadrature(kite, 14); }) == ErrorKind::Domain);
}

TEST_CASE("scene validation") {
  const Wavenumber k(5.0);
  CHECK(validate_scene(obstacle_with_ball({2, 0.8}, 0.4), k).admissible());

  // k rho = 3 > j_{0,1}: warning, not a hard failure.
  const ValidationReport big = validate_scene(obstacle_with_ball({2.5, 0.8}, 0.6), k);
  CHECK(big.has("eigenvalue_risk"));
  CHECK(big.passes_hard_checks());

  const ValidationReport overlap = validate_scene(obstacle_with_ball({1.3, 0}, 0.4), k);
  CHECK(overlap.has("ball_overlaps_enclosing_disk"));
  CHECK_FALSE(overlap.passes_hard_checks());
  CHECK(error_kind([&] { require_hard_checks(obstacle_with_ball({1.3, 0}, 0.4), k); }) ==
        ErrorKind::Geometry);

  // Deterministic and idempotent.
  CHECK(validate_scene(obstacle_with_ball({1.3, 0}, 0.4), k).summary() == overlap.summary());

  Scene imp = obstacle_with_ball({2, 0.8}, 0.4);
  imp.obstacles[0].condition = BoundaryKind::Impedance;
  imp.obstacles[0].impedance.constant = Complex(1.0, -0.5);
  CHECK(validate_scene(imp, k).has("impedance_sign"));
}

TEST_CASE("medium transmission radius") {
  const double kv = 5.0, n0 = 2.0;
  const double bound = transmission_radius_bound(kv, n0);
  CHECK(std::abs(bound - kPi / (2 * kv * (std::sqrt(2.0) + 1))) < 1e-16);
  Scene s = builtin_scene("medium_disk_ball");
  s.ball->radius = 0.9 * bound;
  CHECK_FALSE(validate_scene(s, Wavenumber(kv)).has("transmission_radius"));
  s.ball->radius = bound;
  CHECK(validate_scene(s, Wavenumber(kv)).has("transmission_radius"));
  s.inclusions[0].index = Complex(2.0, -0.1);
  CHECK(validate_scene(s, Wavenumber(kv)).has("index_sign"));
}

TEST_CASE("rough surface scene checks") {
  const Wavenumber k(5.0);
  Scene s = builtin_scene("rough_ball");
  CHECK(validate_scene(s, k).admissible());
  s.ball->center = Point(0.2, 2.5);
  CHECK(validate_scene(s, k).has("ball_meets_axis"));
  s = builtin_scene("rough_ball");
  s.surface.bumps[0].half_width = 2.0;
  CHECK(validate_scene(s, k).has("surface_support"));
}

TEST_CASE("surface profile is C2 with compact support") {
  for (ProfileKind kind : {ProfileKind::SmoothBump, ProfileKind::PolyBump}) {
    SurfaceProfile p;
    p.bumps.push_back({kind, 0.3, 0.1, 0.8});
    CHECK(p.support().first == doctest::Approx(-0.7));
    CHECK(p.support().second == doctest::Approx(0.9));
    CHECK(p.height(0.95) == 0.0);
    CHECK(p.height(-0.75) == 0.0);
    for (double x : {-0.6, -0.2, 0.1, 0.5, 0.85}) {
      const double h = 1e-5;
      CHECK(std::abs(p.slope(x) - (p.height(x + h) - p.height(x - h)) / (2 * h)) < 1e-7);
      CHECK(std::abs(p.curvature_term(x) - (p.slope(x + h) - p.slope(x - h)) / (2 * h)) < 1e-5);
    }
  }
  CHECK(SurfaceProfile{}.flat());
}

TEST_CASE("builtin scenes are admissible at k = 5") {
  for (const std::string& name : builtin_scene_names()) {
    CAPTURE(name);
    CHECK(validate_scene(builtin_scene(name), Wavenumber(5.0)).admissible());
  }
  CHECK(error_kind([] { builtin_scene("nope"); }).has_value());
}
