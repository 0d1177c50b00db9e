#include <doctest.h>

#include <chrono>
#include <cmath>
#include <filesystem>

#include "phaseless/farfield.hpp"
#include "phaseless/forward_obstacle.hpp"
#include "phaseless/incident.hpp"
#include "phaseless/scenes.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace phaseless;
using test_support::error_kind;
using namespace test_oracles;

namespace {

double max_abs(const Eigen::MatrixXcd& a) { return a.cwiseAbs().maxCoeff(); }

Scene disk_scene(Point c, double a, std::optional<ReferenceBall> ball = std::nullopt) {
  Scene s;
  s.variant = SceneVariant::Obstacle;
  if (a > 0) s.obstacles.push_back({BoundaryCurve::circle(c, a), BoundaryKind::Dirichlet, {}});
  s.enclosing_radius = std::max(1.1 * (c.norm() + a), 0.5);
  s.ball = ball;
  return s;
}

Complex disk_series_scattered(double k, double a, const Point& x, double phi) {
  const double r = x.norm(), theta = std::atan2(x.y(), x.x());
  const int nmax = static_cast<int>(k * a) + 40;
  Complex s = 0.0;
  for (int n = -nmax; n <= nmax; ++n)
    s += std::pow(Complex(0, 1), n) * disk_coefficient(n, k, a, 0.0, true) * hankel1(std::abs(n), k * r) *
         (n < 0 && (n % 2) ? -1.0 : 1.0) * std::polar(1.0, n * (theta - phi));
  return s;
}

double rel_err_vs_series(const FarFieldMatrix& F, double a, Point shift = {0, 0}) {
  double err = 0.0, ref = 0.0;
  for (int m = 0; m < F.obs.size(); ++m)
    for (int n = 0; n < F.inc.size(); ++n) {
      const Complex s = disk_series_far(F.k, a, F.obs.angles[m], F.inc.angles[n]) *
                        translation_factor(F.k, F.obs.direction(m), F.inc.direction(n), shift);
      err = std::max(err, std::abs(F.values(m, n) - s));
      ref = std::max(ref, std::abs(s));
    }
  return err / ref;
}

// Trapezoid sum of |u_inf|^2 over a uniform grid and the forward value term.
std::pair<double, double> optical_sides(const ObstacleSolver& solver, double k, int n_obs) {
  const DirectionGrid obs = DirectionGrid::uniform(n_obs);
  const Point d(1.0, 0.0);
  const BoundaryDensity phi = solver.solve(IncidentField::plane_wave(Wavenumber(k), d));
  const Eigen::VectorXcd u = solver.far_field(phi, obs);
  const double lhs = u.squaredNorm() * 2 * kPi / n_obs;
  const double rhs = -2 * std::sqrt(2 * kPi / k) * std::real(std::polar(1.0, kPi / 4) * u(0));
  return {lhs, rhs};
}

}  // namespace

TEST_CASE("sound-soft disk boundary residual and near field") {
  const Scene s = disk_scene({0, 0}, 1.0);
  const Wavenumber k(1.0);
  const ObstacleSolver solver(s, k, 64);
  const IncidentField inc = IncidentField::plane_wave(k, Point(1, 0));
  const BoundaryDensity phi = solver.solve(inc);
  CHECK(phi.values.size() == 64);
  CHECK(solver.boundary_residual(phi, inc) < 1e-8);
  for (const Point& x : {Point(2, 0.5), Point(-1.5, -1.5), Point(0, 3)})
    CHECK(std::abs(solver.scattered(phi, x) - disk_series_scattered(1.0, 1.0, x, 0.0)) < 1e-10);
}

TEST_CASE("disk far field against the series") {
  for (double k : {1.0, 5.0}) {
    CAPTURE(k);
    const auto t0 = std::chrono::steady_clock::now();
    const FarFieldMatrix F = multistatic(disk_scene({0, 0}, 1.0), Wavenumber(k), DirectionGrid::uniform(64),
                                         DirectionGrid::uniform(64), 128);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(rel_err_vs_series(F, 1.0) <= 1e-8);
    CHECK(secs <= 5.0);
  }
  // Radius != 1, off-center: translation of the centered series.
  const Point c(0.2, -0.3);
  const FarFieldMatrix F = multistatic(disk_scene(c, 0.7), Wavenumber(5.0), DirectionGrid::uniform(32),
                                       DirectionGrid::uniform(32), 128);
  CHECK(rel_err_vs_series(F, 0.7, c) <= 1e-8);
  // The library's own series agrees with the test oracle.
  CHECK(std::abs(disk_far_field(5.0, 0.7, 1.1, 0.3) - disk_series_far(5.0, 0.7, 1.1, 0.3)) < 1e-13);
}

TEST_CASE("impedance disk against the series") {
  for (Complex eta : {Complex(2.0, 0.0), Complex(1.5, 0.8)}) {
    CAPTURE(eta);
    Scene s = disk_scene({0, 0}, 0.8);
    s.obstacles[0].condition = BoundaryKind::Impedance;
    s.obstacles[0].impedance.constant = eta;
    const ObstacleSolver solver(s, Wavenumber(3.0), 128);
    const DirectionGrid obs = DirectionGrid::uniform(24);
    const Point d(std::cos(0.4), std::sin(0.4));
    const Eigen::VectorXcd u = solver.far_field(solver.solve(IncidentField::plane_wave(Wavenumber(3.0), d)), obs);
    double err = 0, ref = 0;
    for (int m = 0; m < obs.size(); ++m) {
      const Complex e = disk_series_far(3.0, 0.8, obs.angles[m], 0.4, eta, false);
      err = std::max(err, std::abs(u(m) - e));
      ref = std::max(ref, std::abs(e));
    }
    CHECK(err / ref <= 1e-8);
  }
}

TEST_CASE("superposition is linear") {
  const Scene s = builtin_scene("kite_ball");
  const Wavenumber k(5.0);
  const ObstacleSolver solver(s, k, 128);
  const Point d1(1, 0), d2(std::cos(2.0), std::sin(2.0));
  const BoundaryDensity a = solver.solve(IncidentField::plane_wave(k, d1));
  const BoundaryDensity b = solver.solve(IncidentField::plane_wave(k, d2));
  const BoundaryDensity ab = solver.solve(IncidentField::superposition(k, d1, d2));
  CHECK((ab.values - a.values - b.values).cwiseAbs().maxCoeff() <= 1e-12 * ab.values.cwiseAbs().maxCoeff());
  const DirectionGrid obs = DirectionGrid::uniform(32);
  const Eigen::VectorXcd fa = solver.far_field(a, obs), fb = solver.far_field(b, obs),
                         fab = solver.far_field(ab, obs);
  CHECK((fab - fa - fb).cwiseAbs().maxCoeff() <= 1e-12 * fab.cwiseAbs().maxCoeff());
}

TEST_CASE("invalid scenes are rejected") {
  Scene s = disk_scene({0, 0}, 0.5);
  s.obstacles.push_back({BoundaryCurve::circle({0.3, 0}, 0.5), BoundaryKind::Dirichlet, {}});
  CHECK(error_kind([&] { ObstacleSolver(s, Wavenumber(2.0), 64); }) == ErrorKind::Geometry);
  CHECK(error_kind([] { ObstacleSolver(builtin_scene("medium_disk_ball"), Wavenumber(2.0), 64); }).has_value());
  CHECK(error_kind([] { IncidentField::plane_wave(Wavenumber(1.0), Point(1.0, 1e-6)); }) == ErrorKind::Domain);
}

TEST_CASE("ball-only scenes follow the translation formula") {
  const Wavenumber k(5.0);
  const DirectionGrid g = DirectionGrid::uniform(32);
  const ReferenceBall b1{{2.0, 0.8}, 0.4}, b2{{1.7, -1.1}, 0.4};
  const FarFieldMatrix F1 = multistatic(disk_scene({0, 0}, 0.0, b1), k, g, g, 128);
  const FarFieldMatrix F2 = multistatic(disk_scene({0, 0}, 0.0, b2), k, g, g, 128);
  CHECK(rel_err_vs_series(F1, 0.4, b1.center) <= 1e-8);
  double err = 0.0;
  for (int m = 0; m < g.size(); ++m)
    for (int n = 0; n < g.size(); ++n)
      err = std::max(err, std::abs(F1.values(m, n) * translation_factor(5.0, g.direction(m), g.direction(n),
                                                                        b2.center - b1.center) -
                                   F2.values(m, n)));
  CHECK(err / max_abs(F2.values) <= 1e-10);
}

TEST_CASE("reciprocity and rotational symmetry") {
  const Wavenumber k(5.0);
  const DirectionGrid g = DirectionGrid::uniform(64);
  for (const char* name : {"kite_ball", "circle_ball", "kite_bump_ball", "disk_ball"}) {
    CAPTURE(name);
    const FarFieldMatrix F = multistatic(builtin_scene(name), k, g, g, 128);
    double err = 0.0;
    for (int m = 0; m < 64; ++m)
      for (int n = 0; n < 64; ++n) err = std::max(err, std::abs(F.values(m, n) - F.values((n + 32) % 64, (m + 32) % 64)));
    CHECK(err <= 1e-8);
  }
  const FarFieldMatrix D = multistatic(disk_scene({0, 0}, 1.0), k, g, g, 128);
  double err = 0.0;
  for (int m = 0; m < 64; ++m)
    for (int n = 0; n < 64; ++n) err = std::max(err, std::abs(D.values(m, n) - D.values((m - n + 64) % 64, 0)));
  CHECK(err <= 1e-8);
}

TEST_CASE("self-convergence in N") {
  const Wavenumber k(5.0);
  const DirectionGrid g = DirectionGrid::uniform(16);
  for (const char* name : {"kite_ball", "circle_ball"}) {
    CAPTURE(name);
    const FarFieldMatrix a = multistatic(builtin_scene(name), k, g, g, 128);
    const FarFieldMatrix b = multistatic(builtin_scene(name), k, g, g, 256);
    CHECK(max_abs(a.values - b.values) < 1e-9);
  }
}

TEST_CASE("optical theorem") {
  const double k = 5.0;
  SUBCASE("sound-soft") {
    const auto [lhs, rhs] = optical_sides(ObstacleSolver(builtin_scene("kite_ball"), Wavenumber(k), 128), k, 128);
    CHECK(std::abs(lhs - rhs) <= 1e-6 * rhs);
  }
  Scene s = builtin_scene("kite_ball");
  s.obstacles[0].condition = BoundaryKind::Impedance;
  SUBCASE("real impedance") {
    s.obstacles[0].impedance.constant = 2.0;
    s.obstacles[0].impedance.cos_coeffs = {0.5};
    const auto [lhs, rhs] = optical_sides(ObstacleSolver(s, Wavenumber(k), 128), k, 128);
    CHECK(std::abs(lhs - rhs) <= 1e-6 * rhs);
  }
  SUBCASE("absorbing impedance") {
    s.obstacles[0].impedance.constant = Complex(2.0, 1.5);
    const auto [lhs, rhs] = optical_sides(ObstacleSolver(s, Wavenumber(k), 128), k, 128);
    CHECK(lhs < rhs * (1 - 1e-3));
  }
}

TEST_CASE("far-field CSV round trip is bit exact") {
  const DirectionGrid g = DirectionGrid::uniform(12);
  const FarFieldMatrix F = multistatic(builtin_scene("kite_ball"), Wavenumber(5.0), g, g, 64);
  const std::string path = (std::filesystem::temp_directory_path() / "phaseless_rt.csv").string();
  write_farfield_csv(path, F, {{"note", "x"}});
  Header h;
  const FarFieldMatrix G = read_farfield_csv(path, &h);
  CHECK(h.at("note") == "x");
  CHECK(G.k == F.k);
  CHECK(G.obs.angles == F.obs.angles);
  CHECK(G.inc.angles == F.inc.angles);
  CHECK((G.values.array() == F.values.array()).all());
  std::filesystem::remove(path);
}
