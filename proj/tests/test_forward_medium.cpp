#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "phaseless/forward_medium.hpp"
#include "phaseless/forward_obstacle.hpp"
#include "phaseless/incident.hpp"
#include "phaseless/scenes.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace phaseless;
using test_support::error_kind;
using test_oracles::penetrable_series;

namespace {

Scene medium(double a, double index, std::optional<ReferenceBall> ball = std::nullopt, double n0 = 2.0) {
  Scene s;
  s.variant = SceneVariant::Medium;
  if (a > 0) s.inclusions.push_back({BoundaryCurve::circle({0, 0}, a), Complex(index, 0.0)});
  s.enclosing_radius = std::max(1.1 * a, 0.5);
  s.ball = ball;
  s.ball_index = n0;
  return s;
}

double cpw_h(double k, double cpw) { return 2 * kPi / (k * cpw); }


double rel_max(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("zero contrast gives zero far field") {
  Scene s = medium(0.0, 1.0);
  s.inclusions.push_back({BoundaryCurve::circle({0, 0}, 0.3), Complex(1.0, 0.0)});
  const DirectionGrid g = DirectionGrid::uniform(16);
  const FarFieldMatrix F = MediumSolver(s, Wavenumber(2.0), cpw_h(2.0, 32)).multistatic(g, g);
  CHECK(F.values.cwiseAbs().maxCoeff() <= 1e-14);
  const MediumSolver empty(medium(0.0, 1.0), Wavenumber(2.0), cpw_h(2.0, 32));
  CHECK(empty.multistatic(g, g).values.cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("exact cell averages") {
  const MediumGrid g = build_medium_grid(medium(0.5, 1.3), 0.037);
  Complex total = 0.0;
  for (const Complex& c : g.contrast) total += c;
  CHECK(std::abs(total * 0.037 * 0.037 - 0.3 * kPi * 0.25) < 1e-12);
  CHECK(g.unknowns() > g.size());
}

TEST_CASE("Born approximation for a weak disk") {
  const double k = 2.0, a = 0.5, m = 0.01;
  const MediumSolver solver(medium(a, 1.0 + m), Wavenumber(k), cpw_h(k, 32));
  const DirectionGrid obs = DirectionGrid::uniform(16);
  const Point d(1, 0);
  const Eigen::VectorXcd u = solver.far_field_medium(solver.solve_ls(IncidentField::plane_wave(Wavenumber(k), d)), obs);
  double err = 0, ref = 0;
  for (int i = 0; i < obs.size(); ++i) {
    // k^2 gamma m int_disk e^{ik(d - xhat).y} dy, with the disk transform 2 pi a^2 J1(q a)/(q a).
    const double q = k * (d - obs.direction(i)).norm();
    const double ft = q * a < 1e-12 ? kPi * a * a : 2 * kPi * a * a * bessel_j(1, q * a) / (q * a);
    const Complex born = k * k * far_field_constant(k) * m * ft;
    err = std::max(err, std::abs(u(i) - born));
    ref = std::max(ref, std::abs(born));
  }
  CHECK(err / ref <= 2e-2);
}

TEST_CASE("penetrable disk against the transmission series") {
  const double k = 2.0, a = 0.5, n = 2.0;
  const MediumSolver solver(medium(a, n), Wavenumber(k), cpw_h(k, 64));
  const DirectionGrid g = DirectionGrid::uniform(16);
  const FarFieldMatrix F = solver.multistatic(g, g);
  Eigen::MatrixXcd ref(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) ref(i, j) = penetrable_series(k, a, n, g.angles[i], g.angles[j]);
  CHECK(rel_max(F.values, ref) <= 1e-4);
  CHECK(std::abs(penetrable_disk_far_field(k, a, n, 0.7, 0.2) - penetrable_series(k, a, n, 0.7, 0.2)) < 1e-13);
}

TEST_CASE("ball-only scene against the translated series") {
  const double k = 5.0, n0 = 2.0;
  const ReferenceBall b{{1.2, 0.6}, 0.1};
  const MediumSolver solver(medium(0.0, 1.0, b, n0), Wavenumber(k), cpw_h(k, 64));
  const DirectionGrid g = DirectionGrid::uniform(16);
  const FarFieldMatrix F = solver.multistatic(g, g);
  Eigen::MatrixXcd ref(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      ref(i, j) = penetrable_series(k, b.radius, n0, g.angles[i], g.angles[j]) *
                  translation_factor(k, g.direction(i), g.direction(j), b.center);
  CHECK(rel_max(F.values, ref) <= 1e-4);
}

TEST_CASE("nontrivial far field of the ball, n0 = 2, k rho = 1") {
  const double k = 5.0;
  const MediumSolver solver(medium(0.0, 1.0, ReferenceBall{{1.0, 0.5}, 0.2}), Wavenumber(k), cpw_h(k, 32));
  const DirectionGrid obs = DirectionGrid::uniform(32);
  const Eigen::VectorXcd u = solver.far_field_medium(solver.solve_ls(IncidentField::plane_wave(Wavenumber(k), Point(1, 0))), obs);
  CHECK(u.cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("linearity and reciprocity") {
  const Wavenumber k(5.0);
  GmresOptions tight;
  tight.tolerance = 1e-14;
  const MediumSolver solver(builtin_scene("medium_kite_ball"), k, cpw_h(5.0, 16), tight);
  const Point d1(1, 0), d2(std::cos(2.2), std::sin(2.2));
  const DirectionGrid obs = DirectionGrid::uniform(24);
  const Eigen::VectorXcd f1 = solver.far_field_medium(solver.solve_ls(IncidentField::plane_wave(k, d1)), obs);
  const Eigen::VectorXcd f2 = solver.far_field_medium(solver.solve_ls(IncidentField::plane_wave(k, d2)), obs);
  const Eigen::VectorXcd f12 = solver.far_field_medium(solver.solve_ls(IncidentField::superposition(k, d1, d2)), obs);
  CHECK((f12 - f1 - f2).cwiseAbs().maxCoeff() <= 1e-12 * f12.cwiseAbs().maxCoeff());

  // The discrete operator is reciprocal only up to discretization error (~h^4).
  const DirectionGrid g = DirectionGrid::uniform(16);
  const FarFieldMatrix F = MediumSolver(builtin_scene("medium_kite_ball"), k, cpw_h(5.0, 64)).multistatic(g, g);
  double err = 0;
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n) err = std::max(err, std::abs(F.values(m, n) - F.values((n + 8) % 16, (m + 8) % 16)));
  CHECK(err <= 1e-6);
}

TEST_CASE("second-order grid convergence") {
  const double k = 2.0;
  const DirectionGrid g = DirectionGrid::uniform(8);
  std::vector<Eigen::MatrixXcd> F;
  for (double cpw : {8.0, 16.0, 32.0})
    F.push_back(MediumSolver(medium(0.5, 2.0), Wavenumber(k), cpw_h(k, cpw)).multistatic(g, g).values);
  const double d1 = (F[1] - F[0]).cwiseAbs().maxCoeff(), d2 = (F[2] - F[1]).cwiseAbs().maxCoeff();
  CAPTURE(d1);
  CAPTURE(d2);
  CHECK(d1 / d2 >= 3.0);
}

TEST_CASE("GMRES failure reports the residual history") {
  GmresOptions opts;
  opts.max_iterations = 2;
  opts.restart = 2;
  const MediumSolver solver(builtin_scene("medium_disk_ball"), Wavenumber(5.0), cpw_h(5.0, 16), opts);
  try {
    solver.solve_ls(IncidentField::plane_wave(Wavenumber(5.0), Point(1, 0)));
    FAIL("expected a Numerical error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}

TEST_CASE("scene checks") {
  CHECK(error_kind([] { MediumSolver(builtin_scene("kite_ball"), Wavenumber(5.0), 0.05); }) == ErrorKind::Domain);
  CHECK(error_kind([] { MediumSolver(builtin_scene("medium_disk_ball"), Wavenumber(5.0), 0.0); }) == ErrorKind::Domain);
  Scene s = builtin_scene("medium_disk_ball");
  s.inclusions[0].index = Complex(-1.0, 0.0);
  CHECK(error_kind([&] { MediumSolver(s, Wavenumber(5.0), 0.05); }) == ErrorKind::Geometry);
}

TEST_CASE("raster CSV round trip and raster scenes") {
  MediumRaster r;
  r.x0 = -0.2;
  r.y0 = -0.1;
  r.h = 0.05;
  r.nx = 6;
  r.ny = 4;
  r.index.assign(24, Complex(1.0, 0.0));
  r.index[7] = Complex(1.7, 0.1);
  r.index[20] = Complex(1.0 / 3.0, 0.0);
  const std::string path = (std::filesystem::temp_directory_path() / "phaseless_raster.csv").string();
  write_medium_raster(path, r);
  const MediumRaster q = read_medium_raster(path);
  CHECK(q.x0 == r.x0);
  CHECK(q.h == r.h);
  CHECK(q.nx == r.nx);
  CHECK(q.ny == r.ny);
  CHECK(q.index == r.index);
  std::filesystem::remove(path);
  CHECK(r.at(Point(-0.2 + 1.5 * 0.05, -0.1 + 1.5 * 0.05)) == Complex(1.7, 0.1));
  CHECK(r.at(Point(5, 5)) == Complex(1.0, 0.0));
}
