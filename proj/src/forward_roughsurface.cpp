#include "phaseless/forward_roughsurface.hpp"

#include <cmath>

#include "phaseless/error.hpp"
#include "phaseless/nystrom.hpp"

namespace phaseless {

namespace {

void require_downward(const Point& d) {
  require_unit(d);
  if (!(d.y() < 0)) fail(ErrorKind::Domain, "incident direction must point downward");
}

void require_upward(const Point& x) {
  require_unit(x);
  if (!(x.y() > 0)) fail(ErrorKind::Domain, "observation direction must point upward");
}

std::pair<double, double> truncated_span(const Scene& scene, double k, double margin) {
  auto [a, b] = scene.surface.support();
  const double lambda = 2 * kPi / k;
  return {a - margin * lambda, b + margin * lambda};
}

std::shared_ptr<const detail::LayerSystem> rough_system(const Scene& scene, const Wavenumber& k,
                                                        int n_surface, int n_ball, double margin) {
  if (scene.variant != SceneVariant::RoughSurface)
    fail(ErrorKind::Domain, "rough-surface solver needs a rough_surface scene");
  if (!(margin > 0)) fail(ErrorKind::Domain, "flat margin must be positive");
  require_hard_checks(scene, k);
  const auto [a, b] = truncated_span(scene, k, margin);
  const SurfaceProfile profile = scene.surface;
  // x1 decreases with t so that the curve normal points into the upper domain.
  const double len = b - a;
  detail::CurveEval eval = [profile, a, b, len](double t, Point& x, Point& d1, Point& d2) {
    const double s = b - len * t / (2 * kPi);
    const double ds = -len / (2 * kPi);
    x = Point(s, profile.height(s));
    d1 = Point(ds, profile.slope(s) * ds);
    d2 = Point(0.0, profile.curvature_term(s) * ds * ds);
  };
  std::vector<detail::Panel> panels;
  panels.push_back(detail::make_panel(eval, n_surface, BoundaryKind::Dirichlet));
  if (scene.ball)
    panels.push_back(detail::make_panel(
        BoundaryCurve::circle(scene.ball->center, scene.ball->radius), n_ball,
        BoundaryKind::Dirichlet));
  return std::make_shared<detail::LayerSystem>(std::move(panels), k.value(), true);
}

}  // namespace

std::function<Complex(const Point&)> reflected_wave(const Wavenumber& k, const Point& d) {
  require_downward(d);
  const Point dr(d.x(), -d.y());
  const double kk = k.value();
  return [dr, kk](const Point& x) { return -std::exp(Complex(0.0, kk * x.dot(dr))); };
}

IncidentField mirrored_incidence(const Wavenumber& k, const Point& d) {
  require_downward(d);
  return IncidentField::combination(k, {{1.0, d}, {-1.0, Point(d.x(), -d.y())}});
}

Complex half_plane_green(const Point& x, const Point& y, const Wavenumber& k) {
  return fundamental_solution_2d(x, y, k) - fundamental_solution_2d(x, Point(y.x(), -y.y()), k);
}

RoughSurfaceSolver::RoughSurfaceSolver(const Scene& scene, const Wavenumber& k, int n_surface,
                                       int n_ball, double margin_wavelengths)
    : BoundarySolver(rough_system(scene, k, n_surface, n_ball, margin_wavelengths)),
      truncation_(truncated_span(scene, k, margin_wavelengths)) {}

BoundaryDensity RoughSurfaceSolver::solve_rough(const Point& d) const {
  return solve(mirrored_incidence(Wavenumber(k()), d));
}

Complex RoughSurfaceSolver::far_field_rough(const BoundaryDensity& density,
                                            const Point& xhat) const {
  require_upward(xhat);
  return far_field(density, xhat);
}

FarFieldMatrix RoughSurfaceSolver::multistatic(const DirectionGrid& obs,
                                               const DirectionGrid& inc) const {
  obs.validate();
  inc.validate();
  for (int m = 0; m < obs.size(); ++m) require_upward(obs.direction(m));
  for (int n = 0; n < inc.size(); ++n) require_downward(inc.direction(n));
  FarFieldMatrix F;
  F.obs = obs;
  F.inc = inc;
  F.k = k();
  Eigen::MatrixXcd rows(obs.size(), unknowns());
  for (int m = 0; m < obs.size(); ++m) rows.row(m) = system_->far_field_row(obs.direction(m));
  Eigen::MatrixXcd B(unknowns(), inc.size());
  const Wavenumber kw(k());
  for (int n = 0; n < inc.size(); ++n) {
    const IncidentField u = mirrored_incidence(kw, inc.direction(n));
    B.col(n) = system_->rhs([&](const Point& x) { return u.value(x); },
                            [&](const Point& x) { return u.gradient(x); });
  }
  F.values = rows * lu_.solve(B);
  F.validate();
  return F;
}

}  // namespace phaseless
