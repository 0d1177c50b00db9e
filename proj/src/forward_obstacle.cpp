#include "phaseless/forward_obstacle.hpp"

#include <cmath>
#include <sstream>

#include "phaseless/error.hpp"
#include "phaseless/nystrom.hpp"

namespace phaseless {

BoundarySolver::BoundarySolver(std::shared_ptr<const detail::LayerSystem> system)
    : system_(std::move(system)) {
  const Eigen::MatrixXcd A = system_->matrix();
  lu_.compute(A);
  rcond_ = lu_.rcond();
  if (!(rcond_ > 1e-13)) {
    std::ostringstream msg;
    msg << "boundary integral system is ill-conditioned (rcond estimate " << rcond_ << ")";
    fail(ErrorKind::Numerical, msg.str());
  }
}

BoundarySolver::~BoundarySolver() = default;

int BoundarySolver::unknowns() const { return system_->size(); }
double BoundarySolver::k() const { return system_->k(); }

BoundaryDensity BoundarySolver::solve(const IncidentField& incident) const {
  if (std::abs(incident.k() - system_->k()) > 1e-14 * system_->k())
    fail(ErrorKind::Domain, "incident wavenumber differs from the solver's");
  const Eigen::VectorXcd b = system_->rhs([&](const Point& x) { return incident.value(x); },
                                          [&](const Point& x) { return incident.gradient(x); });
  BoundaryDensity d;
  d.values = lu_.solve(b);
  for (size_t p = 0; p < system_->panels().size(); ++p)
    d.offsets.push_back(system_->offset(static_cast<int>(p)));
  d.k = system_->k();
  if (!d.values.allFinite()) fail(ErrorKind::Numerical, "density solve produced non-finite values");
  return d;
}

Complex BoundarySolver::far_field(const BoundaryDensity& density, const Point& xhat) const {
  return system_->far_field(density.values, xhat);
}

Eigen::VectorXcd BoundarySolver::far_field(const BoundaryDensity& density,
                                           const DirectionGrid& obs) const {
  Eigen::VectorXcd out(obs.size());
  for (int m = 0; m < obs.size(); ++m) out[m] = far_field(density, obs.direction(m));
  return out;
}

Complex BoundarySolver::scattered(const BoundaryDensity& density, const Point& x) const {
  return system_->field(density.values, x);
}

double BoundarySolver::boundary_residual(const BoundaryDensity& density,
                                         const IncidentField& incident, int per_component) const {
  double worst = 0;
  const auto& panels = system_->panels();
  for (size_t a = 0; a < panels.size(); ++a) {
    for (int s = 0; s < per_component; ++s) {
      // Irrational offset keeps the points away from the nodes.
      const double t = 2 * kPi * (s + 0.5 * (std::sqrt(5.0) - 1.0)) / per_component;
      Point x, d1, d2;
      panels[a].eval(t, x, d1, d2);
      const Complex us = system_->trace_row(static_cast<int>(a), t) * density.values;
      Complex r;
      if (panels[a].condition == BoundaryKind::Dirichlet) {
        r = incident.value(x) + us;
      } else {
        const Point nu = Point(d1.y(), -d1.x()) / d1.norm();
        const Eigen::Vector2cd g = incident.gradient(x);
        r = g[0] * nu.x() + g[1] * nu.y() + panels[a].impedance.at(t) * incident.value(x) + us;
      }
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

namespace {

std::shared_ptr<const detail::LayerSystem> obstacle_system(const Scene& scene,
                                                           const Wavenumber& k, int n) {
  if (scene.variant != SceneVariant::Obstacle)
    fail(ErrorKind::Domain, "obstacle solver needs an obstacle scene");
  require_hard_checks(scene, k);
  std::vector<detail::Panel> panels;
  for (const auto& c : scene.obstacles)
    panels.push_back(detail::make_panel(c.curve, n, c.condition, c.impedance));
  if (scene.ball)
    panels.push_back(detail::make_panel(BoundaryCurve::circle(scene.ball->center, scene.ball->radius),
                                        n, BoundaryKind::Dirichlet));
  if (panels.empty()) fail(ErrorKind::Geometry, "scene has no scatterer");
  return std::make_shared<detail::LayerSystem>(std::move(panels), k.value(), false);
}

}  // namespace

ObstacleSolver::ObstacleSolver(const Scene& scene, const Wavenumber& k, int n)
    : BoundarySolver(obstacle_system(scene, k, n)) {}

FarFieldMatrix ObstacleSolver::multistatic(const DirectionGrid& obs, const DirectionGrid& inc) const {
  obs.validate();
  inc.validate();
  FarFieldMatrix F;
  F.obs = obs;
  F.inc = inc;
  F.k = k();
  F.values.resize(obs.size(), inc.size());
  Eigen::MatrixXcd rows(obs.size(), unknowns());
  for (int m = 0; m < obs.size(); ++m) rows.row(m) = system_->far_field_row(obs.direction(m));
  Eigen::MatrixXcd B(unknowns(), inc.size());
  const Wavenumber kw(k());
  for (int n = 0; n < inc.size(); ++n) {
    const IncidentField u = IncidentField::plane_wave(kw, inc.direction(n));
    B.col(n) = system_->rhs([&](const Point& x) { return u.value(x); },
                            [&](const Point& x) { return u.gradient(x); });
  }
  F.values = rows * lu_.solve(B);
  F.validate();
  return F;
}

BoundaryDensity solve_direct(const Scene& scene, const IncidentField& incident, int n) {
  return ObstacleSolver(scene, Wavenumber(incident.k()), n).solve(incident);
}

FarFieldMatrix multistatic(const Scene& scene, const Wavenumber& k, const DirectionGrid& obs,
                           const DirectionGrid& inc, int n) {
  return ObstacleSolver(scene, k, n).multistatic(obs, inc);
}

Complex disk_far_field(double k, double a, double obs_angle, double inc_angle, int terms) {
  if (terms < 0) terms = static_cast<int>(k * a + 30);
  const Complex c = -std::sqrt(2.0 / (kPi * k)) * std::exp(Complex(0.0, -kPi / 4));
  Complex s = 0;
  for (int n = -terms; n <= terms; ++n) {
    const int m = std::abs(n);
    // J_{-n}/H_{-n} = J_n/H_n for integer n.
    s += bessel_j(m, k * a) / hankel1(m, k * a) *
         std::exp(Complex(0.0, n * (obs_angle - inc_angle)));
  }
  return c * s;
}

Complex translation_factor(double k, const Point& xhat, const Point& d, const Point& z) {
  return std::exp(Complex(0.0, k * (d - xhat).dot(z)));
}

}  // namespace phaseless
