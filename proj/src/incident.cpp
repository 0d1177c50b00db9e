#include "phaseless/incident.hpp"

#include <cmath>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {
constexpr Complex I{0.0, 1.0};
}

void require_unit(const Point& d) {
  if (!d.allFinite() || std::abs(d.norm() - 1.0) > 1e-14)
    fail(ErrorKind::Domain, "direction must be a unit vector");
}

IncidentField IncidentField::plane_wave(const Wavenumber& k, const Point& d) {
  require_unit(d);
  IncidentField f(Kind::PlaneWave, k);
  f.terms_.push_back({1.0, d});
  return f;
}

IncidentField IncidentField::superposition(const Wavenumber& k, const Point& d1, const Point& d2) {
  require_unit(d1);
  require_unit(d2);
  IncidentField f(Kind::Superposition, k);
  f.terms_ = {{1.0, d1}, {1.0, d2}};
  return f;
}

IncidentField IncidentField::combination(const Wavenumber& k, std::vector<Term> terms) {
  for (const auto& t : terms) require_unit(t.direction);
  IncidentField f(Kind::Superposition, k);
  f.terms_ = std::move(terms);
  return f;
}

IncidentField IncidentField::point_source(const Wavenumber& k, const Point& z) {
  if (!z.allFinite()) fail(ErrorKind::Domain, "point source location must be finite");
  IncidentField f(Kind::PointSource, k);
  f.source_ = z;
  return f;
}

Complex IncidentField::value(const Point& x) const {
  if (kind_ == Kind::PointSource) return fundamental_solution_2d(x, source_, Wavenumber(k_));
  Complex u = 0;
  for (const auto& t : terms_) u += t.amplitude * std::exp(I * k_ * x.dot(t.direction));
  return u;
}

Eigen::Vector2cd IncidentField::gradient(const Point& x) const {
  Eigen::Vector2cd g = Eigen::Vector2cd::Zero();
  if (kind_ == Kind::PointSource) {
    const Point R = x - source_;
    const double r = R.norm();
    if (r < 1e-14) fail(ErrorKind::Domain, "gradient evaluated at the point source");
    const Complex c = -0.25 * I * k_ * hankel1(1, k_ * r) / r;
    g << c * R.x(), c * R.y();
    return g;
  }
  for (const auto& t : terms_) {
    const Complex e = t.amplitude * I * k_ * std::exp(I * k_ * x.dot(t.direction));
    g[0] += e * t.direction.x();
    g[1] += e * t.direction.y();
  }
  return g;
}

}  // namespace phaseless
