#pragma once

#include <functional>

#include "phaseless/forward_obstacle.hpp"

namespace phaseless {

/// Reflected wave of a Dirichlet plane x2 = 0: u_r(x) = -e^{ik x.d'}, d' = (d1, -d2).
std::function<Complex(const Point&)> reflected_wave(const Wavenumber& k, const Point& d);

/// Incident plus reflected wave as one incident field.
IncidentField mirrored_incidence(const Wavenumber& k, const Point& d);

/// G(x, y) = Phi(x, y) - Phi(x, y'), y' the vertical flip of y.
Complex half_plane_green(const Point& x, const Point& y, const Wavenumber& k);

/// Sound-soft locally rough surface x2 = h(x1) plus optional sound-soft ball.
/// Unknowns live on the compact curve Gamma_c = perturbed part plus a flat
/// margin of `margin_wavelengths` wavelengths per side, and on the ball.
class RoughSurfaceSolver : public BoundarySolver {
 public:
  RoughSurfaceSolver(const Scene& scene, const Wavenumber& k, int n_surface, int n_ball = 128,
                     double margin_wavelengths = 1.0);

  /// Density for the downward incident direction d.
  BoundaryDensity solve_rough(const Point& d) const;
  /// Far field at an upward direction.
  Complex far_field_rough(const BoundaryDensity& density, const Point& xhat) const;
  /// obs must be upward, inc downward.
  FarFieldMatrix multistatic(const DirectionGrid& obs, const DirectionGrid& inc) const;
  /// Endpoints of Gamma_c along x1.
  std::pair<double, double> truncation() const { return truncation_; }

 private:
  std::pair<double, double> truncation_;
};

}  // namespace phaseless
