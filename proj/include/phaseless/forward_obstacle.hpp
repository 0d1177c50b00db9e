#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "phaseless/farfield.hpp"
#include "phaseless/geometry.hpp"
#include "phaseless/incident.hpp"

namespace phaseless {

namespace detail {
class LayerSystem;
}

/// Layer-potential density on all boundary nodes, components concatenated in
/// scene order (obstacles first, then the reference ball).
struct BoundaryDensity {
  Eigen::VectorXcd values;
  std::vector<int> offsets;
  double k = 1.0;
};

/// Factored Nystrom system for a scene; the factorization is reused for every
/// incident field. Handles obstacle scenes (full-space kernel) and, through
/// RoughSurfaceSolver, the half-plane kernel.
class BoundarySolver {
 public:
  BoundarySolver(std::shared_ptr<const detail::LayerSystem> system);
  ~BoundarySolver();

  BoundaryDensity solve(const IncidentField& incident) const;
  Complex far_field(const BoundaryDensity& density, const Point& xhat) const;
  Eigen::VectorXcd far_field(const BoundaryDensity& density, const DirectionGrid& obs) const;
  /// Scattered field at a point off the boundary.
  Complex scattered(const BoundaryDensity& density, const Point& x) const;
  /// Max boundary-condition residual at `per_component` off-node points per component.
  double boundary_residual(const BoundaryDensity& density, const IncidentField& incident,
                           int per_component = 37) const;
  /// Reciprocal condition number estimate of the factored matrix.
  double rcond() const { return rcond_; }
  int unknowns() const;
  double k() const;
  const detail::LayerSystem& system() const { return *system_; }

 protected:
  std::shared_ptr<const detail::LayerSystem> system_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
  double rcond_ = 0.0;
};

class ObstacleSolver : public BoundarySolver {
 public:
  /// Validates the scene and factors the system with `n` nodes per component.
  ObstacleSolver(const Scene& scene, const Wavenumber& k, int n);

  FarFieldMatrix multistatic(const DirectionGrid& obs, const DirectionGrid& inc) const;
};

BoundaryDensity solve_direct(const Scene& scene, const IncidentField& incident, int n);
FarFieldMatrix multistatic(const Scene& scene, const Wavenumber& k, const DirectionGrid& obs,
                           const DirectionGrid& inc, int n);

/// Sound-soft disk of radius a at the origin, incidence angle `inc_angle`:
/// separation-of-variables far field.
Complex disk_far_field(double k, double a, double obs_angle, double inc_angle, int terms = -1);

/// Translation factor e^{ik(d - xhat).z} of a far field.
Complex translation_factor(double k, const Point& xhat, const Point& d, const Point& z);

}  // namespace phaseless
