#pragma once

#include <vector>

#include <Eigen/Dense>

#include "phaseless/specfun.hpp"

namespace phaseless {

/// Plane waves sum_j a_j e^{ik x.d_j}, or a point source Phi(x, z).
class IncidentField {
 public:
  enum class Kind { PlaneWave, Superposition, PointSource };

  struct Term {
    Complex amplitude{1.0, 0.0};
    Point direction{1.0, 0.0};
  };

  static IncidentField plane_wave(const Wavenumber& k, const Point& d);
  static IncidentField superposition(const Wavenumber& k, const Point& d1, const Point& d2);
  /// Arbitrary weighted combination of plane waves.
  static IncidentField combination(const Wavenumber& k, std::vector<Term> terms);
  static IncidentField point_source(const Wavenumber& k, const Point& z);

  Kind kind() const { return kind_; }
  double k() const { return k_; }
  const std::vector<Term>& terms() const { return terms_; }
  const Point& source() const { return source_; }

  Complex value(const Point& x) const;
  Eigen::Vector2cd gradient(const Point& x) const;

 private:
  IncidentField(Kind kind, double k) : kind_(kind), k_(k) {}
  Kind kind_;
  double k_;
  std::vector<Term> terms_;
  Point source_{0.0, 0.0};
};

/// Throws unless |d| = 1 to 1e-14.
void require_unit(const Point& d);

}  // namespace phaseless
