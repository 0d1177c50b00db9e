#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace phaseless {

using Complex = std::complex<double>;
using Point = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;
/// First positive zero of J_0.
inline constexpr double kBesselJ0FirstZero = 2.404825557695773;
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Positive wavenumber k = omega / c.
class Wavenumber {
 public:
  explicit Wavenumber(double k);
  double value() const noexcept { return k_; }
  operator double() const noexcept { return k_; }

 private:
  double k_;
};

/// Rejects NaN/inf components.
Complex checked_complex(double re, double im);

double bessel_j(int n, double x);
double bessel_y(int n, double x);
Complex hankel1(int n, double x);

/// 2D far-field normalization e^{i pi/4} / sqrt(8 pi k): a radiating field
/// behaves like e^{ikr}/sqrt(r) * u_inf.
Complex far_field_constant(double k);

/// Phi(x, y) = (i/4) H_0^(1)(k |x - y|).
Complex fundamental_solution_2d(const Point& x, const Point& y, const Wavenumber& k);

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace phaseless
