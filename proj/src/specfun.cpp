#include "phaseless/specfun.hpp"

#include <cmath>
#include <string>

#include "phaseless/error.hpp"

namespace phaseless {

Wavenumber::Wavenumber(double k) : k_(k) {
  if (!(k > 0.0) || !std::isfinite(k))
    fail(ErrorKind::Domain, "wavenumber must be positive and finite, got " + std::to_string(k));
}

Complex checked_complex(double re, double im) {
  if (!std::isfinite(re) || !std::isfinite(im))
    fail(ErrorKind::Domain, "complex value with non-finite component");
  return {re, im};
}

double bessel_j(int n, double x) {
  if (n < 0) fail(ErrorKind::Domain, "bessel_j: negative order");
  if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorKind::Domain, "bessel_j: argument must be >= 0");
  return std::cyl_bessel_j(static_cast<double>(n), x);
}

double bessel_y(int n, double x) {
  if (n < 0) fail(ErrorKind::Domain, "bessel_y: negative order");
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorKind::Domain, "bessel_y: argument must be > 0");
  return std::cyl_neumann(static_cast<double>(n), x);
}

Complex hankel1(int n, double x) {
  if (!(x > 0.0)) fail(ErrorKind::Domain, "hankel1: argument must be > 0");
  return {bessel_j(n, x), bessel_y(n, x)};
}

Complex far_field_constant(double k) {
  return std::polar(1.0 / std::sqrt(8.0 * kPi * k), kPi / 4.0);
}

Complex fundamental_solution_2d(const Point& x, const Point& y, const Wavenumber& k) {
  const double r = (x - y).norm();
  if (r < 1e-14) fail(ErrorKind::Domain, "fundamental solution evaluated at coincident points");
  return Complex(0.0, 0.25) * hankel1(0, k.value() * r);
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) fail(ErrorKind::Domain, "Gauss-Legendre rule needs n >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
  }
}

}  // namespace phaseless
