#include <doctest.h>

#include <cmath>

#include "phaseless/specfun.hpp"
#include "support.hpp"

using namespace phaseless;
using test_support::error_kind;

namespace {

// Power series in long double, fine up to x ~ 12.
long double series_j(int n, long double x) {
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= x / (2.0L * i);
  long double sum = term;
  const long double q = -(x * x) / 4.0L;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<long double>(m) * (m + n));
    sum += term;
    if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
  }
  return sum;
}

long double series_y0(long double x) {
  const long double q = -(x * x) / 4.0L;
  long double term = 1.0L, harmonic = 0.0L, sum = 0.0L;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<long double>(m) * m);
    harmonic += 1.0L / m;
    sum -= harmonic * term;
  }
  const long double pi = 3.141592653589793238462643383279502884L;
  return 2.0L / pi * ((std::log(x / 2.0L) + 0.5772156649015328606065120900824L) * series_j(0, x) + sum);
}

}  // namespace

TEST_CASE("bessel_j trivial values") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
  CHECK(bessel_j(7, 0.0) == 0.0);
}

TEST_CASE("bessel_j against the long double series") {
  for (int n = 0; n <= 20; ++n)
    for (double x = 0.05; x <= 12.0; x += 0.37) {
      const double ref = static_cast<double>(series_j(n, x));
      CHECK(std::abs(bessel_j(n, x) - ref) <= 1e-12 * std::max(std::abs(ref), 1e-3));
    }
}

TEST_CASE("bessel_j first zero of J0") {
  // Bisection on the series oracle.
  long double a = 2.3L, b = 2.5L;
  for (int i = 0; i < 200; ++i) {
    const long double c = (a + b) / 2;
    (series_j(0, a) * series_j(0, c) <= 0 ? b : a) = c;
  }
  CHECK(std::abs(static_cast<double>(a) - kBesselJ0FirstZero) < 1e-14);
  CHECK(std::abs(bessel_j(0, kBesselJ0FirstZero)) < 1e-10);
}

TEST_CASE("bessel_j and bessel_y at large argument") {
  // Frozen from a 30-digit reference.
  struct Ref {
    bool j;
    int n;
    double x, v;
  };
  const Ref refs[] = {{true, 5, 50, -0.081400247696569639644},  {true, 0, 100, 0.019985850304223122424},
                      {true, 20, 30, 0.0048310199934040645386}, {true, 1, 90, 0.079925646708868084965},
                      {false, 3, 75, 0.039716719207344581501},  {false, 0, 100, -0.077244313365083152254},
                      {false, 10, 20, -0.043894653515658394899}, {false, 0, 1e-6, -8.8690314816594437317}};
  for (const Ref& r : refs) {
    CAPTURE(r.n);
    CAPTURE(r.x);
    const double v = r.j ? bessel_j(r.n, r.x) : bessel_y(r.n, r.x);
    CHECK(std::abs(v - r.v) <= (r.j ? 1e-12 : 1e-10) * std::abs(r.v));
  }
}

TEST_CASE("bessel_y small argument against the series") {
  CHECK(std::abs(bessel_y(0, 1.0) - 0.08825696421567696) < 1e-15);
  for (double x = 0.1; x < 10.0; x += 0.53) {
    const double ref = static_cast<double>(series_y0(x));
    CHECK(std::abs(bessel_y(0, x) - ref) <= 1e-10 * std::max(std::abs(ref), 1e-2));
  }
}

TEST_CASE("domain errors") {
  CHECK(error_kind([] { bessel_j(0, -1.0); }) == ErrorKind::Domain);
  CHECK(error_kind([] { bessel_y(0, 0.0); }) == ErrorKind::Domain);
  CHECK(error_kind([] { bessel_y(0, -2.0); }) == ErrorKind::Domain);
  CHECK(error_kind([] { hankel1(1, 0.0); }) == ErrorKind::Domain);
  CHECK(error_kind([] { Wavenumber(0.0); }) == ErrorKind::Domain);
  CHECK(error_kind([] { Wavenumber(-3.0); }) == ErrorKind::Domain);
  CHECK(error_kind([] { checked_complex(std::nan(""), 0.0); }) == ErrorKind::Domain);
  CHECK(error_kind([] { checked_complex(0.0, INFINITY); }) == ErrorKind::Domain);
  const Wavenumber k(2.0);
  CHECK(error_kind([&] { fundamental_solution_2d(Point(1, 1), Point(1, 1), k); }) == ErrorKind::Domain);
}

TEST_CASE("hankel1 is J + iY") {
  for (int n = 0; n < 6; ++n)
    for (double x : {0.3, 2.0, 17.5, 80.0}) {
      const Complex h = hankel1(n, x);
      CHECK(h.real() == bessel_j(n, x));
      CHECK(h.imag() == bessel_y(n, x));
    }
  const double x = 200.0;
  CHECK(std::abs(std::abs(hankel1(0, x)) / std::sqrt(2.0 / (kPi * x)) - 1.0) < 1e-2);
}

TEST_CASE("Wronskian and recurrence") {
  double wr = 0.0, rec = 0.0;
  for (int n = 0; n <= 20; ++n)
    for (double x = 0.1; x <= 50.0; x *= 1.13) {
      const double w = bessel_j(n + 1, x) * bessel_y(n, x) - bessel_j(n, x) * bessel_y(n + 1, x);
      wr = std::max(wr, std::abs(w - 2.0 / (kPi * x)) / (2.0 / (kPi * x)));
      if (n >= 1) {
        const Complex hm = hankel1(n - 1, x), h = hankel1(n, x), hp = hankel1(n + 1, x);
        const double scale = std::max({std::abs(hm), std::abs(h), std::abs(hp)});
        rec = std::max(rec, std::abs(hp - (2.0 * n / x) * h + hm) / scale);
      }
    }
  CHECK(wr <= 1e-10);
  CHECK(rec <= 1e-9);
}

TEST_CASE("fundamental solution") {
  const Wavenumber k(3.0);
  const Point x(0.3, -0.2), y(1.1, 0.4);
  CHECK(fundamental_solution_2d(x, y, k) == fundamental_solution_2d(y, x, k));
  const Complex expect = Complex(0.0, 0.25) * hankel1(0, 3.0 * (x - y).norm());
  CHECK(std::abs(fundamental_solution_2d(x, y, k) - expect) == 0.0);

  // Five-point Laplacian at |x - y| = 1, k = 1; truncation is ~ h^2 k^4 / 12.
  const Wavenumber k1(1.0);
  const Point c = y + Point(std::cos(0.7), std::sin(0.7));
  const double h = 1e-3;
  auto phi = [&](double dx, double dy) { return fundamental_solution_2d(c + Point(dx, dy), y, k1); };
  const Complex lap = (phi(h, 0) + phi(-h, 0) + phi(0, h) + phi(0, -h) - 4.0 * phi(0, 0)) / (h * h);
  CHECK(std::abs(lap + phi(0, 0)) < 1e-6 * std::abs(phi(0, 0)));
}

TEST_CASE("far-field constant") {
  const double k = 5.0;
  const Complex g = far_field_constant(k);
  CHECK(std::abs(g - std::polar(1.0 / std::sqrt(8 * kPi * k), kPi / 4)) < 1e-16);
  // Phi(x, 0) e^{-ikr} sqrt(r) -> gamma as r grows.
  const double r = 4e4;
  const Complex far = fundamental_solution_2d(Point(r, 0), Point(0, 0), Wavenumber(k)) *
                      std::exp(Complex(0, -k * r)) * std::sqrt(r);
  CHECK(std::abs(far - g) < 1e-5 * std::abs(g));
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(12, x, w);
  for (int p = 0; p <= 23; ++p) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], p);
    CHECK(std::abs(s - (p % 2 ? 0.0 : 2.0 / (p + 1))) < 1e-14);
  }
}
