#include "phaseless/nystrom.hpp"

#include <algorithm>
#include <cmath>

#include "phaseless/error.hpp"

namespace phaseless::detail {

namespace {

constexpr Complex I{0.0, 1.0};

struct TargetData {
  Point x, nu;
  bool impedance = false;
  Complex lambda{0.0, 0.0};
};

struct SourceData {
  Point y, nu;
  double speed = 1.0;
  bool impedance = false;
};

/// Boundary-operator kernel (times source speed) for a source density.
Complex kernel(const TargetData& tg, const SourceData& src, double k, double coupling) {
  const Point R = tg.x - src.y;
  const double r = R.norm();
  const Complex h0 = hankel1(0, k * r);
  const Complex h1 = hankel1(1, k * r);
  const double nyR = src.nu.dot(R);
  const Complex S = 0.25 * I * h0;
  if (!tg.impedance) {
    if (src.impedance) return S * src.speed;
    const Complex D = 0.25 * I * k * h1 * nyR / r;
    return (D - I * coupling * S) * src.speed;
  }
  const double nxR = tg.nu.dot(R);
  const Complex Dp = -0.25 * I * k * h1 * nxR / r;
  if (src.impedance) return (Dp + tg.lambda * S) * src.speed;
  const Complex D = 0.25 * I * k * h1 * nyR / r;
  const Complex T = 0.25 * I * k *
                    ((k * h0 - 2.0 * h1 / r) * nxR * nyR / (r * r) + h1 * tg.nu.dot(src.nu) / r);
  return (T - I * coupling * Dp + tg.lambda * (D - I * coupling * S)) * src.speed;
}

/// Coefficient of ln(4 sin^2((t-s)/2)) in the self kernel (same panel kind).
Complex log_part(const TargetData& tg, const SourceData& src, double k, double coupling) {
  const Point R = tg.x - src.y;
  const double r = R.norm();
  const double j0 = bessel_j(0, k * r);
  const double j1 = bessel_j(1, k * r);
  const double S1 = -j0 / (4 * kPi);
  if (!tg.impedance) {
    const double D1 = -k / (4 * kPi) * j1 * src.nu.dot(R) / r;
    return (D1 - I * coupling * S1) * src.speed;
  }
  const double Dp1 = k / (4 * kPi) * j1 * tg.nu.dot(R) / r;
  return (Dp1 + tg.lambda * S1) * src.speed;
}

/// Diagonal limits (log part, remainder) of the self kernel.
std::pair<Complex, Complex> diagonal_part(const TargetData& tg, const Point& d1, const Point& d2,
                                          double k, double coupling) {
  const double s = d1.norm();
  const double S1 = -s / (4 * kPi);
  const Complex S2 = s * (0.25 * I - (kEulerGamma + std::log(k * s / 2)) / (2 * kPi));
  const double Dd = -(d1.x() * d2.y() - d1.y() * d2.x()) / (4 * kPi * s * s);
  if (!tg.impedance) return {-I * coupling * S1, Dd - I * coupling * S2};
  return {tg.lambda * S1, Dd + tg.lambda * S2};
}

SourceData mirrored(SourceData s) {
  s.y = Point(s.y.x(), -s.y.y());
  s.nu = Point(s.nu.x(), -s.nu.y());
  return s;
}

SourceData source_at(const Panel& p, int j) {
  return {p.x[j], p.normal[j], p.speed[j], p.condition == BoundaryKind::Impedance};
}

Point unit_normal(const Point& d1) { return Point(d1.y(), -d1.x()) / d1.norm(); }

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
const std::array<double, 8> kGLx = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                    0.9445750230732326, 0.9894009349916499};
const std::array<double, 8> kGLw = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                    0.0622535239386479, 0.0271524594117541};

}  // namespace

double Panel::spacing() const {
  double m = 0;
  for (int j = 0; j < n; ++j) m = std::max(m, (x[(j + 1) % n] - x[j]).norm());
  return m;
}

Panel make_panel(CurveEval eval, int n, BoundaryKind condition, Impedance impedance) {
  if (n < 16 || n % 2) fail(ErrorKind::Domain, "panel needs an even node count >= 16");
  Panel p;
  p.eval = std::move(eval);
  p.n = n;
  p.condition = condition;
  p.impedance = impedance;
  p.t.resize(n);
  p.x.resize(n);
  p.d1.resize(n);
  p.d2.resize(n);
  p.normal.resize(n);
  p.speed.resize(n);
  p.eta.resize(n);
  for (int j = 0; j < n; ++j) {
    p.t[j] = 2 * kPi * j / n;
    p.eval(p.t[j], p.x[j], p.d1[j], p.d2[j]);
    p.speed[j] = p.d1[j].norm();
    p.normal[j] = unit_normal(p.d1[j]);
    p.eta[j] = impedance.at(p.t[j]);
  }
  return p;
}

Panel make_panel(const BoundaryCurve& curve, int n, BoundaryKind condition, Impedance impedance) {
  return make_panel(
      [curve](double t, Point& x, Point& d1, Point& d2) {
        x = curve.point(t);
        d1 = curve.d1(t);
        d2 = curve.d2(t);
      },
      n, condition, std::move(impedance));
}

std::vector<double> log_weights(int n, double t) {
  const int h = n / 2;
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) {
    const double d = t - kPi * j / h;
    double s = 0;
    for (int m = 1; m < h; ++m) s += std::cos(m * d) / m;
    w[j] = -2 * kPi / h * s - kPi / (static_cast<double>(h) * h) * std::cos(h * d);
  }
  return w;
}

Eigen::VectorXd cardinal(int n, double t) {
  Eigen::VectorXd L(n);
  const double a = std::cos(t / 2), b = std::sin(t / 2);
  const double sn = std::sin(n * t / 2);
  for (int j = 0; j < n; ++j) {
    const double tj = 2 * kPi * j / n;
    const double cj = std::cos(tj / 2), sj = std::sin(tj / 2);
    const double sh = b * cj - a * sj;  // sin((t - tj)/2)
    const double ch = a * cj + b * sj;  // cos((t - tj)/2)
    if (std::abs(sh) < 1e-13) {
      L[j] = 1.0;
    } else {
      const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
      L[j] = sgn * sn * ch / sh / n;
    }
  }
  return L;
}

LayerSystem::LayerSystem(std::vector<Panel> panels, double k, bool half_plane)
    : panels_(std::move(panels)), k_(k), coupling_(k), half_plane_(half_plane) {
  for (const auto& p : panels_) {
    offsets_.push_back(total_);
    total_ += p.n;
    node_log_weights_.push_back(log_weights(p.n, 0.0));
    if (half_plane_ && p.condition != BoundaryKind::Dirichlet)
      fail(ErrorKind::Domain, "half-plane kernel supports Dirichlet components only");
  }
}

bool LayerSystem::needs_image_correction(const Point& x, int b) const {
  const Panel& p = panels_[b];
  const double limit = 8.0 * p.spacing();
  for (int j = 0; j < p.n; ++j)
    if ((x - Point(p.x[j].x(), -p.x[j].y())).norm() < limit) return true;
  return false;
}

Eigen::VectorXcd LayerSystem::corrected_image_weights(const Point& x, const Point& nx,
                                                      int target_kind_imp, Complex lambda,
                                                      int b) const {
  const Panel& p = panels_[b];
  const int n = p.n;
  const double dt = 2 * kPi / n;
  TargetData tg{x, nx, target_kind_imp != 0, lambda};

  auto image_point = [&](double tau) {
    Point y, d1, d2;
    p.eval(tau, y, d1, d2);
    return Point(y.x(), -y.y());
  };
  // Closest parameter of the mirrored curve.
  int jbest = 0;
  double dbest = 1e300;
  for (int j = 0; j < n; ++j) {
    const double d = (x - Point(p.x[j].x(), -p.x[j].y())).norm();
    if (d < dbest) dbest = d, jbest = j;
  }
  double lo = p.t[jbest] - dt, hi = p.t[jbest] + dt;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if ((x - image_point(m1)).norm() < (x - image_point(m2)).norm()) hi = m2;
    else lo = m1;
  }
  const double center = 0.5 * (lo + hi);
  const double dist = (x - image_point(center)).norm();

  const double a = 12 * dt, sigma = 3 * dt, half = a + 6 * sigma;
  auto chi = [&](double tau) {
    double d = std::remainder(tau - center, 2 * kPi);
    return 0.5 * std::erfc((std::abs(d) - a) / sigma);
  };

  auto kimg = [&](double tau) {
    Point y, d1, d2;
    p.eval(tau, y, d1, d2);
    SourceData s{y, unit_normal(d1), d1.norm(), false};
    return kernel(tg, mirrored(s), k_, coupling_);
  };

  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double c = 1.0 - chi(p.t[j]);
    if (c > 0) w[j] += c * kernel(tg, mirrored(source_at(p, j)), k_, coupling_) * dt;
  }

  // Geometrically graded Gauss panels toward the near-singular point.
  const double speed = std::max(p.speed[jbest], 1e-300);
  double h0 = std::max(0.5 * dist / speed, 1e-15);
  std::vector<double> breaks{0.0};
  for (double e = h0; e < dt; e *= 2) breaks.push_back(e);
  for (double e = std::max(breaks.back(), 0.0) + dt / 2; e < half; e += dt / 2) breaks.push_back(e);
  breaks.push_back(half);
  for (int side = -1; side <= 1; side += 2) {
    for (size_t q = 0; q + 1 < breaks.size(); ++q) {
      const double l = center + side * breaks[q], r = center + side * breaks[q + 1];
      const double mid = 0.5 * (l + r), rad = 0.5 * std::abs(r - l);
      for (int m = 0; m < 16; ++m) {
        const double xi = (m < 8) ? -kGLx[7 - m] : kGLx[m - 8];
        const double wi = (m < 8) ? kGLw[7 - m] : kGLw[m - 8];
        const double tau = mid + rad * xi;
        const double c = chi(tau);
        if (c < 1e-18) continue;
        const Complex v = c * kimg(tau) * wi * rad;
        const double tw = std::fmod(std::fmod(tau, 2 * kPi) + 2 * kPi, 2 * kPi);
        w += v * cardinal(n, tw).cast<Complex>();
      }
    }
  }
  return w;
}

Eigen::RowVectorXcd LayerSystem::integral_row(int a, double t, int node) const {
  const Panel& pa = panels_[a];
  TargetData tg;
  Point d1, d2;
  if (node >= 0) {
    tg.x = pa.x[node];
    d1 = pa.d1[node];
    d2 = pa.d2[node];
    tg.lambda = pa.eta[node];
  } else {
    pa.eval(t, tg.x, d1, d2);
    tg.lambda = pa.impedance.at(t);
  }
  tg.nu = unit_normal(d1);
  tg.impedance = pa.condition == BoundaryKind::Impedance;

  Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(total_);

  for (size_t b = 0; b < panels_.size(); ++b) {
    const Panel& pb = panels_[b];
    const int off = offsets_[b];
    const double dt = 2 * kPi / pb.n;
    if (static_cast<int>(b) == a) {
      std::vector<double> R;
      if (node < 0) R = log_weights(pb.n, t);
      for (int j = 0; j < pb.n; ++j) {
        const double Rj = node >= 0 ? node_log_weights_[b][(j - node + pb.n) % pb.n] : R[j];
        if (node == j) {
          const auto [k1, k2] = diagonal_part(tg, d1, d2, k_, coupling_);
          row[off + j] += k1 * Rj + k2 * dt;
          continue;
        }
        const SourceData src = source_at(pb, j);
        const Complex K = kernel(tg, src, k_, coupling_);
        const Complex K1 = log_part(tg, src, k_, coupling_);
        const double s = std::sin((t - pb.t[j]) / 2);
        const double L = std::log(4 * s * s);
        row[off + j] += K1 * Rj + (K - K1 * L) * dt;
      }
    } else {
      for (int j = 0; j < pb.n; ++j)
        row[off + j] += kernel(tg, source_at(pb, j), k_, coupling_) * dt;
    }
    if (half_plane_) {
      if (needs_image_correction(tg.x, static_cast<int>(b))) {
        row.segment(off, pb.n) -=
            corrected_image_weights(tg.x, tg.nu, tg.impedance, tg.lambda, static_cast<int>(b))
                .transpose();
      } else {
        for (int j = 0; j < pb.n; ++j)
          row[off + j] -= kernel(tg, mirrored(source_at(pb, j)), k_, coupling_) * dt;
      }
    }
  }
  return row;
}

Eigen::RowVectorXcd LayerSystem::trace_row(int a, double t, int node) const {
  const Panel& pa = panels_[a];
  const int off = offsets_[a];
  Point x, d1, d2;
  if (node >= 0) x = pa.x[node];
  else pa.eval(t, x, d1, d2);

  // On the flat line the half-plane kernel vanishes identically and the
  // direct and image jumps add up.
  if (half_plane_ && std::abs(x.y()) <= 1e-13) {
    Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(total_);
    if (node >= 0) row[off + node] = 1.0;
    else row.segment(off, pa.n) = cardinal(pa.n, t).transpose().cast<Complex>();
    return row;
  }
  Eigen::RowVectorXcd row = integral_row(a, t, node);
  const double jump = pa.condition == BoundaryKind::Dirichlet ? 0.5 : -0.5;
  if (node >= 0) row[off + node] += jump;
  else row.segment(off, pa.n) += jump * cardinal(pa.n, t).transpose().cast<Complex>();
  return row;
}

Eigen::MatrixXcd LayerSystem::matrix() const {
  Eigen::MatrixXcd A(total_, total_);
  for (size_t a = 0; a < panels_.size(); ++a) {
    const double scale = panels_[a].condition == BoundaryKind::Dirichlet ? 2.0 : -2.0;
    for (int i = 0; i < panels_[a].n; ++i)
      A.row(offsets_[a] + i) = scale * trace_row(static_cast<int>(a), panels_[a].t[i], i);
  }
  return A;
}

Eigen::VectorXcd LayerSystem::rhs(const std::function<Complex(const Point&)>& value,
                                  const std::function<Eigen::Vector2cd(const Point&)>& grad) const {
  Eigen::VectorXcd b(total_);
  for (size_t a = 0; a < panels_.size(); ++a) {
    const Panel& p = panels_[a];
    for (int i = 0; i < p.n; ++i) {
      const Complex u = value(p.x[i]);
      if (p.condition == BoundaryKind::Dirichlet) {
        b[offsets_[a] + i] = -2.0 * u;
      } else {
        const Eigen::Vector2cd g = grad(p.x[i]);
        const Complex dn = g[0] * p.normal[i].x() + g[1] * p.normal[i].y();
        b[offsets_[a] + i] = 2.0 * (dn + p.eta[i] * u);
      }
    }
  }
  return b;
}

Complex LayerSystem::field(const Eigen::VectorXcd& phi, const Point& x) const {
  TargetData tg{x, Point(1, 0), false, 0.0};
  Complex u = 0;
  for (size_t b = 0; b < panels_.size(); ++b) {
    const Panel& p = panels_[b];
    const double dt = 2 * kPi / p.n;
    for (int j = 0; j < p.n; ++j) {
      Complex K = kernel(tg, source_at(p, j), k_, coupling_);
      if (half_plane_) K -= kernel(tg, mirrored(source_at(p, j)), k_, coupling_);
      u += K * dt * phi[offsets_[b] + j];
    }
  }
  return u;
}

Eigen::RowVectorXcd LayerSystem::far_field_row(const Point& xhat) const {
  const Complex gamma = far_field_constant(k_);
  Eigen::RowVectorXcd row(total_);
  for (size_t b = 0; b < panels_.size(); ++b) {
    const Panel& p = panels_[b];
    const double dt = 2 * kPi / p.n;
    for (int j = 0; j < p.n; ++j) {
      auto term = [&](const Point& y, const Point& nu) {
        const Complex e = std::exp(-I * k_ * xhat.dot(y));
        if (p.condition == BoundaryKind::Impedance) return e;
        return (-I * k_ * xhat.dot(nu) - I * coupling_) * e;
      };
      Complex v = term(p.x[j], p.normal[j]);
      if (half_plane_)
        v -= term(Point(p.x[j].x(), -p.x[j].y()), Point(p.normal[j].x(), -p.normal[j].y()));
      row[offsets_[b] + j] = gamma * v * p.speed[j] * dt;
    }
  }
  return row;
}

Complex LayerSystem::far_field(const Eigen::VectorXcd& phi, const Point& xhat) const {
  return far_field_row(xhat) * phi;
}

}  // namespace phaseless::detail
