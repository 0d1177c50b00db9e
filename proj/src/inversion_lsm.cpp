#include "phaseless/inversion_lsm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

constexpr double kMorozovFloor = 1e-8;

bool is_half_aperture(const FarFieldMatrix& F) {
  auto all_in = [](const DirectionGrid& g, double lo, double hi) {
    return std::all_of(g.angles.begin(), g.angles.end(),
                       [&](double a) { return a > lo && a < hi; });
  };
  return all_in(F.obs, 0.0, kPi) && all_in(F.inc, kPi, 2 * kPi);
}

}  // namespace

Point SamplingGrid::point(int i, int j) const {
  const double x = nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1);
  const double y = ny == 1 ? y0 : y0 + (y1 - y0) * j / (ny - 1);
  return {x, y};
}

void SamplingGrid::validate() const {
  if (nx < 1 || ny < 1) fail(ErrorKind::Config, "sampling grid needs nx, ny >= 1");
  if (!(x1 >= x0) || !(y1 >= y0) || !std::isfinite(x0 + x1 + y0 + y1))
    fail(ErrorKind::Config, "sampling grid bounds must be finite and ordered");
}

Eigen::MatrixXd IndicatorMap::normalized() const {
  const double m = values.maxCoeff();
  return m > 0 ? Eigen::MatrixXd(values / m) : values;
}

Eigen::MatrixXd IndicatorMap::log_normalized() const {
  const Eigen::MatrixXd l = values.array().log();
  const double lo = l.minCoeff(), hi = l.maxCoeff();
  if (!(hi > lo)) return Eigen::MatrixXd::Ones(values.rows(), values.cols());
  return (l.array() - lo) / (hi - lo);
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> IndicatorMap::superlevel(double level) const {
  return log_normalized().array() >= level;
}

double IndicatorMap::sample(const Eigen::MatrixXd& m, const SamplingGrid& g, const Point& p) {
  auto index = [](double t, double a, double b, int n) {
    return n == 1 || b == a ? 0 : static_cast<int>(std::lround((t - a) / (b - a) * (n - 1)));
  };
  const int i = index(p.x(), g.x0, g.x1, g.nx), j = index(p.y(), g.y0, g.y1, g.ny);
  if (i < 0 || i >= g.nx || j < 0 || j >= g.ny) fail(ErrorKind::Domain, "point outside the sampling grid");
  return m(j, i);
}

LsmOperator::LsmOperator(const FarFieldMatrix& F) : k_(F.k) {
  F.validate();
  half_ = is_half_aperture(F);
  const int n = F.inc.size();
  const double w = (half_ ? kPi : 2 * kPi) / n;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(F.values * w, Eigen::ComputeThinU);
  sigma_ = svd.singularValues();
  if (sigma_.size() == 0 || sigma_(0) < 1e-14)
    fail(ErrorKind::Numerical, "degenerate far-field operator: all singular values below 1e-14");
  U_ = svd.matrixU();
  for (int m = 0; m < F.obs.size(); ++m) xhat_.push_back(F.obs.direction(m));
}

Eigen::VectorXcd LsmOperator::test_farfield(const Point& z) const {
  const Complex gamma = far_field_constant(k_);
  const Point zr(z.x(), -z.y());
  Eigen::VectorXcd r(xhat_.size());
  for (size_t m = 0; m < xhat_.size(); ++m) {
    Complex v = gamma * std::exp(Complex(0, -k_ * xhat_[m].dot(z)));
    if (half_) v -= gamma * std::exp(Complex(0, -k_ * xhat_[m].dot(zr)));
    r(m) = v;
  }
  return r;
}

LsmResult LsmOperator::solve(const Point& z, double noise_level) const {
  if (!(noise_level >= 0)) fail(ErrorKind::Domain, "noise level must be nonnegative");
  const Eigen::VectorXcd r = test_farfield(z);
  const Eigen::VectorXcd beta = U_.adjoint() * r;
  const double r2 = r.squaredNorm();
  const double perp2 = (r - U_ * beta).squaredNorm();
  const double delta = std::max(noise_level, kMorozovFloor) * sigma_(0);
  const Eigen::VectorXd b2 = beta.cwiseAbs2();
  const Eigen::VectorXd s2 = sigma_.cwiseAbs2();

  auto residual2 = [&](double a) {
    return perp2 + (b2.array() * (a / (s2.array() + a)).square()).sum();
  };
  auto gnorm2 = [&](double a) {
    return (b2.array() * s2.array() / (s2.array() + a).square()).sum();
  };
  auto morozov = [&](double a) { return residual2(a) - delta * delta * gnorm2(a); };

  double lo = std::log(s2(0) * 1e-32), hi = std::log(s2(0) * 1e4);
  double alpha;
  if (morozov(std::exp(lo)) >= 0) {
    alpha = std::exp(lo);
  } else {
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (morozov(std::exp(mid)) < 0 ? lo : hi) = mid;
    }
    alpha = std::exp(0.5 * (lo + hi));
  }
  LsmResult out;
  out.g_norm = std::sqrt(gnorm2(alpha));
  out.regularization = alpha;
  out.discrepancy = r2 > 0 ? std::sqrt(residual2(alpha) / r2) : 0.0;
  return out;
}

LsmResult lsm_solve(const FarFieldMatrix& F, const Point& z, double noise_level) {
  return LsmOperator(F).solve(z, noise_level);
}

IndicatorMap indicator_map(const FarFieldMatrix& F, const SamplingGrid& grid, double noise_level) {
  grid.validate();
  const LsmOperator op(F);
  IndicatorMap map;
  map.grid = grid;
  map.values.resize(grid.ny, grid.nx);
  map.regularization.resize(grid.ny, grid.nx);
  map.discrepancy.resize(grid.ny, grid.nx);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const LsmResult r = op.solve(grid.point(i, j), noise_level);
      map.values(j, i) = r.g_norm > 0 ? 1.0 / r.g_norm : 0.0;
      map.regularization(j, i) = r.regularization;
      map.discrepancy(j, i) = r.discrepancy;
    }
  return map;
}

double probe_ratio(const LsmOperator& op, const Point& b, double noise_level) {
  if (b.norm() < 1e-12) fail(ErrorKind::Domain, "probe point coincides with its reflection");
  const double at = op.solve(b, noise_level).g_norm;
  const double mirror = op.solve(-b, noise_level).g_norm;
  return mirror / at;
}

double probe_ratio(const FarFieldMatrix& F, const Point& b, double noise_level) {
  return probe_ratio(LsmOperator(F), b, noise_level);
}

void write_indicator_csv(const std::string& path, const IndicatorMap& map, const Header& extra) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write " + path);
  const SamplingGrid& g = map.grid;
  out << "# x0=" << format_double(g.x0) << "\n# x1=" << format_double(g.x1)
      << "\n# y0=" << format_double(g.y0) << "\n# y1=" << format_double(g.y1)
      << "\n# nx=" << g.nx << "\n# ny=" << g.ny << '\n';
  for (const auto& [key, value] : extra) out << "# " << key << '=' << value << '\n';
  out << "i,j,x,y,value,regularization,discrepancy\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const Point p = g.point(i, j);
      out << i << ',' << j << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
          << format_double(map.values(j, i)) << ',' << format_double(map.regularization(j, i))
          << ',' << format_double(map.discrepancy(j, i)) << '\n';
    }
  if (!out) fail(ErrorKind::Data, "write failed for " + path);
}

void write_indicator_svg(const std::string& path, const IndicatorMap& map, int cell_px,
                         const Header& extra) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write " + path);
  const int nx = map.grid.nx, ny = map.grid.ny;
  const Eigen::MatrixXd v = map.values;
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << nx * cell_px << "\" height=\""
      << ny * cell_px << "\" shape-rendering=\"crispEdges\">\n";
  for (const auto& [key, value] : extra) out << "<!-- " << key << '=' << value << " -->\n";
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double t = hi > lo ? (v(j, i) - lo) / (hi - lo) : 0.0;
      const int g = static_cast<int>(std::lround(255 * t));
      out << "<rect x=\"" << i * cell_px << "\" y=\"" << (ny - 1 - j) * cell_px << "\" width=\""
          << cell_px << "\" height=\"" << cell_px << "\" fill=\"rgb(" << g << ',' << g << ','
          << g << ")\"/>\n";
    }
  out << "</svg>\n";
  if (!out) fail(ErrorKind::Data, "write failed for " + path);
}

}  // namespace phaseless
