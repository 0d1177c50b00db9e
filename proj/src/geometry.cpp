#include "phaseless/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

constexpr int kPolygonSamples = 1024;

Point rotate(const Point& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

bool polygon_contains(const std::vector<Point>& poly, const Point& x) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

bool polygons_intersect(const std::vector<Point>& a, const std::vector<Point>& b) {
  const size_t na = a.size(), nb = b.size();
  for (size_t i = 0; i < na; ++i)
    for (size_t j = 0; j < nb; ++j)
      if (segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb])) return true;
  return polygon_contains(a, b.front()) || polygon_contains(b, a.front());
}

}  // namespace

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::Circle: return "circle";
    case CurveKind::Kite: return "kite";
    case CurveKind::TrigPolynomial: return "trig_polynomial";
  }
  return "?";
}

CurveKind curve_kind_from_string(const std::string& s) {
  if (s == "circle") return CurveKind::Circle;
  if (s == "kite") return CurveKind::Kite;
  if (s == "trig_polynomial") return CurveKind::TrigPolynomial;
  fail(ErrorKind::Config, "unknown curve kind '" + s + "'");
}

std::string to_string(SceneVariant v) {
  switch (v) {
    case SceneVariant::Obstacle: return "obstacle";
    case SceneVariant::Medium: return "medium";
    case SceneVariant::RoughSurface: return "rough_surface";
  }
  return "?";
}

Point BoundaryCurve::base_point(double t, int order) const {
  const CurveParams& p = params_;
  const double c = std::cos(t), s = std::sin(t);
  switch (kind_) {
    case CurveKind::Circle: {
      const double r = p.radius;
      if (order == 0) return {r * c, r * s};
      if (order == 1) return {-r * s, r * c};
      return {-r * c, -r * s};
    }
    case CurveKind::Kite: {
      const double a = p.scale;
      const double c2 = std::cos(2 * t), s2 = std::sin(2 * t);
      if (order == 0) return {a * (c + 0.65 * c2 - 0.65), a * 1.5 * s};
      if (order == 1) return {a * (-s - 1.3 * s2), a * 1.5 * c};
      return {a * (-c - 2.6 * c2), -a * 1.5 * s};
    }
    case CurveKind::TrigPolynomial: {
      double r = 0, r1 = 0, r2 = 0;
      for (size_t j = 0; j < p.cos_coeffs.size(); ++j) {
        const double m = static_cast<double>(j);
        const double cj = std::cos(m * t), sj = std::sin(m * t);
        r += p.cos_coeffs[j] * cj;
        r1 -= p.cos_coeffs[j] * m * sj;
        r2 -= p.cos_coeffs[j] * m * m * cj;
      }
      for (size_t j = 0; j < p.sin_coeffs.size(); ++j) {
        const double m = static_cast<double>(j + 1);
        const double cj = std::cos(m * t), sj = std::sin(m * t);
        r += p.sin_coeffs[j] * sj;
        r1 += p.sin_coeffs[j] * m * cj;
        r2 -= p.sin_coeffs[j] * m * m * sj;
      }
      const Point e{c, s}, et{-s, c};
      if (order == 0) return r * e;
      if (order == 1) return r1 * e + r * et;
      return r2 * e + 2.0 * r1 * et - r * e;
    }
  }
  return {0, 0};
}

// q(t) (1 + eps beta(t)) with beta(t) = exp(kappa (cos(t - t0) - 1)).
Point BoundaryCurve::local_point(double t, int order) const {
  const CurveParams& p = params_;
  if (p.bump_amplitude == 0.0) return base_point(t, order);
  const double u = t - p.bump_at, kap = p.bump_concentration;
  const double su = std::sin(u), cu = std::cos(u);
  const double b = p.bump_amplitude * std::exp(kap * (cu - 1));
  const double b1 = -kap * su * b;
  const double b2 = (kap * kap * su * su - kap * cu) * b;
  const Point q = base_point(t, 0);
  if (order == 0) return q * (1 + b);
  const Point q1 = base_point(t, 1);
  if (order == 1) return q1 * (1 + b) + q * b1;
  return base_point(t, 2) * (1 + b) + 2.0 * q1 * b1 + q * b2;
}

Point BoundaryCurve::point(double t) const {
  return params_.center + rotate(local_point(t, 0), params_.rotation);
}
Point BoundaryCurve::d1(double t) const { return rotate(local_point(t, 1), params_.rotation); }
Point BoundaryCurve::d2(double t) const { return rotate(local_point(t, 2), params_.rotation); }

std::vector<Point> BoundaryCurve::sample(int n) const {
  std::vector<Point> out(n);
  for (int j = 0; j < n; ++j) out[j] = point(2 * kPi * j / n);
  return out;
}

double BoundaryCurve::length(int n) const {
  double sum = 0;
  for (int j = 0; j < n; ++j) sum += d1(2 * kPi * j / n).norm();
  return sum * 2 * kPi / n;
}

double BoundaryCurve::area(int n) const {
  double sum = 0;
  for (int j = 0; j < n; ++j) {
    const double t = 2 * kPi * j / n;
    sum += cross(point(t), d1(t));
  }
  return 0.5 * sum * 2 * kPi / n;
}

Point BoundaryCurve::centroid(int n) const {
  // Green: A c_x = (1/2) int x^2 dy, A c_y = -(1/2) int y^2 dx.
  double cx = 0, cy = 0;
  for (int j = 0; j < n; ++j) {
    const double t = 2 * kPi * j / n;
    const Point x = point(t), dx = d1(t);
    cx += 0.5 * x.x() * x.x() * dx.y();
    cy -= 0.5 * x.y() * x.y() * dx.x();
  }
  const double a = area(n);
  return {cx * 2 * kPi / n / a, cy * 2 * kPi / n / a};
}

double BoundaryCurve::max_radius_about(const Point& c, int n) const {
  double m = 0;
  for (int j = 0; j < n; ++j) m = std::max(m, (point(2 * kPi * j / n) - c).norm());
  return m;
}

bool BoundaryCurve::contains(const Point& x) const { return polygon_contains(polygon_, x); }

BoundaryCurve BoundaryCurve::make(CurveKind kind, CurveParams params) {
  if (kind == CurveKind::Circle && !(params.radius > 0))
    fail(ErrorKind::Geometry, "circle radius must be positive");
  if (kind == CurveKind::Kite && !(params.scale > 0))
    fail(ErrorKind::Geometry, "kite scale must be positive");
  if (kind == CurveKind::TrigPolynomial && params.cos_coeffs.empty())
    fail(ErrorKind::Geometry, "trig_polynomial needs at least the constant coefficient");
  if (!(params.bump_amplitude > -1) || !(params.bump_concentration > 0))
    fail(ErrorKind::Geometry, "bump needs amplitude > -1 and concentration > 0");

  BoundaryCurve curve(kind, std::move(params));
  const int n = kPolygonSamples;
  curve.polygon_ = curve.sample(n);
  const auto& poly = curve.polygon_;

  double diameter = 0;
  for (int i = 0; i < n; i += 8)
    for (int j = i + 1; j < n; j += 8) diameter = std::max(diameter, (poly[i] - poly[j]).norm());
  if (!(diameter > 0)) fail(ErrorKind::Geometry, "degenerate curve");

  for (int j = 0; j < n; ++j)
    if (curve.d1(2 * kPi * j / n).norm() <= 1e-10 * diameter)
      fail(ErrorKind::Geometry, "curve parametrization is not regular");

  // Non-adjacent samples must stay apart; sample polygon must be simple.
  const double min_sep = 1e-6 * diameter;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if ((poly[i] - poly[j]).norm() <= min_sep)
        fail(ErrorKind::Geometry, "curve nearly touches itself");
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]))
        fail(ErrorKind::Geometry, "curve is self-intersecting");
    }
  }
  if (curve.area() <= 0) fail(ErrorKind::Geometry, "curve must be counterclockwise");
  return curve;
}

BoundaryCurve BoundaryCurve::circle(Point center, double radius) {
  CurveParams p;
  p.center = center;
  p.radius = radius;
  return make(CurveKind::Circle, p);
}

BoundaryCurve BoundaryCurve::kite(Point center, double scale) {
  CurveParams p;
  p.center = center;
  p.scale = scale;
  return make(CurveKind::Kite, p);
}

QuadratureRule quadrature(const BoundaryCurve& curve, int n) {
  if (n < 16 || n % 2 != 0) fail(ErrorKind::Domain, "quadrature needs an even node count >= 16");
  QuadratureRule q;
  q.params.resize(n);
  q.nodes.resize(n);
  q.d1.resize(n);
  q.d2.resize(n);
  q.speed.resize(n);
  q.weights.resize(n);
  q.normals.resize(n);
  for (int j = 0; j < n; ++j) {
    const double t = 2 * kPi * j / n;
    q.params[j] = t;
    q.nodes[j] = curve.point(t);
    q.d1[j] = curve.d1(t);
    q.d2[j] = curve.d2(t);
    q.speed[j] = q.d1[j].norm();
    q.weights[j] = q.speed[j] * 2 * kPi / n;
    q.normals[j] = Point(q.d1[j].y(), -q.d1[j].x()) / q.speed[j];
  }
  return q;
}

Complex Impedance::at(double t) const {
  Complex v = constant;
  for (size_t j = 0; j < cos_coeffs.size(); ++j) v += cos_coeffs[j] * std::cos((j + 1.0) * t);
  for (size_t j = 0; j < sin_coeffs.size(); ++j) v += sin_coeffs[j] * std::sin((j + 1.0) * t);
  return v;
}

Complex MediumRaster::at(const Point& x) const {
  const double fi = (x.x() - x0) / h, fj = (x.y() - y0) / h;
  if (fi < 0 || fj < 0) return {1.0, 0.0};
  const int i = static_cast<int>(fi), j = static_cast<int>(fj);
  if (i >= nx || j >= ny) return {1.0, 0.0};
  return index[static_cast<size_t>(j) * nx + i];
}

namespace {

double bump_value(const Bump& b, double x, int order) {
  const double w = b.half_width;
  const double u = (x - b.center) / w;
  if (std::abs(u) >= 1.0) return 0.0;
  if (b.kind == ProfileKind::PolyBump) {
    const double q = 1 - u * u;
    if (order == 0) return b.amplitude * q * q * q;
    if (order == 1) return b.amplitude * 3 * q * q * (-2 * u) / w;
    return b.amplitude * (24 * u * u * q - 6 * q * q) / (w * w);
  }
  // g(u) = exp(1/(u^2-1)); g' = g * (-2u/(u^2-1)^2);
  // g'' = g * [4u^2/(u^2-1)^4 + (6u^2+2)/(u^2-1)^3]
  const double s = u * u - 1.0;
  const double g = std::exp(1.0 / s);
  if (order == 0) return b.amplitude * g;
  if (order == 1) return b.amplitude * g * (-2 * u / (s * s)) / w;
  return b.amplitude * g * (4 * u * u / (s * s * s * s) + (6 * u * u + 2) / (s * s * s)) / (w * w);
}

}  // namespace

double SurfaceProfile::height(double x) const {
  double v = 0;
  for (const auto& b : bumps) v += bump_value(b, x, 0);
  return v;
}
double SurfaceProfile::slope(double x) const {
  double v = 0;
  for (const auto& b : bumps) v += bump_value(b, x, 1);
  return v;
}
double SurfaceProfile::curvature_term(double x) const {
  double v = 0;
  for (const auto& b : bumps) v += bump_value(b, x, 2);
  return v;
}

std::pair<double, double> SurfaceProfile::support() const {
  if (flat()) return {0.0, 0.0};
  double lo = 1e300, hi = -1e300;
  for (const auto& b : bumps) {
    if (b.amplitude == 0.0) continue;
    lo = std::min(lo, b.center - b.half_width);
    hi = std::max(hi, b.center + b.half_width);
  }
  return {lo, hi};
}

bool SurfaceProfile::flat() const {
  return std::all_of(bumps.begin(), bumps.end(), [](const Bump& b) { return b.amplitude == 0.0; });
}

Complex Scene::index_at(const Point& x) const {
  if (ball && (x - ball->center).norm() < ball->radius) return {ball_index, 0.0};
  Complex n{1.0, 0.0};
  for (const auto& inc : inclusions)
    if (inc.region.contains(x)) n = inc.index;
  if (raster) {
    const Complex r = raster->at(x);
    if (r != Complex(1.0, 0.0)) n = r;
  }
  return n;
}

double transmission_radius_bound(double k, double n0) {
  return kPi / (2.0 * k * (std::sqrt(n0) + 1.0));
}

bool ValidationReport::passes_hard_checks() const {
  return std::none_of(violations.begin(), violations.end(),
                      [](const Violation& v) { return v.severity == Severity::Error; });
}

bool ValidationReport::has(const std::string& code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.code == code; });
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "admissible";
  std::ostringstream os;
  for (const auto& v : violations)
    os << (v.severity == Severity::Error ? "error " : "warning ") << v.code << ": " << v.message
       << "\n";
  return os.str();
}

ValidationReport validate_scene(const Scene& scene, const Wavenumber& k) {
  ValidationReport rep;
  auto add = [&](std::string code, std::string msg, Severity sev = Severity::Error) {
    rep.violations.push_back({std::move(code), std::move(msg), sev});
  };
  const double R = scene.enclosing_radius;
  if (!(R > 0)) add("enclosing_radius", "enclosing radius R must be positive");

  if (!scene.ball) {
    add("missing_ball", "scene has no reference ball", Severity::Warning);
  } else {
    const auto& b = *scene.ball;
    if (!(b.radius > 0)) add("ball_radius", "reference ball radius must be positive");
    if (b.center.norm() - b.radius <= R)
      add("ball_overlaps_enclosing_disk", "closure of the ball meets the closed disk B_R");
    if (scene.variant == SceneVariant::Medium) {
      const double n0 = scene.ball_index;
      if (!(n0 > 0) || n0 == 1.0) add("ball_index", "ball index n0 must be positive and != 1");
      else if (b.radius >= transmission_radius_bound(k, n0))
        add("transmission_radius",
            "ball radius >= pi/(2k(sqrt(n0)+1)); k^2 may be a transmission eigenvalue",
            Severity::Warning);
    } else if (k * b.radius >= kBesselJ0FirstZero) {
      add("eigenvalue_risk", "k*rho >= j_{0,1}; k^2 may be a Dirichlet eigenvalue of the ball",
          Severity::Warning);
    }
  }

  switch (scene.variant) {
    case SceneVariant::Obstacle: {
      std::vector<std::vector<Point>> polys;
      for (size_t i = 0; i < scene.obstacles.size(); ++i) {
        const auto& c = scene.obstacles[i];
        polys.push_back(c.curve.sample(256));
        if (c.curve.max_radius_about({0, 0}, 1024) >= R)
          add("component_outside_enclosing_disk",
              "obstacle component " + std::to_string(i) + " is not inside B_R");
        if (c.condition == BoundaryKind::Impedance) {
          for (int j = 0; j < 256; ++j)
            if (c.impedance.at(2 * kPi * j / 256).imag() < 0) {
              add("impedance_sign", "Im eta < 0 on component " + std::to_string(i));
              break;
            }
        }
      }
      if (scene.ball) polys.push_back(BoundaryCurve::circle(scene.ball->center,
                                                            std::max(scene.ball->radius, 1e-12))
                                          .sample(256));
      for (size_t i = 0; i < polys.size(); ++i)
        for (size_t j = i + 1; j < polys.size(); ++j)
          if (polygons_intersect(polys[i], polys[j]))
            add("components_overlap",
                "components " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
      break;
    }
    case SceneVariant::Medium: {
      for (size_t i = 0; i < scene.inclusions.size(); ++i) {
        const auto& inc = scene.inclusions[i];
        if (!(inc.index.real() > 0) || inc.index.imag() < 0)
          add("index_sign", "inclusion " + std::to_string(i) + " violates Re n > 0, Im n >= 0");
        if (inc.region.max_radius_about({0, 0}) >= R)
          add("component_outside_enclosing_disk",
              "inclusion " + std::to_string(i) + " is not inside B_R");
      }
      for (size_t i = 0; i < scene.inclusions.size(); ++i)
        for (size_t j = i + 1; j < scene.inclusions.size(); ++j) {
          const auto& a = scene.inclusions[i].region;
          const auto& b = scene.inclusions[j].region;
          if (polygons_intersect(a.sample(256), b.sample(256)))
            add("components_overlap",
                "inclusions " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
        }
      if (scene.raster) {
        const auto& r = *scene.raster;
        bool overlap = false;
        for (int j = 0; j < r.ny && !overlap; ++j)
          for (int i = 0; i < r.nx && !overlap; ++i) {
            if (r.index[static_cast<size_t>(j) * r.nx + i] == Complex(1.0, 0.0)) continue;
            const Point c(r.x0 + (i + 0.5) * r.h, r.y0 + (j + 0.5) * r.h);
            for (const auto& inc : scene.inclusions) overlap = overlap || inc.region.contains(c);
          }
        if (overlap) add("components_overlap", "raster contrast overlaps an inclusion");
        for (int j = 0; j < r.ny; ++j)
          for (int i = 0; i < r.nx; ++i) {
            const Complex n = r.index[static_cast<size_t>(j) * r.nx + i];
            if (n == Complex(1.0, 0.0)) continue;
            if (!(n.real() > 0) || n.imag() < 0) {
              add("index_sign", "raster cell violates Re n > 0, Im n >= 0");
              i = r.nx;
              j = r.ny;
              break;
            }
            const double cx = std::max(std::abs(r.x0 + i * r.h), std::abs(r.x0 + (i + 1) * r.h));
            const double cy = std::max(std::abs(r.y0 + j * r.h), std::abs(r.y0 + (j + 1) * r.h));
            if (std::hypot(cx, cy) >= R) {
              add("component_outside_enclosing_disk", "raster contrast extends beyond B_R");
              i = r.nx;
              j = r.ny;
              break;
            }
          }
      }
      break;
    }
    case SceneVariant::RoughSurface: {
      for (const auto& b : scene.surface.bumps)
        if (b.amplitude != 0.0 && !(b.half_width > 0))
          add("surface_support", "bump half-width must be positive");
      const auto [lo, hi] = scene.surface.support();
      if (!scene.surface.flat() && (lo <= -R || hi >= R))
        add("surface_support", "supp(h) is not inside (-R, R)");
      if (scene.ball) {
        const auto& b = *scene.ball;
        if (std::abs(b.center.x()) <= b.radius)
          add("ball_meets_axis", "closure of the ball meets the axis x1 = 0");
        double top = 0;
        for (int j = 0; j <= 200; ++j)
          top = std::max(top, scene.surface.height(b.center.x() - b.radius + 2 * b.radius * j / 200.0));
        if (b.center.y() - b.radius <= top)
          add("ball_below_surface", "ball is not strictly above the surface");
        // B, its mirror B', the point reflection and its mirror must be apart.
        if (std::abs(b.center.y()) <= b.radius || std::abs(b.center.x()) <= b.radius)
          add("reflected_balls_overlap", "ball images under the reflections overlap");
      }
      break;
    }
  }
  return rep;
}

void require_hard_checks(const Scene& scene, const Wavenumber& k) {
  const auto rep = validate_scene(scene, k);
  if (!rep.passes_hard_checks()) fail(ErrorKind::Geometry, "inadmissible scene:\n" + rep.summary());
}

}  // namespace phaseless
