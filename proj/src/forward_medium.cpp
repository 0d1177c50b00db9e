#include "phaseless/forward_medium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

constexpr Complex I{0.0, 1.0};

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Gauss-Legendre rule mapped to [0, 1].
struct Rule01 {
  std::vector<double> x, w;
  explicit Rule01(int n) {
    gauss_legendre(n, x, w);
    for (auto& v : x) v = 0.5 * (v + 1);
    for (auto& v : w) v *= 0.5;
  }
};

// Piece boundary edge: a straight segment or an arc of a region curve.
struct Edge {
  bool arc = false;
  Point a, b;
  const BoundaryCurve* curve = nullptr;
  double t0 = 0, t1 = 0;
  Point at(double tau) const { return arc ? curve->point(t0 + tau * (t1 - t0)) : Point(a + tau * (b - a)); }
  Point tangent(double tau) const {
    return arc ? Point(curve->d1(t0 + tau * (t1 - t0)) * (t1 - t0)) : Point(b - a);
  }
};

/// Part of one cell carrying constant contrast, bounded counterclockwise.
struct Piece {
  Complex m;
  std::vector<Edge> edges;
};

/// Fan quadrature of a piece from apex o: calls add(y, weight). With
/// `singular` the radial variable is squared, which resolves a logarithmic
/// singularity at o.
template <class F>
void fan(const Piece& p, const Point& o, const Rule01& rs, const Rule01& rt, bool singular, F&& add) {
  for (const Edge& e : p.edges) {
    for (size_t it = 0; it < rt.x.size(); ++it) {
      const Point y = e.at(rt.x[it]);
      const double cr = cross(y - o, e.tangent(rt.x[it])) * rt.w[it];
      if (cr == 0) continue;
      for (size_t is = 0; is < rs.x.size(); ++is) {
        double s = rs.x[is], w = rs.w[is];
        if (singular) {
          w *= 2 * s;
          s *= s;
        }
        add(Point(o + s * (y - o)), cr * s * w);
      }
    }
  }
}

double piece_area(const Piece& p, const Point& o) {
  static const Rule01 rs(2), rt(16);
  double a = 0;
  fan(p, o, rs, rt, false, [&](const Point&, double w) { a += w; });
  return a;
}

// Clipping of a region polygon (vertices on the curve) against a cell.
struct ClipVertex {
  Point p;
  double t;        // curve parameter, NaN for points on the cell boundary only
  bool curve_in;   // the edge arriving at this vertex follows the curve
};

double unwrap_forward(double from, double to) {
  double d = std::fmod(to - from, 2 * kPi);
  if (d < 0) d += 2 * kPi;
  return d;
}

std::vector<ClipVertex> clip_half_plane(const std::vector<ClipVertex>& poly, int axis, double c,
                                        bool keep_greater, const BoundaryCurve& curve) {
  std::vector<ClipVertex> out;
  const size_t n = poly.size();
  if (n == 0) return out;
  auto inside = [&](const Point& p) { return keep_greater ? p[axis] >= c : p[axis] <= c; };
  auto intersect = [&](const ClipVertex& P, const ClipVertex& Q) {
    const double lam = (c - P.p[axis]) / (Q.p[axis] - P.p[axis]);
    ClipVertex v{P.p + lam * (Q.p - P.p), std::nan(""), false};
    if (Q.curve_in && !std::isnan(P.t) && !std::isnan(Q.t)) {
      double t = P.t + lam * unwrap_forward(P.t, Q.t);
      for (int it = 0; it < 20; ++it) {
        const double g = curve.point(t)[axis] - c, dg = curve.d1(t)[axis];
        if (dg == 0) break;
        const double dt = g / dg;
        t -= dt;
        if (std::abs(dt) < 1e-15) break;
      }
      v.t = t;
      v.p = curve.point(t);
      v.p[axis] = c;
    }
    return v;
  };
  for (size_t i = 0; i < n; ++i) {
    const ClipVertex& P = poly[(i + n - 1) % n];
    const ClipVertex& Q = poly[i];
    const bool pin = inside(P.p), qin = inside(Q.p);
    if (qin) {
      if (!pin) {
        ClipVertex v = intersect(P, Q);
        v.curve_in = false;
        out.push_back(v);
      }
      out.push_back(Q);
    } else if (pin) {
      ClipVertex v = intersect(P, Q);
      v.curve_in = Q.curve_in;
      out.push_back(v);
    }
  }
  return out;
}

/// Converts clipped vertices into straight edges and merged curve arcs.
std::vector<Edge> build_edges(const std::vector<ClipVertex>& v, const BoundaryCurve& curve) {
  std::vector<Edge> edges;
  const size_t n = v.size();
  if (n < 2) return edges;
  size_t start = n;
  for (size_t i = 0; i < n; ++i)
    if (!v[i].curve_in) {
      start = i;
      break;
    }
  if (start == n) {  // whole curve inside the cell
    Edge e;
    e.arc = true;
    e.curve = &curve;
    e.t0 = v[0].t;
    e.t1 = v[0].t + 2 * kPi;
    edges.push_back(e);
    return edges;
  }
  size_t i = start;
  for (size_t count = 0; count < n;) {
    const size_t j = (i + 1) % n;
    if (!v[j].curve_in) {
      Edge e;
      e.a = v[i].p;
      e.b = v[j].p;
      if ((e.b - e.a).norm() > 0) edges.push_back(e);
      i = j;
      ++count;
      continue;
    }
    // Follow the run of curve edges starting at i.
    size_t k = j, steps = 1;
    while (steps < n && v[(k + 1) % n].curve_in) {
      k = (k + 1) % n;
      ++steps;
    }
    Edge e;
    e.arc = true;
    e.curve = &curve;
    e.t0 = v[i].t;
    double span = 0;
    size_t prev = i;
    for (size_t q = 0; q < steps; ++q) {
      const size_t cur = (i + 1 + q) % n;
      span += unwrap_forward(v[prev].t, v[cur].t);
      prev = cur;
    }
    e.t1 = e.t0 + span;
    if (span > 0) edges.push_back(e);
    i = k;
    count += steps;
  }
  return edges;
}

struct Region {
  const BoundaryCurve* curve = nullptr;  // null for axis-aligned boxes
  Point lo, hi;                          // box corners or curve bounding box
  Complex m;
};

Piece box_piece(const Point& lo, const Point& hi, Complex m) {
  Piece p;
  p.m = m;
  const Point c[4] = {lo, Point(hi.x(), lo.y()), hi, Point(lo.x(), hi.y())};
  for (int q = 0; q < 4; ++q) {
    Edge e;
    e.a = c[q];
    e.b = c[(q + 1) % 4];
    p.edges.push_back(e);
  }
  return p;
}

struct CellInfo {
  int i = 0, j = 0;
  bool full = false;
  Complex m_full = 0;
  std::vector<Piece> pieces;
};

using CellMap = std::map<std::pair<int, int>, CellInfo>;

void rasterize_curve(const Region& r, double h, CellMap& cells) {
  const BoundaryCurve& curve = *r.curve;
  const int n = std::max(4096, static_cast<int>(std::ceil(16 * curve.length() / h)));
  std::vector<ClipVertex> poly(n);
  for (int q = 0; q < n; ++q) {
    const double t = 2 * kPi * q / n;
    poly[q] = {curve.point(t), t, true};
  }
  const int i0 = static_cast<int>(std::floor(r.lo.x() / h)), i1 = static_cast<int>(std::floor(r.hi.x() / h));
  const int j0 = static_cast<int>(std::floor(r.lo.y() / h)), j1 = static_cast<int>(std::floor(r.hi.y() / h));
  const int nx = i1 - i0 + 1, ny = j1 - j0 + 1;
  std::vector<char> cut(static_cast<size_t>(nx) * ny, 0);
  for (int q = 0; q < n; ++q) {
    const Point& a = poly[q].p;
    const Point& b = poly[(q + 1) % n].p;
    const int ia = static_cast<int>(std::floor(std::min(a.x(), b.x()) / h)) - i0;
    const int ib = static_cast<int>(std::floor(std::max(a.x(), b.x()) / h)) - i0;
    const int ja = static_cast<int>(std::floor(std::min(a.y(), b.y()) / h)) - j0;
    const int jb = static_cast<int>(std::floor(std::max(a.y(), b.y()) / h)) - j0;
    for (int jj = std::max(ja, 0); jj <= std::min(jb, ny - 1); ++jj)
      for (int ii = std::max(ia, 0); ii <= std::min(ib, nx - 1); ++ii) cut[static_cast<size_t>(jj) * nx + ii] = 1;
  }
  for (int jj = 0; jj < ny; ++jj) {
    for (int ii = 0; ii < nx; ++ii) {
      const int i = i0 + ii, j = j0 + jj;
      const Point lo(i * h, j * h), hi((i + 1) * h, (j + 1) * h);
      if (!cut[static_cast<size_t>(jj) * nx + ii]) {
        if (!curve.contains(0.5 * (lo + hi))) continue;
        auto& cell = cells[{i, j}];
        cell.i = i;
        cell.j = j;
        cell.pieces.push_back(box_piece(lo, hi, r.m));
        continue;
      }
      std::vector<ClipVertex> v = clip_half_plane(poly, 0, lo.x(), true, curve);
      v = clip_half_plane(v, 0, hi.x(), false, curve);
      v = clip_half_plane(v, 1, lo.y(), true, curve);
      v = clip_half_plane(v, 1, hi.y(), false, curve);
      if (v.size() < 2) continue;
      Piece p;
      p.m = r.m;
      p.edges = build_edges(v, curve);
      if (p.edges.empty()) continue;
      if (std::abs(piece_area(p, 0.5 * (lo + hi))) < 1e-13 * h * h) continue;
      auto& cell = cells[{i, j}];
      cell.i = i;
      cell.j = j;
      cell.pieces.push_back(std::move(p));
    }
  }
}

void rasterize_box(const Region& r, double h, CellMap& cells) {
  const int i0 = static_cast<int>(std::floor(r.lo.x() / h)), i1 = static_cast<int>(std::ceil(r.hi.x() / h));
  const int j0 = static_cast<int>(std::floor(r.lo.y() / h)), j1 = static_cast<int>(std::ceil(r.hi.y() / h));
  for (int j = j0; j < j1; ++j)
    for (int i = i0; i < i1; ++i) {
      const Point lo(std::max(i * h, r.lo.x()), std::max(j * h, r.lo.y()));
      const Point hi(std::min((i + 1) * h, r.hi.x()), std::min((j + 1) * h, r.hi.y()));
      if (hi.x() - lo.x() < 1e-13 * h || hi.y() - lo.y() < 1e-13 * h) continue;
      auto& cell = cells[{i, j}];
      cell.i = i;
      cell.j = j;
      cell.pieces.push_back(box_piece(lo, hi, r.m));
    }
}

std::vector<Region> scene_regions(const Scene& scene, std::vector<BoundaryCurve>& storage) {
  storage.clear();
  storage.reserve(scene.inclusions.size() + 1);
  for (const auto& inc : scene.inclusions) storage.push_back(inc.region);
  if (scene.ball) storage.push_back(BoundaryCurve::circle(scene.ball->center, scene.ball->radius));
  std::vector<Region> regions;
  size_t q = 0;
  auto add_curve = [&](Complex m) {
    const BoundaryCurve* c = &storage[q++];
    Region r;
    r.curve = c;
    r.lo = Point(1e300, 1e300);
    r.hi = Point(-1e300, -1e300);
    for (const Point& p : c->sample(2048)) {
      r.lo = r.lo.cwiseMin(p);
      r.hi = r.hi.cwiseMax(p);
    }
    const double pad = 1e-3 * (r.hi - r.lo).norm();
    r.lo.array() -= pad;
    r.hi.array() += pad;
    r.m = m;
    if (m != Complex(0.0, 0.0)) regions.push_back(r);
  };
  for (const auto& inc : scene.inclusions) add_curve(inc.index - 1.0);
  if (scene.ball) add_curve(Complex(scene.ball_index - 1.0, 0.0));
  if (scene.raster) {
    const auto& ra = *scene.raster;
    for (int j = 0; j < ra.ny; ++j)
      for (int i = 0; i < ra.nx; ++i) {
        const Complex m = ra.index[static_cast<size_t>(j) * ra.nx + i] - 1.0;
        if (m == Complex(0.0, 0.0)) continue;
        Region r;
        r.lo = Point(ra.x0 + i * ra.h, ra.y0 + j * ra.h);
        r.hi = Point(ra.x0 + (i + 1) * ra.h, ra.y0 + (j + 1) * ra.h);
        r.m = m;
        regions.push_back(r);
      }
  }
  return regions;
}

/// Quadratic Lagrange basis on nodes -1, 0, 1 (units of h).
double lagrange(int p, double xi) {
  switch (p) {
    case -1: return 0.5 * xi * (xi - 1);
    case 0: return 1 - xi * xi;
    default: return 0.5 * xi * (xi + 1);
  }
}

double legendre(int a, double u) {
  switch (a) {
    case 0: return 1;
    case 1: return u;
    case 2: return 0.5 * (3 * u * u - 1);
    default: return 0.5 * (5 * u * u * u - 3 * u);
  }
}

using Stencil = std::array<double, 9>;

Stencil basis(const Point& y, const Point& c, double h) {
  const double xi = (y.x() - c.x()) / h, eta = (y.y() - c.y()) / h;
  Stencil b;
  for (int q = -1; q <= 1; ++q)
    for (int p = -1; p <= 1; ++p) b[(p + 1) + 3 * (q + 1)] = lagrange(p, xi) * lagrange(q, eta);
  return b;
}


constexpr int kFar = 4;  // tensor Gauss points per direction of the far rule

}  // namespace

struct MediumSolver::Impl {
  MediumGrid grid;
  double k = 1.0;
  std::vector<CellInfo> cells;                  // per source cell
  std::vector<std::array<int, 9>> stencil;      // unknown indices per source cell
  std::vector<std::array<Point, kFar * kFar>> nodes;
  std::vector<Eigen::Matrix<Complex, 9, kFar * kFar>> weights;  // m-weighted far rule
  Eigen::MatrixXcd A;
};

namespace {

/// `storage` owns the curves that arc edges point to; it must outlive the cells.
std::vector<CellInfo> collect_cells(const Scene& scene, double h, std::vector<BoundaryCurve>& storage) {
  const auto regions = scene_regions(scene, storage);
  CellMap map;
  for (const auto& r : regions) {
    if (r.curve) rasterize_curve(r, h, map);
    else rasterize_box(r, h, map);
  }
  std::vector<CellInfo> cells;
  for (auto& [key, cell] : map) {
    if (cell.pieces.empty()) continue;
    if (cell.pieces.size() == 1) {
      const Point c((cell.i + 0.5) * h, (cell.j + 0.5) * h);
      const auto& p = cell.pieces[0];
      const bool straight = std::none_of(p.edges.begin(), p.edges.end(), [](const Edge& e) { return e.arc; });
      if (straight && std::abs(piece_area(p, c) - h * h) < 1e-12 * h * h) {
        cell.full = true;
        cell.m_full = p.m;
      }
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace

MediumGrid build_medium_grid(const Scene& scene, double h) {
  if (!(h > 0) || !std::isfinite(h)) fail(ErrorKind::Domain, "cell size must be positive");
  std::vector<BoundaryCurve> storage;
  const auto cells = collect_cells(scene, h, storage);
  MediumGrid g;
  g.h = h;
  std::map<std::pair<int, int>, int> index;
  for (const auto& c : cells) {
    Complex mass = 0;
    const Point center((c.i + 0.5) * h, (c.j + 0.5) * h);
    for (const auto& p : c.pieces) mass += p.m * piece_area(p, center);
    index[{c.i, c.j}] = g.size();
    g.ci.push_back(c.i);
    g.cj.push_back(c.j);
    g.contrast.push_back(mass / (h * h));
  }
  g.ui = g.ci;
  g.uj = g.cj;
  for (size_t c = 0; c < cells.size(); ++c)
    for (int q = -1; q <= 1; ++q)
      for (int p = -1; p <= 1; ++p) {
        const std::pair<int, int> key{g.ci[c] + p, g.cj[c] + q};
        if (index.count(key)) continue;
        index[key] = g.unknowns();
        g.ui.push_back(key.first);
        g.uj.push_back(key.second);
      }
  return g;
}

MediumSolver::MediumSolver(const Scene& scene, const Wavenumber& k, double h, GmresOptions opts)
    : k_(k.value()), opts_(opts) {
  if (scene.variant != SceneVariant::Medium)
    fail(ErrorKind::Domain, "medium solver needs a medium scene");
  if (!(h > 0) || !std::isfinite(h)) fail(ErrorKind::Domain, "cell size must be positive");
  require_hard_checks(scene, k);
  auto impl = std::make_shared<Impl>();
  impl->k = k_;
  impl->grid = build_medium_grid(scene, h);
  std::vector<BoundaryCurve> storage;
  impl->cells = collect_cells(scene, h, storage);
  const MediumGrid& g = impl->grid;
  const int M = g.size(), U = g.unknowns();
  if (M == 0) {  // no contrast anywhere: u = u_i
    impl_ = impl;
    return;
  }

  std::map<std::pair<int, int>, int> index;
  for (int c = 0; c < U; ++c) index[{g.ui[c], g.uj[c]}] = c;
  impl->stencil.resize(M);
  for (int e = 0; e < M; ++e)
    for (int q = -1; q <= 1; ++q)
      for (int p = -1; p <= 1; ++p) impl->stencil[e][(p + 1) + 3 * (q + 1)] = index.at({g.ci[e] + p, g.cj[e] + q});

  // Far rule per source cell: tensor Gauss nodes, weights matching the
  // m-weighted moments of the cell contents up to degree 3 per variable.
  std::vector<double> gx, gw;
  gauss_legendre(kFar, gx, gw);
  const Rule01 ms(8), mt(16);
  impl->nodes.resize(M);
  impl->weights.resize(M);
  for (int e = 0; e < M; ++e) {
    const CellInfo& cell = impl->cells[e];
    const Point c((cell.i + 0.5) * h, (cell.j + 0.5) * h);
    for (int b = 0; b < kFar; ++b)
      for (int a = 0; a < kFar; ++a) impl->nodes[e][a + kFar * b] = c + 0.5 * h * Point(gx[a], gx[b]);
    auto& W = impl->weights[e];
    if (cell.full) {
      for (int q = 0; q < kFar * kFar; ++q) {
        const Stencil l = basis(impl->nodes[e][q], c, h);
        for (int s = 0; s < 9; ++s)
          W(s, q) = cell.m_full * 0.25 * h * h * gw[q % kFar] * gw[q / kFar] * l[s];
      }
      continue;
    }
    Eigen::Matrix<Complex, 9, 16> mu = Eigen::Matrix<Complex, 9, 16>::Zero();
    for (const Piece& pc : cell.pieces)
      fan(pc, c, ms, mt, false, [&](const Point& y, double w) {
        const Stencil l = basis(y, c, h);
        const double u = 2 * (y.x() - c.x()) / h, v = 2 * (y.y() - c.y()) / h;
        for (int b = 0; b < 4; ++b)
          for (int a = 0; a < 4; ++a) {
            const double pw = legendre(a, u) * legendre(b, v) * w;
            for (int s = 0; s < 9; ++s) mu(s, a + 4 * b) += pc.m * l[s] * pw;
          }
      });
    W.setZero();
    for (int q = 0; q < kFar * kFar; ++q) {
      const double u = gx[q % kFar], v = gx[q / kFar];
      for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a) {
          const double f = 0.25 * gw[q % kFar] * gw[q / kFar] * (2 * a + 1) * (2 * b + 1) *
                           legendre(a, u) * legendre(b, v);
          for (int s = 0; s < 9; ++s) W(s, q) += f * mu(s, a + 4 * b);
        }
    }
  }

  // Toeplitz table of full-cell integrals int Phi(-y) l_s(y - c) over the
  // cell centered at (di h, dj h), for every offset between unknowns.
  int imin = g.ui[0], imax = g.ui[0], jmin = g.uj[0], jmax = g.uj[0];
  for (int c = 0; c < U; ++c) {
    imin = std::min(imin, g.ui[c]);
    imax = std::max(imax, g.ui[c]);
    jmin = std::min(jmin, g.uj[c]);
    jmax = std::max(jmax, g.uj[c]);
  }
  const int sx = imax - imin, sy = jmax - jmin;
  const int tx = 2 * sx + 1, ty = 2 * sy + 1;
  std::vector<std::array<Complex, 9>> table(static_cast<size_t>(tx) * ty);
  std::vector<char> have(table.size(), 0);
  const Rule01 ns(10), nt(20);
  auto table_at = [&](int di, int dj) -> const std::array<Complex, 9>& {
    const size_t key = static_cast<size_t>(dj + sy) * tx + (di + sx);
    if (have[key]) return table[key];
    std::array<Complex, 9> out{};
    const Point c(di * h, dj * h);
    const int d = std::max(std::abs(di), std::abs(dj));
    if (d <= 3) {
      const Piece sq = box_piece(c - Point(0.5 * h, 0.5 * h), c + Point(0.5 * h, 0.5 * h), 1.0);
      fan(sq, Point(0, 0), ns, nt, true, [&](const Point& y, double w) {
        const double r = y.norm();
        if (r == 0) return;
        const Complex phi = 0.25 * I * hankel1(0, k_ * r) * w;
        const Stencil l = basis(y, c, h);
        for (int s = 0; s < 9; ++s) out[s] += phi * l[s];
      });
    } else {
      const int order = d <= 6 ? 8 : d <= 12 ? 6 : 4;
      std::vector<double> x, w;
      gauss_legendre(order, x, w);
      for (int b = 0; b < order; ++b)
        for (int a = 0; a < order; ++a) {
          const Point y = c + 0.5 * h * Point(x[a], x[b]);
          const Complex phi = 0.25 * I * hankel1(0, k_ * y.norm()) * (0.25 * h * h * w[a] * w[b]);
          const Stencil l = basis(y, c, h);
          for (int s = 0; s < 9; ++s) out[s] += phi * l[s];
        }
    }
    have[key] = 1;
    table[key] = out;
    return table[key];
  };

  impl->A = Eigen::MatrixXcd::Identity(U, U);
  const double k2 = k_ * k_;
  for (int e = 0; e < M; ++e) {
    const CellInfo& cell = impl->cells[e];
    const Point ce((cell.i + 0.5) * h, (cell.j + 0.5) * h);
    const auto& st = impl->stencil[e];
    for (int c = 0; c < U; ++c) {
      const int di = g.ui[c] - cell.i, dj = g.uj[c] - cell.j;
      std::array<Complex, 9> v{};
      if (cell.full) {
        const auto& t = table_at(-di, -dj);
        for (int s = 0; s < 9; ++s) v[s] = cell.m_full * t[s];
      } else if (std::max(std::abs(di), std::abs(dj)) <= 3) {
        const Point x = g.center(c);
        for (const Piece& pc : cell.pieces)
          fan(pc, x, ns, nt, true, [&](const Point& y, double w) {
            const double r = (x - y).norm();
            if (r == 0) return;
            const Complex phi = pc.m * 0.25 * I * hankel1(0, k_ * r) * w;
            const Stencil l = basis(y, ce, h);
            for (int s = 0; s < 9; ++s) v[s] += phi * l[s];
          });
      } else {
        const Point x = g.center(c);
        for (int q = 0; q < kFar * kFar; ++q) {
          const Complex phi = 0.25 * I * hankel1(0, k_ * (x - impl->nodes[e][q]).norm());
          for (int s = 0; s < 9; ++s) v[s] += phi * impl->weights[e](s, q);
        }
      }
      for (int s = 0; s < 9; ++s) impl->A(c, st[s]) -= k2 * v[s];
    }
  }
  // Arc edges point into `storage`; only the far rules are kept.
  for (auto& cell : impl->cells) cell.pieces.clear();
  impl_ = impl;
}

const MediumGrid& MediumSolver::grid() const { return impl_->grid; }

TotalField MediumSolver::solve_ls(const IncidentField& incident) const {
  if (std::abs(incident.k() - k_) > 1e-14 * k_)
    fail(ErrorKind::Domain, "incident wavenumber differs from the solver's");
  const MediumGrid& g = impl_->grid;
  TotalField u;
  Eigen::VectorXcd b(g.unknowns());
  for (int c = 0; c < g.unknowns(); ++c) b[c] = incident.value(g.center(c));
  if (g.size() == 0) {
    u.values = b;
    return u;
  }
  u.values = gmres(impl_->A, b, opts_, &u.residual_history);
  u.iterations = static_cast<int>(u.residual_history.size());
  return u;
}

Complex MediumSolver::far_field_medium(const TotalField& u, const Point& xhat) const {
  require_unit(xhat);
  const MediumGrid& g = impl_->grid;
  if (u.values.size() != g.unknowns()) fail(ErrorKind::Data, "field does not belong to this grid");
  Complex s = 0;
  for (int e = 0; e < g.size(); ++e) {
    const auto& st = impl_->stencil[e];
    for (int q = 0; q < kFar * kFar; ++q) {
      Complex a = 0;
      for (int t = 0; t < 9; ++t) a += impl_->weights[e](t, q) * u.values[st[t]];
      s += a * std::exp(-I * k_ * xhat.dot(impl_->nodes[e][q]));
    }
  }
  return k_ * k_ * far_field_constant(k_) * s;
}

Eigen::VectorXcd MediumSolver::far_field_medium(const TotalField& u, const DirectionGrid& obs) const {
  Eigen::VectorXcd out(obs.size());
  for (int m = 0; m < obs.size(); ++m) out[m] = far_field_medium(u, obs.direction(m));
  return out;
}

FarFieldMatrix MediumSolver::multistatic(const DirectionGrid& obs, const DirectionGrid& inc) const {
  obs.validate();
  inc.validate();
  FarFieldMatrix F;
  F.obs = obs;
  F.inc = inc;
  F.k = k_;
  F.values.resize(obs.size(), inc.size());
  const Wavenumber kw(k_);
  // Columns are independent; each is computed identically for any thread count.
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n < inc.size(); ++n) {
    try {
      F.values.col(n) =
          far_field_medium(solve_ls(IncidentField::plane_wave(kw, inc.direction(n))), obs);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  F.validate();
  return F;
}

Eigen::VectorXcd gmres(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                       const GmresOptions& opts, std::vector<double>* history) {
  const int n = static_cast<int>(b.size());
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0) return x;
  const int m = std::max(1, std::min(opts.restart, n));
  int total = 0;
  std::vector<double> hist;
  auto give_up = [&]() {
    std::ostringstream msg;
    msg << "GMRES did not reach " << opts.tolerance << " in " << total << " iterations; residuals:";
    const size_t from = hist.size() > 10 ? hist.size() - 10 : 0;
    for (size_t i = from; i < hist.size(); ++i) msg << ' ' << hist[i];
    if (history) *history = hist;
    fail(ErrorKind::Numerical, msg.str());
  };
  while (true) {
    Eigen::VectorXcd r = b - A * x;
    double beta = r.norm();
    if (beta / bnorm <= opts.tolerance) break;
    if (total >= opts.max_iterations) give_up();
    Eigen::MatrixXcd V(n, m + 1);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    std::vector<Complex> cs(m), sn(m);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
    V.col(0) = r / beta;
    g[0] = beta;
    int j = 0;
    for (; j < m && total < opts.max_iterations; ++j, ++total) {
      Eigen::VectorXcd w = A * V.col(j);
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V.col(i).dot(w);
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (std::abs(H(j + 1, j)) > 0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const Complex t = std::conj(cs[i]) * H(i, j) + std::conj(sn[i]) * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double den = std::hypot(std::abs(H(j, j)), std::abs(H(j + 1, j)));
      cs[j] = H(j, j) / den;
      sn[j] = H(j + 1, j) / den;
      H(j, j) = den;
      H(j + 1, j) = 0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];
      hist.push_back(std::abs(g[j + 1]) / bnorm);
      if (hist.back() <= 0.1 * opts.tolerance) {
        ++j;
        ++total;
        break;
      }
    }
    Eigen::VectorXcd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += V.leftCols(j) * y;
  }
  if (history) *history = hist;
  return x;
}

Complex penetrable_disk_far_field(double k, double a, double n, double obs_angle,
                                  double inc_angle, int terms) {
  if (!(n > 0)) fail(ErrorKind::Domain, "analytic disk series needs a positive real index");
  const double kap = k * std::sqrt(n);
  if (terms < 0) terms = static_cast<int>(kap * a + 30);
  auto dj = [](int m, double x) {
    return m == 0 ? -bessel_j(1, x) : 0.5 * (bessel_j(m - 1, x) - bessel_j(m + 1, x));
  };
  auto dh = [](int m, double x) {
    return m == 0 ? -hankel1(1, x) : 0.5 * (hankel1(m - 1, x) - hankel1(m + 1, x));
  };
  Complex s = 0;
  for (int q = -terms; q <= terms; ++q) {
    const int m = std::abs(q);
    const double ji = bessel_j(m, kap * a), jo = bessel_j(m, k * a);
    const Complex num = kap * dj(m, kap * a) * jo - k * ji * dj(m, k * a);
    const Complex den = k * ji * dh(m, k * a) - kap * dj(m, kap * a) * hankel1(m, k * a);
    s += num / den * std::exp(I * (q * (obs_angle - inc_angle)));
  }
  return std::sqrt(2.0 / (kPi * k)) * std::exp(Complex(0.0, -kPi / 4)) * s;
}

MediumRaster read_medium_raster(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot read medium raster " + path);
  Header h = read_header(in);
  for (const char* key : {"x0", "y0", "h", "nx", "ny"})
    if (!h.count(key)) fail(ErrorKind::Config, path + ": missing header '" + key + "'");
  MediumRaster r;
  r.x0 = parse_double(h["x0"]);
  r.y0 = parse_double(h["y0"]);
  r.h = parse_double(h["h"]);
  r.nx = static_cast<int>(parse_double(h["nx"]));
  r.ny = static_cast<int>(parse_double(h["ny"]));
  if (!(r.h > 0) || r.nx < 1 || r.ny < 1) fail(ErrorKind::Config, path + ": bad raster shape");
  r.index.assign(static_cast<size_t>(r.nx) * r.ny, Complex(1.0, 0.0));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, re, im;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, re, ',');
    std::getline(ss, im, ',');
    const int i = static_cast<int>(parse_double(a)), j = static_cast<int>(parse_double(b));
    if (i < 0 || j < 0 || i >= r.nx || j >= r.ny) fail(ErrorKind::Config, path + ": cell out of range");
    r.index[static_cast<size_t>(j) * r.nx + i] = Complex(parse_double(re), parse_double(im));
  }
  return r;
}

void write_medium_raster(const std::string& path, const MediumRaster& r) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write " + path);
  out << "# x0=" << format_double(r.x0) << "\n# y0=" << format_double(r.y0)
      << "\n# h=" << format_double(r.h) << "\n# nx=" << r.nx << "\n# ny=" << r.ny << "\ni,j,re,im\n";
  for (int j = 0; j < r.ny; ++j)
    for (int i = 0; i < r.nx; ++i) {
      const Complex v = r.index[static_cast<size_t>(j) * r.nx + i];
      out << i << ',' << j << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
}

}  // namespace phaseless
