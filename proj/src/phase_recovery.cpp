#include "phaseless/phase_recovery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "phaseless/error.hpp"
#include "phaseless/inversion_lsm.hpp"

namespace phaseless {

namespace {

bool is_periodic(const DirectionGrid& g) {
  const int n = g.size();
  if (n < 3) return false;
  const double h = 2 * kPi / n;
  for (int i = 0; i < n; ++i)
    if (std::abs(g.angles[i] - g.angles[0] - i * h) > 1e-9) return false;
  return true;
}

struct Torus {
  int rows, cols;
  bool wrap_rows, wrap_cols;

  // Returns false when the step leaves a non-periodic axis.
  bool step(int m, int n, int dm, int dn, int& om, int& on) const {
    om = m + dm;
    on = n + dn;
    if (om < 0 || om >= rows) {
      if (!wrap_rows) return false;
      om = (om + rows) % rows;
    }
    if (on < 0 || on >= cols) {
      if (!wrap_cols) return false;
      on = (on + cols) % cols;
    }
    return true;
  }
};

constexpr int kDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

Complex bandlimited_mode(int l, double theta) { return std::polar(1.0, l * theta); }

// H_l^(1) for any integer l.
Complex hankel_any(int l, double x) {
  const Complex h = hankel1(std::abs(l), x);
  return (l < 0 && (std::abs(l) % 2 == 1)) ? -h : h;
}

}  // namespace

RelativePhaseField relative_phase(const PhaselessDataset& data, double mask_threshold) {
  data.validate();
  const int rows = data.obs.size(), cols = data.inc.size();
  RelativePhaseField rp;
  rp.amplitude = data.mod_single;
  rp.ref_amplitude = data.mod_ref;
  rp.obs = data.obs;
  rp.inc = data.inc;
  rp.cos_delta = Eigen::MatrixXd::Zero(rows, cols);
  rp.delta = Eigen::MatrixXd::Zero(rows, cols);
  rp.sign_confidence = Eigen::MatrixXd::Zero(rows, cols);
  rp.mask = MaskMatrix::Constant(rows, cols, false);

  const Eigen::MatrixXd denom = 2.0 * data.mod_ref.asDiagonal() * data.mod_single;
  const double cut = mask_threshold * denom.maxCoeff();
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      const double a = data.mod_single(m, n), b = data.mod_ref(m);
      const double s = data.mod_super(m, n);
      if (!(denom(m, n) > cut) || denom(m, n) == 0.0) continue;
      // delta vanishes on the d0 column by definition.
      double c = n == data.d0_index ? 1.0 : (s * s - a * a - b * b) / denom(m, n);
      rp.clamp_excess = std::max(rp.clamp_excess, std::abs(c) - 1.0);
      c = std::clamp(c, -1.0, 1.0);
      rp.cos_delta(m, n) = c;
      rp.delta(m, n) = std::acos(c);
      rp.mask(m, n) = true;
    }
  rp.clamp_excess = std::max(rp.clamp_excess, 0.0);
  return rp;
}

RelativePhaseField resolve_signs(const RelativePhaseField& in) {
  RelativePhaseField rp = in;
  const int rows = rp.cos_delta.rows(), cols = rp.cos_delta.cols();
  const Torus grid{rows, cols, is_periodic(rp.obs), is_periodic(rp.inc)};
  const Eigen::MatrixXd theta = rp.cos_delta.array().acos().matrix();

  // Connectivity of the trusted region.
  Eigen::MatrixXi label = Eigen::MatrixXi::Constant(rows, cols, -1);
  std::vector<int> sizes;
  for (int m0 = 0; m0 < rows; ++m0)
    for (int n0 = 0; n0 < cols; ++n0) {
      if (!rp.mask(m0, n0) || label(m0, n0) >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      sizes.push_back(0);
      std::vector<std::pair<int, int>> stack{{m0, n0}};
      label(m0, n0) = id;
      while (!stack.empty()) {
        auto [m, n] = stack.back();
        stack.pop_back();
        ++sizes[id];
        for (const auto& d : kDirs) {
          int om, on;
          if (grid.step(m, n, d[0], d[1], om, on) && rp.mask(om, on) && label(om, on) < 0) {
            label(om, on) = id;
            stack.push_back({om, on});
          }
        }
      }
    }
  if (sizes.empty()) fail(ErrorKind::Data, "no trusted entries: every entry is masked");
  if (sizes.size() > 1) {
    std::ostringstream msg;
    msg << "fragmented trusted region: " << sizes.size() << " components, sizes";
    for (int s : sizes) msg << ' ' << s;
    fail(ErrorKind::Data, msg.str());
  }

  const double amax = (rp.amplitude.array().colwise() * rp.ref_amplitude.array()).maxCoeff();
  Eigen::MatrixXi sign = Eigen::MatrixXi::Zero(rows, cols);
  auto value = [&](int m, int n, int s) {
    return std::polar(rp.amplitude(m, n), s * theta(m, n));
  };
  // Sign of (m, n) predicted from fixed neighbours: polynomial extrapolation
  // along each axis from up to kOrder consecutive fixed entries; only the
  // highest-order predictions available are used.
  constexpr int kOrder = 4;
  static const double kExtrap[kOrder][kOrder] = {
      {1, 0, 0, 0}, {2, -1, 0, 0}, {3, -3, 1, 0}, {4, -6, 4, -1}};
  auto decide = [&](int m, int n, int& s, double& margin) {
    Complex preds[4];
    int orders[4], best = 0;
    for (int d = 0; d < 4; ++d) {
      orders[d] = 0;
      int cm = m, cn = n;
      Complex line[kOrder];
      while (orders[d] < kOrder) {
        int om, on;
        if (!grid.step(cm, cn, kDirs[d][0], kDirs[d][1], om, on) || sign(om, on) == 0) break;
        line[orders[d]++] = value(om, on, sign(om, on));
        cm = om;
        cn = on;
      }
      if (orders[d] == 0) continue;
      preds[d] = 0.0;
      for (int j = 0; j < orders[d]; ++j) preds[d] += kExtrap[orders[d] - 1][j] * line[j];
      best = std::max(best, orders[d]);
    }
    if (best == 0) return false;
    double cp = 0, cm = 0;
    for (int d = 0; d < 4; ++d) {
      if (orders[d] != best) continue;
      cp += std::abs(value(m, n, 1) - preds[d]);
      cm += std::abs(value(m, n, -1) - preds[d]);
    }
    s = cp <= cm ? 1 : -1;
    margin = (cp + cm) > 0 ? std::abs(cp - cm) / (cp + cm) : 0.0;
    return true;
  };

  int sm = -1, sn = -1;
  double best = -1;
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      if (!rp.mask(m, n)) continue;
      const double w = std::min(1.0, rp.amplitude(m, n) * rp.ref_amplitude(m) / (0.1 * amax));
      const double score = std::abs(std::sin(theta(m, n))) * w;
      if (score > best) best = score, sm = m, sn = n;
    }
  sign(sm, sn) = 1;
  rp.sign_confidence(sm, sn) = std::abs(std::sin(theta(sm, sn)));

  using Item = std::tuple<double, int, int>;
  std::priority_queue<Item> queue;
  auto push_neighbours = [&](int m, int n) {
    for (const auto& d : kDirs) {
      int om, on, s;
      double margin;
      if (grid.step(m, n, d[0], d[1], om, on) && rp.mask(om, on) && sign(om, on) == 0 &&
          decide(om, on, s, margin))
        queue.push({margin, om, on});
    }
  };
  push_neighbours(sm, sn);
  while (!queue.empty()) {
    auto [margin, m, n] = queue.top();
    queue.pop();
    if (sign(m, n) != 0) continue;
    int s;
    double now;
    decide(m, n, s, now);
    if (now < margin - 1e-12) {
      queue.push({now, m, n});
      continue;
    }
    sign(m, n) = s;
    rp.sign_confidence(m, n) = now;
    push_neighbours(m, n);
  }
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n)
      rp.delta(m, n) = rp.mask(m, n) ? sign(m, n) * theta(m, n) : 0.0;
  return rp;
}

ReciprocityPairing ReciprocityPairing::build(const DirectionGrid& obs, const DirectionGrid& inc) {
  ReciprocityPairing p;
  p.obs.resize(obs.size(), inc.size());
  p.inc.resize(obs.size(), inc.size());
  for (int m = 0; m < obs.size(); ++m)
    for (int n = 0; n < inc.size(); ++n) {
      const int po = obs.find(inc.angles[n] + kPi);
      const int pi = inc.find(obs.angles[m] + kPi);
      if (po < 0 || pi < 0)
        fail(ErrorKind::Data,
             "grid misalignment: -d or -xhat is not a grid direction (reciprocity pairing "
             "needs inc = obs for full aperture or mirrored half apertures)");
      p.obs(m, n) = po;
      p.inc(m, n) = pi;
    }
  return p;
}

namespace {

// Least-squares trigonometric fit of row samples v at angles t (only where
// use[i]), evaluated at all angles.
Eigen::VectorXcd trig_fit(const std::vector<double>& t, const Eigen::VectorXcd& v,
                          const std::vector<bool>& use, int L) {
  std::vector<int> idx;
  for (size_t i = 0; i < t.size(); ++i)
    if (use[i]) idx.push_back(static_cast<int>(i));
  L = std::min(L, (static_cast<int>(idx.size()) - 1) / 2);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(t.size());
  if (L < 0) return out;
  Eigen::MatrixXcd A(idx.size(), 2 * L + 1);
  Eigen::VectorXcd b(idx.size());
  for (size_t r = 0; r < idx.size(); ++r) {
    for (int l = -L; l <= L; ++l) A(r, l + L) = bandlimited_mode(l, t[idx[r]]);
    b(r) = v(idx[r]);
  }
  const Eigen::VectorXcd c = A.colPivHouseholderQr().solve(b);
  for (size_t i = 0; i < t.size(); ++i)
    for (int l = -L; l <= L; ++l) out(i) += c(l + L) * bandlimited_mode(l, t[i]);
  return out;
}

// Value at (m, n) predicted from known entries of the surrounding patch: the
// local carrier e^{i(wm p + wn q)} is estimated from adjacent known samples
// and removed, then a low-degree 2D polynomial is fitted by least squares.
bool local_predict(const Eigen::MatrixXcd& F, const MaskMatrix& known, const Torus& grid, int m,
                   int n, Complex& pred) {
  constexpr int kReach = 3;
  constexpr int kSide = 2 * kReach + 1;
  std::vector<Complex> patch(kSide * kSide);
  std::vector<char> have(kSide * kSide, 0);
  int count = 0;
  for (int p = -kReach; p <= kReach; ++p)
    for (int q = -kReach; q <= kReach; ++q) {
      int om, on;
      if ((p == 0 && q == 0) || !grid.step(m, n, p, q, om, on) || !known(om, on)) continue;
      if (om == m && on == n) continue;
      const int i = (p + kReach) * kSide + q + kReach;
      patch[i] = F(om, on);
      have[i] = 1;
      ++count;
    }
  if (count < 3) return false;
  Complex cm = 0, cn = 0;
  for (int p = 0; p < kSide; ++p)
    for (int q = 0; q < kSide; ++q) {
      const int i = p * kSide + q;
      if (!have[i]) continue;
      if (p + 1 < kSide && have[i + kSide]) cm += patch[i + kSide] * std::conj(patch[i]);
      if (q + 1 < kSide && have[i + 1]) cn += patch[i + 1] * std::conj(patch[i]);
    }
  const double wm = std::abs(cm) > 0 ? std::arg(cm) : 0.0;
  const double wn = std::abs(cn) > 0 ? std::arg(cn) : 0.0;
  int deg = 0;
  while ((deg + 2) * (deg + 3) / 2 < count && deg < 4) ++deg;
  const int terms = (deg + 1) * (deg + 2) / 2;
  Eigen::MatrixXcd A(count, terms);
  Eigen::VectorXcd b(count);
  int row = 0;
  for (int p = -kReach; p <= kReach; ++p)
    for (int q = -kReach; q <= kReach; ++q) {
      const int i = (p + kReach) * kSide + q + kReach;
      if (!have[i]) continue;
      int col = 0;
      for (int total = 0; total <= deg; ++total)
        for (int e = 0; e <= total; ++e)
          A(row, col++) = std::pow(double(p) / kReach, e) * std::pow(double(q) / kReach, total - e);
      b(row++) = patch[i] * std::polar(1.0, -(wm * p + wn * q));
    }
  pred = A.colPivHouseholderQr().solve(b)(0);
  return true;
}

}  // namespace

PhaseCandidates absolute_phase(const RelativePhaseField& rp, const PhaselessDataset& data,
                               double warn_residual) {
  const int rows = rp.cos_delta.rows(), cols = rp.cos_delta.cols();
  if (data.mod_single.rows() != rows || data.mod_single.cols() != cols)
    fail(ErrorKind::Data, "relative phase field and dataset shapes differ");
  const ReciprocityPairing pair = ReciprocityPairing::build(data.obs, data.inc);
  const Eigen::MatrixXd theta = rp.delta.cwiseAbs();
  const Eigen::MatrixXd& A = rp.amplitude;
  Eigen::MatrixXi sign(rows, cols);
  Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(rows, cols);
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      sign(m, n) = rp.delta(m, n) < 0 ? -1 : 1;
      if (rp.mask(m, n)) weight(m, n) = A(m, n) * rp.ref_amplitude(m);
    }
  if (weight.maxCoeff() > 0) weight /= weight.maxCoeff();

  // Each unordered pair once; self-paired entries carry no information.
  auto first_of_pair = [&](int m, int n) {
    const int po = pair.obs(m, n), pi = pair.inc(m, n);
    return (m < po || (m == po && n < pi));
  };

  PhaseCandidates out;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(rows);
  Eigen::MatrixXd gap = Eigen::MatrixXd::Zero(rows, cols);

  // Row-to-row relations: phi(m) - phi(m') is one of s' theta' - s theta.
  Eigen::MatrixXi link = Eigen::MatrixXi::Constant(rows, rows, -1);
  Eigen::MatrixXd link_w = Eigen::MatrixXd::Zero(rows, rows);
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      const int po = pair.obs(m, n);
      if (po == m) continue;
      link(m, po) = n;
      link_w(m, po) = std::min(weight(m, n), weight(po, pair.inc(m, n)));
    }
  auto candidates = [&](int m, int mp, double out4[4]) {
    const int n = link(m, mp);
    const double t = theta(m, n), tp = theta(mp, pair.inc(m, n));
    out4[0] = tp - t, out4[1] = tp + t, out4[2] = -tp - t, out4[3] = t - tp;
  };
  auto misfit = [&](int m, int mp, double diff) {
    double c[4], best = 4;
    candidates(m, mp, c);
    for (double x : c) best = std::min(best, std::abs(std::polar(1.0, diff) - std::polar(1.0, x)));
    return best;
  };

  // Initialization: grow the set of rows with known phase, Prim-style, from
  // the row with the largest reference modulus. Each new row takes the
  // candidate best supported by all rows placed so far; the first link is
  // ambiguous, so all four of its candidates are tried.
  {
    int r0 = 0;
    rp.ref_amplitude.maxCoeff(&r0);
    int r1 = -1;
    for (int m = 0; m < rows; ++m)
      if (m != r0 && link(r0, m) >= 0 && (r1 < 0 || link_w(r0, m) > link_w(r0, r1))) r1 = m;
    double best_total = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 4 && r1 >= 0; ++trial) {
      Eigen::VectorXd ph = Eigen::VectorXd::Zero(rows);
      std::vector<char> placed(rows, 0);
      double c0[4];
      candidates(r1, r0, c0);
      ph(r1) = c0[trial];
      placed[r0] = placed[r1] = 1;
      Eigen::VectorXd reach(rows);
      Eigen::VectorXi via(rows);
      for (int m = 0; m < rows; ++m) {
        reach(m) = std::max(link_w(m, r0), link_w(m, r1));
        via(m) = link_w(m, r0) >= link_w(m, r1) ? r0 : r1;
      }
      for (int added = 2; added < rows; ++added) {
        int m = -1;
        for (int i = 0; i < rows; ++i)
          if (!placed[i] && (m < 0 || reach(i) > reach(m))) m = i;
        double c[4];
        candidates(m, via(m), c);
        double best = std::numeric_limits<double>::infinity(), pick = 0;
        for (double x : c) {
          const double trial_phi = ph(via(m)) + x;
          double score = 0;
          for (int i = 0; i < rows; ++i)
            if (placed[i] && link(m, i) >= 0) score += link_w(m, i) * misfit(m, i, trial_phi - ph(i));
          if (score < best) best = score, pick = trial_phi;
        }
        ph(m) = pick;
        placed[m] = 1;
        for (int i = 0; i < rows; ++i)
          if (!placed[i] && link_w(i, m) > reach(i)) reach(i) = link_w(i, m), via(i) = m;
      }
      double total = 0;
      for (int m = 0; m < rows; ++m)
        for (int i = 0; i < rows; ++i)
          if (link(m, i) >= 0) total += link_w(m, i) * misfit(m, i, ph(m) - ph(i));
      if (total < best_total) best_total = total, phi = ph;
    }
  }

  // Alternate: signs per pair given phi, then phi by angular synchronization.
  for (int iter = 0; iter < 50; ++iter) {
    int changes = 0;
    for (int m = 0; m < rows; ++m)
      for (int n = 0; n < cols; ++n) {
        if (!first_of_pair(m, n)) continue;
        const int po = pair.obs(m, n), pi = pair.inc(m, n);
        if (!rp.mask(m, n) || !rp.mask(po, pi)) continue;
        double cost[2][2];
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            cost[a][b] = std::abs(std::polar(1.0, phi(m) + (1 - 2 * a) * theta(m, n)) -
                                  std::polar(1.0, phi(po) + (1 - 2 * b) * theta(po, pi)));
        int ba = 0, bb = 0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            if (cost[a][b] < cost[ba][bb]) ba = a, bb = b;
        const int s1 = 1 - 2 * ba, s2 = 1 - 2 * bb;
        changes += (s1 != sign(m, n)) + (s2 != sign(po, pi));
        sign(m, n) = s1;
        sign(po, pi) = s2;
        // Per-entry decisiveness: best cost with this entry flipped.
        const double flip1 = std::min(cost[1 - ba][0], cost[1 - ba][1]);
        const double flip2 = std::min(cost[0][1 - bb], cost[1][1 - bb]);
        gap(m, n) = flip1 - cost[ba][bb];
        gap(po, pi) = flip2 - cost[ba][bb];
      }
    out.sign_updates += changes;
    if (changes == 0 && iter > 0) break;

    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(rows, rows);
    for (int m = 0; m < rows; ++m)
      for (int n = 0; n < cols; ++n) {
        if (!first_of_pair(m, n)) continue;
        const int po = pair.obs(m, n), pi = pair.inc(m, n);
        if (po == m) continue;
        const double w = std::min(weight(m, n), weight(po, pi));
        if (w <= 0) continue;
        const Complex e = std::polar(w, sign(po, pi) * theta(po, pi) - sign(m, n) * theta(m, n));
        H(m, po) += e;
        H(po, m) += std::conj(e);
      }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H);
    const Eigen::VectorXcd z = eig.eigenvectors().col(rows - 1);
    for (int m = 0; m < rows; ++m)
      if (std::abs(z(m)) > 0) phi(m) = std::arg(z(m));
  }

  // Orient the branch like the flood fill so that "direct" follows resolve_signs.
  double agree = 0;
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n)
      if (rp.mask(m, n))
        agree += weight(m, n) * std::abs(std::sin(theta(m, n))) *
                 (sign(m, n) == (rp.delta(m, n) < 0 ? -1 : 1) ? 1 : -1);
  if (agree < 0) {
    phi = -phi;
    sign = -sign;
  }

  // Entries reciprocity cannot orient: self-paired ones and near-ties.
  constexpr double kGapTol = 1e-3;
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(rows, cols);
  MaskMatrix known = MaskMatrix::Constant(rows, cols, false);
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      if (!rp.mask(m, n)) continue;
      const bool orientable = !pair.self_paired(m, n) && rp.mask(pair.obs(m, n), pair.inc(m, n));
      const bool irrelevant = std::abs(std::sin(theta(m, n))) < kGapTol;
      if ((orientable && gap(m, n) > kGapTol) || irrelevant) {
        F(m, n) = std::polar(A(m, n), phi(m) + sign(m, n) * theta(m, n));
        known(m, n) = true;
      }
    }
  const Torus grid{rows, cols, is_periodic(data.obs), is_periodic(data.inc)};
  // Predictions for entries reciprocity cannot orient. Full-aperture rows are
  // periodic and band limited, so a trigonometric row fit is used there; on
  // half apertures a local 2D patch fit.
  const bool periodic = grid.wrap_rows && grid.wrap_cols;
  std::vector<Eigen::VectorXcd> row_fit(rows);
  auto predictions = [&](int m, int n, std::vector<Complex>& preds) {
    preds.clear();
    if (periodic) {
      if (row_fit[m].size() == 0) {
        std::vector<bool> use(cols);
        for (int j = 0; j < cols; ++j) use[j] = known(m, j);
        row_fit[m] = trig_fit(data.inc.angles, F.row(m).transpose(), use, cols / 4);
      }
      preds.push_back(row_fit[m](n));
      return;
    }
    Complex p;
    if (local_predict(F, known, grid, m, n, p)) preds.push_back(p);
  };
  std::vector<Complex> preds;
  std::vector<std::pair<int, int>> pending;
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n)
      if (rp.mask(m, n) && !known(m, n)) pending.push_back({m, n});
  for (auto [m, n] : pending) {
    predictions(m, n, preds);
    const Complex p = std::polar(A(m, n), phi(m) + theta(m, n));
    const Complex q = std::polar(A(m, n), phi(m) - theta(m, n));
    double cp = 0, cq = 0;
    for (const Complex& v : preds) cp += std::abs(p - v), cq += std::abs(q - v);
    sign(m, n) = cp <= cq ? 1 : -1;
    F(m, n) = sign(m, n) > 0 ? p : q;
  }
  for (auto [m, n] : pending) known(m, n) = true;
  row_fit.assign(rows, Eigen::VectorXcd());

  // Masked entries: reciprocity partner first, then the local predictor's phase.
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n)
      if (!known(m, n) && known(pair.obs(m, n), pair.inc(m, n))) {
        F(m, n) = F(pair.obs(m, n), pair.inc(m, n));
        known(m, n) = true;
      }
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n) {
      if (known(m, n)) continue;
      predictions(m, n, preds);
      Complex v = 0;
      for (const Complex& p : preds) v += p;
      F(m, n) = std::abs(v) > 0 ? A(m, n) * v / std::abs(v) : Complex(A(m, n));
    }

  double worst = 0;
  for (int m = 0; m < rows; ++m)
    for (int n = 0; n < cols; ++n)
      if (rp.mask(m, n) && rp.mask(pair.obs(m, n), pair.inc(m, n)))
        worst = std::max(worst, std::abs(F(m, n) - F(pair.obs(m, n), pair.inc(m, n))));
  const double fmax = F.cwiseAbs().maxCoeff();
  out.consistency_residual = fmax > 0 ? worst / fmax : 0.0;
  if (out.consistency_residual > warn_residual) {
    std::ostringstream msg;
    msg << "reciprocity consistency residual " << out.consistency_residual << " exceeds "
        << warn_residual;
    out.warnings.push_back(msg.str());
  }

  out.phi = phi;
  out.direct.values = F;
  out.direct.obs = data.obs;
  out.direct.inc = data.inc;
  out.direct.k = data.k;
  out.conjugate = out.direct;
  out.conjugate.values = F.conjugate();
  return out;
}

std::string to_string(Branch b) { return b == Branch::Direct ? "direct" : "conjugate"; }

RecoveredField disambiguate_branch(const PhaseCandidates& c, const ReferenceBall& ball,
                                   double noise_level) {
  if (ball.center.norm() < 1e-12)
    fail(ErrorKind::Domain, "ball centered at the origin cannot separate the branches");
  const double rd = probe_ratio(c.direct, ball.center, noise_level);
  const double rc = probe_ratio(c.conjugate, ball.center, noise_level);
  RecoveredField rec;
  rec.report.probe_ratio_direct = rd;
  rec.report.probe_ratio_conjugate = rc;
  rec.report.consistency_residual = c.consistency_residual;
  rec.report.warnings = c.warnings;
  const bool direct = rd >= rc;
  const double chosen = direct ? rd : rc, other = direct ? rc : rd;
  if (!(chosen > 1.1 * other) || !(chosen > 1.0)) {
    std::ostringstream msg;
    msg << "unresolved branch: probe ratios direct " << rd << ", conjugate " << rc;
    throw Error(ErrorKind::Ambiguous, msg.str());
  }
  rec.branch = direct ? Branch::Direct : Branch::Conjugate;
  rec.F_rec = direct ? c.direct : c.conjugate;
  rec.branch_score_ratio = chosen;
  return rec;
}

namespace {

// Far-field column model described at fix_global_phase.
class BallModel {
 public:
  BallModel(const FarFieldMatrix& F, const ReferenceBall& ball, double R,
            const GaugeFixOptions& opts)
      : k_(F.k), b_(ball.center), rho_(ball.radius) {
    if (!is_periodic(F.obs)) fail(ErrorKind::Data, "ball model needs a full-aperture grid");
    if (!(b_.norm() - rho_ > R))
      fail(ErrorKind::Numerical,
           "global phase fix unavailable: |b| - rho must exceed the enclosing radius R");
    M_ = opts.order >= 0 ? opts.order : static_cast<int>(std::ceil(k_ * R)) + 12;
    Mb_ = opts.ball_order >= 0 ? opts.ball_order
                               : static_cast<int>(std::ceil(k_ * rho_)) + 15;
    const int N = F.obs.size();
    if (2 * M_ + 2 > N)
      fail(ErrorKind::Numerical, "origin expansion order " + std::to_string(M_) +
                                     " needs more than " + std::to_string(N) + " samples");
    const Complex base = std::sqrt(2.0 / (kPi * k_)) * std::polar(1.0, -kPi / 4);
    for (int l = -std::max(M_, Mb_); l <= std::max(M_, Mb_); ++l)
      kappa_.push_back(base * std::pow(Complex(0, -1), l));
    for (int j = -Mb_; j <= Mb_; ++j)
      ratio_.push_back(bessel_j(std::abs(j), k_ * rho_) / hankel1(std::abs(j), k_ * rho_));
    const double rb = b_.norm(), tb = std::atan2(b_.y(), b_.x());
    graf_.resize(2 * Mb_ + 1, 2 * M_ + 1);
    for (int j = -Mb_; j <= Mb_; ++j)
      for (int l = -M_; l <= M_; ++l)
        graf_(j + Mb_, l + M_) = hankel_any(l - j, k_ * rb) * std::polar(1.0, (l - j) * tb);
    // Far field of the ball's response to regular coefficients q_j.
    ball_ff_.resize(N, 2 * Mb_ + 1);
    for (int m = 0; m < N; ++m) {
      const Complex shift = std::exp(Complex(0, -k_ * F.obs.direction(m).dot(b_)));
      for (int j = -Mb_; j <= Mb_; ++j)
        ball_ff_(m, j + Mb_) =
            -shift * ratio_[j + Mb_] * kappa(j) * bandlimited_mode(j, F.obs.angles[m]);
    }
    Eigen::MatrixXcd origin_ff(N, 2 * M_ + 1);
    for (int m = 0; m < N; ++m)
      for (int l = -M_; l <= M_; ++l)
        origin_ff(m, l + M_) = kappa(l) * bandlimited_mode(l, F.obs.angles[m]);
    A_ = origin_ff + ball_ff_ * graf_;
    colscale_ = A_.colwise().norm().cwiseInverse().transpose();
    qr_.compute(A_ * colscale_.asDiagonal());
  }

  // Regular coefficients of c e^{ikx.d} about b.
  Eigen::VectorXcd incident_coeffs(const Point& d) const {
    Eigen::VectorXcd p(2 * Mb_ + 1);
    const double td = std::atan2(d.y(), d.x());
    const Complex phase = std::exp(Complex(0, k_ * b_.dot(d)));
    for (int j = -Mb_; j <= Mb_; ++j)
      p(j + Mb_) = phase * std::pow(Complex(0, 1), j) * std::polar(1.0, -j * td);
    return p;
  }
  Eigen::VectorXcd incident_farfield(const Point& d) const { return ball_ff_ * incident_coeffs(d); }

  Eigen::VectorXcd project_out(const Eigen::VectorXcd& v) const {
    return v - A_ * solve(v);
  }
  Eigen::VectorXcd solve(const Eigen::VectorXcd& v) const {
    return colscale_.asDiagonal() * qr_.solve(v);
  }
  const Eigen::MatrixXcd& matrix() const { return A_; }

  Complex field(const Eigen::VectorXcd& a, Complex c, const Point& d, const Point& x) const {
    Complex v = 0;
    const double r = x.norm(), t = std::atan2(x.y(), x.x());
    for (int l = -M_; l <= M_; ++l) v += a(l + M_) * hankel_any(l, k_ * r) * bandlimited_mode(l, t);
    const Eigen::VectorXcd q = c * incident_coeffs(d) + graf_ * a;
    const Point y = x - b_;
    const double ry = y.norm(), ty = std::atan2(y.y(), y.x());
    for (int j = -Mb_; j <= Mb_; ++j)
      v -= q(j + Mb_) * ratio_[j + Mb_] * hankel_any(j, k_ * ry) * bandlimited_mode(j, ty);
    return v;
  }

 private:
  Complex kappa(int l) const { return kappa_[l + std::max(M_, Mb_)]; }

  double k_;
  Point b_;
  double rho_;
  int M_ = 0, Mb_ = 0;
  std::vector<Complex> kappa_, ratio_;
  Eigen::MatrixXcd graf_, ball_ff_, A_;
  Eigen::VectorXd colscale_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr_;
};

}  // namespace

std::vector<Complex> continue_scattered_field(const FarFieldMatrix& F, int col,
                                              const ReferenceBall& ball, double R,
                                              const std::vector<Point>& points,
                                              const GaugeFixOptions& opts) {
  const BallModel model(F, ball, R, opts);
  const Point d = F.inc.direction(col);
  const Eigen::VectorXcd f = F.values.col(col);
  const Eigen::VectorXcd g = model.incident_farfield(d);
  const Eigen::VectorXcd pg = model.project_out(g);
  const Complex c = pg.dot(model.project_out(f)) / pg.squaredNorm();
  const Eigen::VectorXcd a = model.solve(f - c * g);
  std::vector<Complex> u;
  u.reserve(points.size());
  for (const Point& x : points) u.push_back(model.field(a, c, d, x));
  return u;
}

RecoveredField fix_global_phase(const RecoveredField& in, const ReferenceBall& ball, double R,
                                const GaugeFixOptions& opts) {
  const FarFieldMatrix& F = in.F_rec;
  const BallModel model(F, ball, R, opts);
  const int cols = F.inc.size();
  const int nd = std::clamp(opts.incidences, 1, cols);
  std::vector<int> used;
  for (int q = 0; q < nd; ++q) used.push_back(q * cols / nd);

  Complex num = 0;
  double den = 0;
  for (int col : used) {
    const Eigen::VectorXcd pg = model.project_out(model.incident_farfield(F.inc.direction(col)));
    num += pg.dot(model.project_out(F.values.col(col)));
    den += pg.squaredNorm();
  }
  if (!(den > 0)) fail(ErrorKind::Numerical, "ball response is invisible in the far field");
  const Complex c = num / den;  // data gauge
  if (std::abs(std::abs(c) - 1.0) > 0.05) {
    std::ostringstream msg;
    msg << "inconsistent gauge: |c| = " << std::abs(c) << " deviates from 1 by more than 5%";
    fail(ErrorKind::Numerical, msg.str());
  }
  const Complex unit = std::conj(c) / std::abs(c);

  const int np = std::max(8, opts.boundary_points);
  double res = 0, misfit = 0;
  for (int col : used) {
    const Point d = F.inc.direction(col);
    const Eigen::VectorXcd f = F.values.col(col);
    const Eigen::VectorXcd g = model.incident_farfield(d);
    const Eigen::VectorXcd a = model.solve(f - c * g);
    misfit = std::max(misfit, (f - c * g - model.matrix() * a).norm() / f.norm());
    for (int j = 0; j < np; ++j) {
      const double t = 2 * kPi * j / np;
      const Point x = ball.center + ball.radius * Point(std::cos(t), std::sin(t));
      const Complex ui = std::exp(Complex(0, F.k * d.dot(x)));
      res = std::max(res, std::abs(ui + unit * model.field(a, c, d, x)));
    }
  }

  RecoveredField out = in;
  out.F_rec.values *= unit;
  out.global_phase_fixed = true;
  out.report.gauge = unit;
  out.report.gauge_abs = std::abs(c);
  out.report.boundary_residual = res;
  out.report.fit_residual = misfit;
  return out;
}

RecoveredField recover(const PhaselessDataset& data, const ReferenceBall& ball) {
  const RelativePhaseField rp = resolve_signs(relative_phase(data));
  return disambiguate_branch(absolute_phase(rp, data), ball, data.noise_level);
}

void write_recovered(const std::string& path, const RecoveredField& rec, const Header& extra) {
  Header h = extra;
  h["branch"] = to_string(rec.branch);
  write_farfield_csv(path, rec.F_rec, h);
  std::ofstream out(path + ".meta");
  if (!out) fail(ErrorKind::Data, "cannot write " + path + ".meta");
  const RecoveryReport& r = rec.report;
  out << "branch=" << to_string(rec.branch) << '\n'
      << "branch_score_ratio=" << format_double(rec.branch_score_ratio) << '\n'
      << "probe_ratio_direct=" << format_double(r.probe_ratio_direct) << '\n'
      << "probe_ratio_conjugate=" << format_double(r.probe_ratio_conjugate) << '\n'
      << "consistency_residual=" << format_double(r.consistency_residual) << '\n'
      << "global_phase_fixed=" << (rec.global_phase_fixed ? "true" : "false") << '\n'
      << "gauge_re=" << format_double(r.gauge.real()) << '\n'
      << "gauge_im=" << format_double(r.gauge.imag()) << '\n'
      << "gauge_abs=" << format_double(r.gauge_abs) << '\n'
      << "boundary_residual=" << format_double(r.boundary_residual) << '\n'
      << "fit_residual=" << format_double(r.fit_residual) << '\n';
  for (const auto& [key, value] : extra) out << key << '=' << value << '\n';
  for (size_t i = 0; i < r.warnings.size(); ++i) out << "warning" << i << '=' << r.warnings[i] << '\n';
  if (!out) fail(ErrorKind::Data, "write failed for " + path + ".meta");
}

}  // namespace phaseless
