#include "phaseless/phaseless.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "phaseless/error.hpp"

namespace phaseless {

void PhaselessDataset::validate() const {
  obs.validate();
  inc.validate();
  if (mod_single.rows() != obs.size() || mod_single.cols() != inc.size() ||
      mod_super.rows() != obs.size() || mod_super.cols() != inc.size() ||
      mod_ref.size() != obs.size())
    fail(ErrorKind::Data, "dataset shapes do not match its grids");
  if (d0_index < 0 || d0_index >= inc.size()) fail(ErrorKind::Data, "d0 index outside the grid");
  if (!mod_single.allFinite() || !mod_super.allFinite() || !mod_ref.allFinite())
    fail(ErrorKind::Data, "dataset has non-finite entries");
  if ((mod_single.array() < 0).any() || (mod_super.array() < 0).any() || (mod_ref.array() < 0).any())
    fail(ErrorKind::Data, "dataset has negative moduli");
}

PhaselessDataset synthesize_dataset(const FarFieldMatrix& F, int d0_index, double noise_level,
                                    std::uint64_t seed) {
  F.validate();
  if (d0_index < 0 || d0_index >= F.inc.size())
    fail(ErrorKind::Data, "d0 must lie on the incident grid");
  if (!(noise_level >= 0) || !std::isfinite(noise_level))
    fail(ErrorKind::Domain, "noise level must be nonnegative");
  PhaselessDataset D;
  D.obs = F.obs;
  D.inc = F.inc;
  D.k = F.k;
  D.d0_index = d0_index;
  D.noise_level = noise_level;
  D.seed = seed;
  D.mod_single = F.values.cwiseAbs();
  D.mod_super.resize(F.values.rows(), F.values.cols());
  for (int n = 0; n < F.values.cols(); ++n)
    D.mod_super.col(n) = (F.values.col(n) + F.values.col(d0_index)).cwiseAbs();
  if (noise_level > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int n = 0; n < D.mod_single.cols(); ++n)
      for (int m = 0; m < D.mod_single.rows(); ++m) D.mod_single(m, n) *= 1 + noise_level * U(rng);
    for (int n = 0; n < D.mod_super.cols(); ++n)
      for (int m = 0; m < D.mod_super.rows(); ++m) D.mod_super(m, n) *= 1 + noise_level * U(rng);
    D.mod_single = D.mod_single.cwiseMax(0.0);
    D.mod_super = D.mod_super.cwiseMax(0.0);
  }
  D.mod_ref = D.mod_single.col(d0_index);
  return D;
}

PhaselessDataset synthesize_dataset(const FarFieldMatrix& F, const Point& d0, double noise_level,
                                    std::uint64_t seed) {
  const int idx = F.inc.find(std::atan2(d0.y(), d0.x()));
  if (idx < 0) fail(ErrorKind::Data, "d0 is not on the incident grid");
  return synthesize_dataset(F, idx, noise_level, seed);
}

FarFieldMatrix translate_farfield(const FarFieldMatrix& F, const Point& z) {
  FarFieldMatrix G = F;
  for (int n = 0; n < F.inc.size(); ++n) {
    const Point d = F.inc.direction(n);
    for (int m = 0; m < F.obs.size(); ++m)
      G.values(m, n) *= std::exp(Complex(0.0, F.k * (d - F.obs.direction(m)).dot(z)));
  }
  return G;
}

double invariance_gap(const FarFieldMatrix& F, const Point& z, int d0_index) {
  if (d0_index < 0 || d0_index >= F.inc.size()) fail(ErrorKind::Data, "d0 index outside the grid");
  const FarFieldMatrix G = translate_farfield(F, z);
  double gap = 0;
  for (int n = 0; n < F.inc.size(); ++n)
    for (int m = 0; m < F.obs.size(); ++m)
      gap = std::max(gap, std::abs(std::abs(G.values(m, n) + G.values(m, d0_index)) -
                                   std::abs(F.values(m, n) + F.values(m, d0_index))));
  return gap;
}

double single_invariance_gap(const FarFieldMatrix& F, const Point& z) {
  const FarFieldMatrix G = translate_farfield(F, z);
  return (G.values.cwiseAbs() - F.values.cwiseAbs()).cwiseAbs().maxCoeff();
}

double dataset_gap(const PhaselessDataset& a, const PhaselessDataset& b) {
  if (a.mod_single.rows() != b.mod_single.rows() || a.mod_single.cols() != b.mod_single.cols())
    fail(ErrorKind::Data, "datasets live on different grids");
  double g = (a.mod_single - b.mod_single).cwiseAbs().maxCoeff();
  g = std::max(g, (a.mod_super - b.mod_super).cwiseAbs().maxCoeff());
  return std::max(g, (a.mod_ref - b.mod_ref).cwiseAbs().maxCoeff());
}

namespace {

void write_common_header(std::ofstream& out, const PhaselessDataset& D, const Header& extra) {
  out << "# k=" << format_double(D.k) << "\n# obs=" << format_list(D.obs.angles)
      << "\n# inc=" << format_list(D.inc.angles) << "\n# d0_index=" << D.d0_index
      << "\n# noise_level=" << format_double(D.noise_level) << "\n# seed=" << D.seed << '\n';
  for (const auto& [key, value] : extra) out << "# " << key << '=' << value << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write " + path);
  return out;
}

std::vector<std::vector<std::string>> read_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) cells.push_back(item);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

void write_dataset_csv(const std::string& prefix, const PhaselessDataset& D, const Header& extra) {
  D.validate();
  {
    auto out = open_out(prefix + "_single.csv");
    write_common_header(out, D, extra);
    out << "m,n,modulus\n";
    for (int m = 0; m < D.mod_single.rows(); ++m)
      for (int n = 0; n < D.mod_single.cols(); ++n)
        out << m << ',' << n << ',' << format_double(D.mod_single(m, n)) << '\n';
  }
  {
    auto out = open_out(prefix + "_ref.csv");
    write_common_header(out, D, extra);
    out << "m,modulus\n";
    for (int m = 0; m < D.mod_ref.size(); ++m) out << m << ',' << format_double(D.mod_ref[m]) << '\n';
  }
  {
    auto out = open_out(prefix + "_super.csv");
    write_common_header(out, D, extra);
    out << "m,n,modulus\n";
    for (int m = 0; m < D.mod_super.rows(); ++m)
      for (int n = 0; n < D.mod_super.cols(); ++n)
        out << m << ',' << n << ',' << format_double(D.mod_super(m, n)) << '\n';
  }
}

PhaselessDataset read_dataset_csv(const std::string& prefix, Header* header) {
  PhaselessDataset D;
  Header first;
  for (const char* part : {"_single.csv", "_ref.csv", "_super.csv"}) {
    const std::string path = prefix + part;
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Data, "cannot read " + path);
    Header h = read_header(in);
    for (const char* key : {"k", "obs", "inc", "d0_index", "noise_level", "seed"})
      if (!h.count(key)) fail(ErrorKind::Data, path + ": missing header '" + key + "'");
    if (first.empty()) {
      first = h;
      D.k = parse_double(h["k"]);
      D.obs.angles = parse_list(h["obs"]);
      D.inc.angles = parse_list(h["inc"]);
      D.d0_index = std::stoi(h["d0_index"]);
      D.noise_level = parse_double(h["noise_level"]);
      D.seed = std::stoull(h["seed"]);
      D.mod_single = Eigen::MatrixXd::Constant(D.obs.size(), D.inc.size(), std::nan(""));
      D.mod_super = D.mod_single;
      D.mod_ref = Eigen::VectorXd::Constant(D.obs.size(), std::nan(""));
    } else {
      for (const char* key : {"k", "obs", "inc", "d0_index", "noise_level", "seed"})
        if (h[key] != first[key]) fail(ErrorKind::Data, path + ": header '" + key + "' disagrees");
      if (h.count("config_hash") != first.count("config_hash") ||
          (h.count("config_hash") && h["config_hash"] != first["config_hash"]))
        fail(ErrorKind::Data, path + ": files come from different configurations");
    }
    for (const auto& row : read_rows(in)) {
      const int m = std::stoi(row.at(0));
      if (m < 0 || m >= D.obs.size()) fail(ErrorKind::Data, path + ": row index out of range");
      if (std::string(part) == "_ref.csv") {
        D.mod_ref[m] = parse_double(row.at(1));
        continue;
      }
      const int n = std::stoi(row.at(1));
      if (n < 0 || n >= D.inc.size()) fail(ErrorKind::Data, path + ": column index out of range");
      (std::string(part) == "_single.csv" ? D.mod_single : D.mod_super)(m, n) = parse_double(row.at(2));
    }
  }
  D.validate();
  if (header) *header = first;
  return D;
}

}  // namespace phaseless
