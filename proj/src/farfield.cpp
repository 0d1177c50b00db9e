#include "phaseless/farfield.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phaseless/error.hpp"

namespace phaseless {

DirectionGrid DirectionGrid::uniform(int n) {
  if (n < 1) fail(ErrorKind::Domain, "direction grid needs at least one angle");
  DirectionGrid g;
  for (int m = 0; m < n; ++m) g.angles.push_back(2 * kPi * m / n);
  return g;
}

DirectionGrid DirectionGrid::upper(int n) {
  if (n < 1) fail(ErrorKind::Domain, "direction grid needs at least one angle");
  DirectionGrid g;
  for (int m = 0; m < n; ++m) g.angles.push_back(kPi * (m + 0.5) / n);
  return g;
}

DirectionGrid DirectionGrid::lower(int n) {
  if (n < 1) fail(ErrorKind::Domain, "direction grid needs at least one angle");
  DirectionGrid g;
  for (int m = 0; m < n; ++m) g.angles.push_back(kPi + kPi * (m + 0.5) / n);
  return g;
}

Point DirectionGrid::direction(int i) const {
  return Point(std::cos(angles.at(i)), std::sin(angles.at(i)));
}

int DirectionGrid::find(double angle, double tol) const {
  for (int i = 0; i < size(); ++i)
    if (std::abs(std::remainder(angles[i] - angle, 2 * kPi)) <= tol) return i;
  return -1;
}

void DirectionGrid::validate() const {
  if (angles.empty()) fail(ErrorKind::Data, "empty direction grid");
  for (size_t i = 0; i < angles.size(); ++i) {
    if (!std::isfinite(angles[i])) fail(ErrorKind::Data, "non-finite grid angle");
    if (i && !(angles[i] > angles[i - 1]))
      fail(ErrorKind::Data, "grid angles must be strictly increasing");
  }
}

void FarFieldMatrix::validate() const {
  obs.validate();
  inc.validate();
  if (values.rows() != obs.size() || values.cols() != inc.size())
    fail(ErrorKind::Data, "far-field matrix shape does not match its grids");
  if (!values.allFinite()) fail(ErrorKind::Data, "far-field matrix has non-finite entries");
  if (!(k > 0) || !std::isfinite(k)) fail(ErrorKind::Data, "far-field matrix has invalid k");
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0;
  const char* b = s.data();
  while (b < s.data() + s.size() && *b == ' ') ++b;
  auto res = std::from_chars(b, s.data() + s.size(), v);
  if (res.ec != std::errc()) fail(ErrorKind::Data, "cannot parse number '" + s + "'");
  return v;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) v.push_back(parse_double(item));
  return v;
}

Header read_header(std::istream& in) {
  Header h;
  while (in.peek() == '#') {
    std::string line;
    std::getline(in, line);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto key = line.substr(1, eq - 1);
    key.erase(0, key.find_first_not_of(' '));
    h[key] = line.substr(eq + 1);
  }
  return h;
}

void write_farfield_csv(const std::string& path, const FarFieldMatrix& F, const Header& extra) {
  F.validate();
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Data, "cannot write " + path);
  out << "# k=" << format_double(F.k) << '\n';
  out << "# obs=" << format_list(F.obs.angles) << '\n';
  out << "# inc=" << format_list(F.inc.angles) << '\n';
  for (const auto& [key, value] : extra)
    if (key != "k" && key != "obs" && key != "inc") out << "# " << key << '=' << value << '\n';
  out << "m,n,re,im\n";
  for (int m = 0; m < F.values.rows(); ++m)
    for (int n = 0; n < F.values.cols(); ++n)
      out << m << ',' << n << ',' << format_double(F.values(m, n).real()) << ','
          << format_double(F.values(m, n).imag()) << '\n';
  if (!out) fail(ErrorKind::Data, "write failed for " + path);
}

FarFieldMatrix read_farfield_csv(const std::string& path, Header* header) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Data, "cannot read " + path);
  Header h = read_header(in);
  for (const char* key : {"k", "obs", "inc"})
    if (!h.count(key)) fail(ErrorKind::Data, path + ": missing header '" + key + "'");
  FarFieldMatrix F;
  F.k = parse_double(h["k"]);
  F.obs.angles = parse_list(h["obs"]);
  F.inc.angles = parse_list(h["inc"]);
  F.values = Eigen::MatrixXcd::Constant(F.obs.size(), F.inc.size(),
                                        Complex(std::nan(""), 0.0));
  std::string line;
  std::getline(in, line);  // column names
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, re, im;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, re, ',');
    std::getline(ss, im, ',');
    const int m = static_cast<int>(parse_double(a)), n = static_cast<int>(parse_double(b));
    if (m < 0 || n < 0 || m >= F.obs.size() || n >= F.inc.size())
      fail(ErrorKind::Data, path + ": row index out of range");
    F.values(m, n) = Complex(parse_double(re), parse_double(im));
  }
  F.validate();
  if (header) *header = h;
  return F;
}

}  // namespace phaseless
