#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phaseless/specfun.hpp"

namespace phaseless {

/// Strictly increasing direction angles (radians).
struct DirectionGrid {
  std::vector<double> angles;

  /// theta_m = 2 pi m / n.
  static DirectionGrid uniform(int n);
  /// Upward half circle, theta_m = pi (m + 1/2) / n.
  static DirectionGrid upper(int n);
  /// Downward half circle, theta_m = pi + pi (m + 1/2) / n.
  static DirectionGrid lower(int n);

  int size() const { return static_cast<int>(angles.size()); }
  Point direction(int i) const;
  /// Index of the grid angle equal to `angle` (mod 2 pi) within tol, or -1.
  int find(double angle, double tol = 1e-9) const;
  void validate() const;
};

/// Far-field samples values(m, n) = u_inf(xhat_m, d_n).
struct FarFieldMatrix {
  Eigen::MatrixXcd values;
  DirectionGrid obs, inc;
  double k = 1.0;

  void validate() const;
};

using Header = std::map<std::string, std::string>;

/// Writes "# key=value" header lines, then "m,n,re,im" rows (round-trip precision).
void write_farfield_csv(const std::string& path, const FarFieldMatrix& F,
                        const Header& extra = {});
FarFieldMatrix read_farfield_csv(const std::string& path, Header* header = nullptr);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

/// Comma-joined round-trip list and its inverse.
std::string format_list(const std::vector<double>& v);
std::vector<double> parse_list(const std::string& s);

/// Reads "# key=value" lines at the top of a stream-backed file.
Header read_header(std::istream& in);

}  // namespace phaseless
