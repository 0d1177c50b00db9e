#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phaseless/farfield.hpp"

namespace phaseless {

struct LsmResult {
  double g_norm = 0.0;
  double regularization = 0.0;
  double discrepancy = 0.0;  // ||A g - r|| / ||r||
};

/// Rectangular probe lattice, x fastest.
struct SamplingGrid {
  double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
  int nx = 2, ny = 2;

  Point point(int i, int j) const;
  void validate() const;
};

struct IndicatorMap {
  SamplingGrid grid;
  Eigen::MatrixXd values;          // (j, i) = 1/||g_z||, row j is y
  Eigen::MatrixXd regularization;
  Eigen::MatrixXd discrepancy;

  /// values / max(values).
  Eigen::MatrixXd normalized() const;
  /// log(values) mapped affinely onto [0, 1]; superlevel sets use this scale.
  Eigen::MatrixXd log_normalized() const;
  /// Cells with log_normalized() >= level.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> superlevel(double level) const;
  /// Value of `m` at the lattice cell nearest to p; p must lie inside the grid box.
  static double sample(const Eigen::MatrixXd& m, const SamplingGrid& grid, const Point& p);
};

/// Far-field equation A g = r with A = F times the incident quadrature weight,
/// solved by Tikhonov regularization with the Morozov parameter. The SVD is
/// computed once; solve() is O(N^2) per probe.
class LsmOperator {
 public:
  explicit LsmOperator(const FarFieldMatrix& F);

  LsmResult solve(const Point& z, double noise_level = 0.0) const;
  Eigen::VectorXcd test_farfield(const Point& z) const;
  bool half_aperture() const { return half_; }
  const Eigen::VectorXd& singular_values() const { return sigma_; }

 private:
  Eigen::MatrixXcd U_;
  Eigen::VectorXd sigma_;
  std::vector<Point> xhat_;
  double k_ = 1.0;
  bool half_ = false;
};

LsmResult lsm_solve(const FarFieldMatrix& F, const Point& z, double noise_level = 0.0);
IndicatorMap indicator_map(const FarFieldMatrix& F, const SamplingGrid& grid,
                           double noise_level = 0.0);
/// indicator(b) / indicator(-b).
double probe_ratio(const FarFieldMatrix& F, const Point& b, double noise_level = 0.0);
double probe_ratio(const LsmOperator& op, const Point& b, double noise_level = 0.0);

/// Rows "i,j,x,y,value,regularization,discrepancy" after "# key=value" lines.
void write_indicator_csv(const std::string& path, const IndicatorMap& map,
                         const Header& extra = {});
/// Grayscale heatmap of the normalized values; pixel (i, j) is drawn at
/// column i and row ny-1-j so that +y points up. `extra` goes into comments.
void write_indicator_svg(const std::string& path, const IndicatorMap& map, int cell_px = 6,
                         const Header& extra = {});

}  // namespace phaseless
