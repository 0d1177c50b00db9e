#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phaseless/farfield.hpp"
#include "phaseless/geometry.hpp"
#include "phaseless/incident.hpp"

namespace phaseless {

/// Contrast m = n - 1 sampled on the lattice of squares [i h, (i+1) h] x [j h, (j+1) h].
/// Source cells carry nonzero contrast; unknowns are the source cells followed
/// by a one-cell ghost ring, so every source cell has a full 3x3 stencil.
struct MediumGrid {
  double h = 0.0;
  std::vector<int> ci, cj;          // source cells
  std::vector<Complex> contrast;    // exact cell average of m
  std::vector<int> ui, uj;          // unknown cells; the first size() are the source cells
  int size() const { return static_cast<int>(contrast.size()); }
  int unknowns() const { return static_cast<int>(ui.size()); }
  Point center(int c) const { return Point((ui[c] + 0.5) * h, (uj[c] + 0.5) * h); }
};

/// Cell averages of m from the exact region geometry (curves are clipped
/// against each cell, not sampled).
MediumGrid build_medium_grid(const Scene& scene, double h);

struct TotalField {
  Eigen::VectorXcd values;              // u at the unknown cell centers
  std::vector<double> residual_history; // relative residual per iteration
  int iterations = 0;
};

struct GmresOptions {
  double tolerance = 1e-10;
  int restart = 60;
  int max_iterations = 3000;
};

/// Collocation solver for u = u_i + k^2 int Phi(., y) m(y) u(y) dy.
class MediumSolver {
 public:
  MediumSolver(const Scene& scene, const Wavenumber& k, double h, GmresOptions opts = {});

  TotalField solve_ls(const IncidentField& incident) const;
  Complex far_field_medium(const TotalField& u, const Point& xhat) const;
  Eigen::VectorXcd far_field_medium(const TotalField& u, const DirectionGrid& obs) const;
  FarFieldMatrix multistatic(const DirectionGrid& obs, const DirectionGrid& inc) const;

  const MediumGrid& grid() const;
  double k() const { return k_; }

  struct Impl;

 private:
  double k_;
  GmresOptions opts_;
  std::shared_ptr<const Impl> impl_;
};

/// Restarted GMRES; throws a Numerical error with the residual history on failure.
Eigen::VectorXcd gmres(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b,
                       const GmresOptions& opts, std::vector<double>* history = nullptr);

/// Far field of a homogeneous disk (radius a, index n, centered at the origin).
Complex penetrable_disk_far_field(double k, double a, double n, double obs_angle,
                                  double inc_angle, int terms = -1);

/// Raster CSV: "# x0=", "# y0=", "# h=", "# nx=", "# ny=" header, then i,j,re,im rows.
MediumRaster read_medium_raster(const std::string& path);
void write_medium_raster(const std::string& path, const MediumRaster& raster);

}  // namespace phaseless
