#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "phaseless/farfield.hpp"

namespace phaseless {

/// Intensity-only measurements for single plane waves and for superpositions
/// with a fixed second direction d0 taken from the incident grid.
struct PhaselessDataset {
  Eigen::MatrixXd mod_single;  // |F(xhat_m, d_n)|
  Eigen::VectorXd mod_ref;     // |F(xhat_m, d0)|
  Eigen::MatrixXd mod_super;   // |F(xhat_m, d_n) + F(xhat_m, d0)|
  int d0_index = 0;
  DirectionGrid obs, inc;
  double k = 1.0;
  double noise_level = 0.0;
  std::uint64_t seed = 0;

  Point d0() const { return inc.direction(d0_index); }
  void validate() const;
};

/// Moduli of F with optional multiplicative noise (1 + eps U[-1, 1]) drawn
/// from a seeded mt19937_64; the reference column is shared with mod_single.
PhaselessDataset synthesize_dataset(const FarFieldMatrix& F, int d0_index, double noise_level = 0.0,
                                    std::uint64_t seed = 0);
/// Same, with d0 given as a direction that must lie on the incident grid.
PhaselessDataset synthesize_dataset(const FarFieldMatrix& F, const Point& d0,
                                    double noise_level = 0.0, std::uint64_t seed = 0);

/// Far field of the scatterer shifted by z: F(xhat, d) e^{ik(d - xhat).z}.
FarFieldMatrix translate_farfield(const FarFieldMatrix& F, const Point& z);

/// max | |F_z(xhat,d) + F_z(xhat,d0)| - |F(xhat,d) + F(xhat,d0)| | over the grid.
double invariance_gap(const FarFieldMatrix& F, const Point& z, int d0_index);
/// The single-incidence analogue max | |F_z| - |F| |.
double single_invariance_gap(const FarFieldMatrix& F, const Point& z);

/// Max entrywise gap between two datasets on the same grids (all three parts).
double dataset_gap(const PhaselessDataset& a, const PhaselessDataset& b);

/// Writes <prefix>_single.csv, <prefix>_ref.csv and <prefix>_super.csv.
void write_dataset_csv(const std::string& prefix, const PhaselessDataset& data,
                       const Header& extra = {});
PhaselessDataset read_dataset_csv(const std::string& prefix, Header* header = nullptr);

}  // namespace phaseless
