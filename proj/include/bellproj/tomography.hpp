#pragma once

// Simulated state readout and linear-inversion reconstruction.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bellproj/pulse_engine.hpp"
#include "bellproj/quantum_core.hpp"

namespace bellproj {

/// Every rotation is followed by a measurement of every observable; records
/// are ordered rotation-major.
struct ReadoutSet {
  std::vector<PulseSequence> rotations;
  std::vector<Operator> observables;

  std::size_t size() const { return rotations.size() * observables.size(); }
};

struct MeasurementRecord {
  std::vector<double> values;
  double noise_sigma = 0.0;
};

/// Per-spin {identity, 90x, 90y} in all 9 combinations, each followed by
/// s1z, s2z and s1z s2z: 27 records.
ReadoutSet default_readout_set();

/// Real matrix mapping the 16 Pauli coefficients c_k of rho = sum c_k P_k / 4
/// to the records, with a final row for Tr(rho) = c_0.
Eigen::MatrixXd measurement_map(const ReadoutSet& rs, const SpinSystem& sys);

/// Numerical rank of the measurement map including the trace row.
int readout_rank(const ReadoutSet& rs, const SpinSystem& sys);

/// values[k] = Tr(O_k U_k rho U_k^dagger) + N(0, noise_sigma^2).
MeasurementRecord simulate_readout(const DensityMatrix& rho, const ReadoutSet& rs, const SpinSystem& sys,
                                   double noise_sigma, std::uint64_t seed);

/// Unconstrained least-squares estimate (unit trace, Hermitian, possibly not PSD).
Operator least_squares_estimate(const MeasurementRecord& rec, const ReadoutSet& rs, const SpinSystem& sys);

/// Frobenius-nearest unit-trace PSD matrix: eigenvalues projected onto the
/// probability simplex, eigenvectors kept.
DensityMatrix nearest_density_matrix(const Operator& estimate);

/// Eigenvalues clipped at zero and renormalised.
DensityMatrix clip_to_density_matrix(const Operator& estimate);

/// Least-squares inversion followed by nearest_density_matrix. Throws
/// RankDeficient when the readout set is not informationally complete.
DensityMatrix reconstruct(const MeasurementRecord& rec, const ReadoutSet& rs, const SpinSystem& sys);

struct BarRow {
  std::string row;
  std::string col;
  double re;
  double im;
};

struct BarTable {
  std::string basis;
  std::vector<BarRow> rows;
};

/// All entries of rho in the multiplicative basis or, when given, in `basis`
/// (labelled Phi+, Phi-, Psi+, Psi- for the Bell transform).
BarTable bar_export(const DensityMatrix& rho, const std::optional<BasisTransform>& basis = std::nullopt);

/// Comma-separated with header basis,row,col,re,im.
std::string to_csv(const BarTable& table);

}  // namespace bellproj
