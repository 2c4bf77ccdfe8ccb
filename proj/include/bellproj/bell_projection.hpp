#pragma once

// Non-unitary projection onto the eigenbasis of an engineered Hamiltonian by
// averaging unitary evolutions: the forward / time-reversed pair for two
// levels, and evolution-time arrays for the general case.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bellproj/pulse_engine.hpp"
#include "bellproj/quantum_core.hpp"

namespace bellproj {

struct ProjectionVariant {
  PulseSequence sequence;
  double weight = 0.0;
};

struct ProjectionScheme {
  std::vector<ProjectionVariant> variants;
  std::string description;

  /// Throws InvalidArgument unless >= 2 variants, positive weights summing to 1.
  void validate() const;
};

struct TimeArray {
  std::vector<double> times_s;
  /// max over targeted gaps of |sum_k exp(i gap t_k)| / N.
  double residual = 0.0;
};

struct TimeArrayOptions {
  /// Number of trial spacings in the arithmetic-grid scan.
  int grid_candidates = 200000;
  /// Coordinate-refinement sweeps in the randomized fallback.
  int refinement_budget = 4000;
  std::uint64_t seed = 20070901;
};

inline constexpr double kDegenerateEigenvalueTolerance = 1e-9;
inline constexpr double kDegenerateGapTolerance = 1e-6;

/// t = (pi/2) / |lambda1 - lambda2|.
double solve_projection_time(double lambda1_rad_s, double lambda2_rad_s);

/// Equal-weight pair {forward, every pulse phase shifted by pi/2}.
ProjectionScheme canonical_two_variant(const PulseSequence& forward);

/// sum_k w_k U_k rho U_k^dagger with U_k the full propagator of variant k.
DensityMatrix project_two_variant(const DensityMatrix& rho, const ProjectionScheme& scheme, const SpinSystem& sys);

/// Residual of a time array against every pairwise gap of the spectrum.
double time_array_residual(const std::vector<double>& times_s, const std::vector<double>& spectrum_rad_s);

/// Finds n_times evolution times whose phase averages cancel every pairwise
/// coherence to below tol. Arithmetic grids t_k = k s are scanned first; a
/// seeded coordinate refinement follows if no grid qualifies.
TimeArray compute_time_array(const std::vector<double>& spectrum_rad_s, int n_times, double tol,
                             const TimeArrayOptions& options = {});

/// Same search restricted to an explicit list of coherence gaps, for
/// spectra whose remaining levels are degenerate and left untouched.
TimeArray compute_time_array_for_gaps(const std::vector<double>& gaps_rad_s, int n_times, double tol,
                                      const TimeArrayOptions& options = {});

/// (1/N) sum_k exp(-i h t_k) rho exp(i h t_k).
DensityMatrix project_general(const DensityMatrix& rho, const Operator& h, const TimeArray& ta);

}  // namespace bellproj
