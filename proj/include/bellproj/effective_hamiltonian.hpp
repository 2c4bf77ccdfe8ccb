#pragma once

// Effective (average) Hamiltonian of a pulse cycle: exact generator from the
// cycle propagator, its Bell-labelled eigen-decomposition, and the
// zeroth-order toggling-frame average used as an independent oracle.

#include <array>

#include "bellproj/pulse_engine.hpp"
#include "bellproj/quantum_core.hpp"
#include "bellproj/spin_hamiltonians.hpp"

namespace bellproj {

struct EffectiveHamiltonian {
  Operator h_eff = Operator::zero(4);
  double cycle_time_s = 0.0;
  /// Indexed by BellState: eigenvalue assigned to Phi+, Phi-, Psi+, Psi-.
  std::array<double, 4> eigenvalues{};
  std::array<Vector, 4> eigenvectors{};
  /// |<Bell_k|v_k>|^2 for the assigned pairing.
  std::array<double, 4> bell_overlaps{};

  double eigenvalue(BellState s) const { return eigenvalues[static_cast<int>(s)]; }
  double overlap(BellState s) const { return bell_overlaps[static_cast<int>(s)]; }
  /// |lambda(Phi+) - lambda(Phi-)|.
  double phi_gap() const;
};

/// Degenerate-eigenvalue clustering threshold, rad/s.
inline constexpr double kDegeneracyTolerance = 1e-6;
/// Two overlaps closer than this make a Bell assignment ambiguous.
inline constexpr double kAssignmentTolerance = 1e-9;

/// Eigen-decomposes a 4x4 Hermitian operator and labels each eigenpair with
/// the Bell vector of maximal overlap. Inside a degenerate cluster the
/// eigenvectors are first rotated onto the closest Bell vectors.
EffectiveHamiltonian label_by_bell_overlap(const Operator& h, double cycle_time_s);

/// h_eff = unitary_log(one-cycle propagator, cycle time), Bell-labelled.
EffectiveHamiltonian extract_effective(const PulseSequence& seq, const SpinSystem& sys);

/// Time-weighted mean of U_rf^dagger(t) H_int U_rf(t) over one cycle of a
/// delta-pulse sequence. Throws FinitePulse for finite-width pulses.
Operator magnus_zeroth(const PulseSequence& seq, const SpinSystem& sys);

/// min_s ||h - target - s I||_F / ||target||_F.
double distance_to_target(const Operator& h, const Operator& target);
double distance_to_target(const EffectiveHamiltonian& e, const Operator& target);

}  // namespace bellproj
