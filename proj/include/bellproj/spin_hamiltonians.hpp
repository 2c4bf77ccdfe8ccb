#pragma once

// Two-spin Hamiltonians: Zeeman offsets, secular dipolar coupling, the
// double-quantum operator and Hamiltonians with prescribed Bell eigenstates.
// Every returned operator is in rad/s; Hz inputs go through hz_to_rad_s().

#include <array>
#include <string_view>
#include <vector>

#include "bellproj/quantum_core.hpp"

namespace bellproj {

/// Bell basis order used everywhere: Phi+, Phi-, Psi+, Psi-.
enum class BellState { phi_plus = 0, phi_minus = 1, psi_plus = 2, psi_minus = 3 };

inline constexpr std::array<BellState, 4> kBellStates = {BellState::phi_plus, BellState::phi_minus,
                                                          BellState::psi_plus, BellState::psi_minus};

std::string_view bell_label(BellState s);

enum class CouplingModel {
  /// sigma1z sigma2z - (sigma1x sigma2x + sigma1y sigma2y)/2, the secular dipolar form.
  dipolar,
  /// sigma1z sigma2z only: the weak-coupling limit where the shift difference
  /// truncates the flip-flop term.
  weak_zz,
};

struct SpinSystem {
  double shift_1_hz = 0.0;
  double shift_2_hz = 0.0;
  /// Observed doublet splitting produced by the coupling.
  double splitting_hz = 353.0;
  CouplingModel coupling = CouplingModel::dipolar;
  int n_spins = 2;

  /// Throws InvalidArgument unless splitting > 0, n_spins == 2 and all fields finite.
  void validate() const;
};

/// Target eigenvalues (rad/s) for Phi+, Phi-, Psi+, Psi-.
struct BellSpectrum {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  std::array<double, 4> values() const { return {a, b, c, d}; }
};

double hz_to_rad_s(double hz);

/// Coupling strength omega_d (rad/s) multiplying the dimensionless coupling
/// operator so that each spin shows a doublet split by `splitting_hz`.
///
/// For two spins with distinct offsets, the secular dipolar Hamiltonian
/// omega_d [s1z s2z - (s1x s2x + s1y s2y)/2] gives single-quantum lines at
/// pi(v1+v2) +- R +- 2 omega_d with R = sqrt(pi^2 (v1-v2)^2 + omega_d^2),
/// so the intra-doublet spacing is 4 omega_d rad/s = 2 omega_d / pi Hz at any
/// offset difference. The weak_zz model has the same spacing.
double coupling_rad_s(double splitting_hz);

Vector bell_vector(BellState s);

/// Columns are Phi+, Phi-, Psi+, Psi- in the multiplicative basis.
BasisTransform bell_transform();

/// Pauli-operator construction: eigenpairs (a, Phi+), (b, Phi-), (c, Psi+), (d, Psi-).
Operator bell_hamiltonian(const BellSpectrum& s);

/// Independent construction B diag(a, b, c, d) B^dagger used as a cross-check.
Operator bell_hamiltonian_by_transform(const BellSpectrum& s);

Operator h_dipolar_zz();
Operator h_dipolar_xx();
Operator h_dipolar_yy();
/// H_xx - H_yy = (3/2)(s1x s2x - s1y s2y).
Operator h_double_quantum();

/// Free-evolution generator: pi v1 s1z + pi v2 s2z + omega_d * coupling.
Operator internal_hamiltonian(const SpinSystem& sys);

/// Bell Hamiltonian for the parameter choice b = -a, d = 0.
Operator eq3_hamiltonian(double a, double c);

struct SpectralLine {
  double frequency_hz;
  double intensity;
};

/// Single-quantum transitions of h observed through the total lowering
/// operator, sorted by frequency; lines weaker than `min_intensity` dropped.
std::vector<SpectralLine> single_quantum_lines(const Operator& h, double min_intensity = 1e-6);

}  // namespace bellproj
