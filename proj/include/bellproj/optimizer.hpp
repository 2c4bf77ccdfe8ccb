#pragma once

// Derivative-free tuning of eight-pulse cycle parameters against a target
// effective Hamiltonian or Bell-state eigenvector fidelities, and the
// evolution-time condition t |lambda1 - lambda2| = pi/2.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellproj/effective_hamiltonian.hpp"
#include "bellproj/pulse_engine.hpp"

namespace bellproj {

enum class ObjectiveKind { hamiltonian_distance, state_infidelity, weighted_mix };

/// `path` is one of "delays[0]" .. "delays[8]", "phases[0]" .. "phases[7]" or "pulse_width".
struct FreeParameter {
  std::string path;
  double lower = 0.0;
  double upper = 0.0;
};

struct OptimizationProblem {
  EightPulseCycleSpec base_spec;
  std::vector<FreeParameter> free_parameters;
  /// Required for hamiltonian_distance and weighted_mix.
  Operator target = Operator::zero(4);
  SpinSystem system;
  ObjectiveKind objective = ObjectiveKind::hamiltonian_distance;
  /// Weights of the Hamiltonian distance and of the timing error in
  /// weighted_mix; the state infidelity gets 1 - mix_weight - timing_weight.
  double mix_weight = 0.5;
  double timing_weight = 0.0;
  /// Setting delays[k] also sets delays[8 - k].
  bool mirror_symmetric = false;
  /// Number of cycles meant to satisfy t |lambda1 - lambda2| = pi/2. Without
  /// a fixed cycle time every candidate's delays are rescaled until they do;
  /// with one, the relative mismatch is the timing error of weighted_mix.
  int timing_repeat = 0;
  /// When > 0, candidates whose (timed) cycle is longer than this are
  /// rejected with objective +inf.
  double max_cycle_time_s = 0.0;
  /// When > 0, every candidate's delays are scaled proportionally so that
  /// one cycle lasts exactly this long.
  double fixed_cycle_time_s = 0.0;

  void validate() const;
};

/// Every delay is scaled by the default nine-delay parameter set:
/// delays[0..8] bounded to [lower_fraction, upper_fraction] x base value.
std::vector<FreeParameter> default_delay_parameters(const EightPulseCycleSpec& base, double lower_fraction,
                                                    double upper_fraction, bool mirror_symmetric);

struct CycleTiming {
  int repeat = 1;
  double total_time_s = 0.0;
  double cycle_time_s = 0.0;
  /// Factor by which the cycle time has to change so that `repeat` cycles
  /// last exactly total_time_s.
  double scale = 1.0;
};

/// Number of cycles and total time with total_time |lambda1 - lambda2| = pi/2.
CycleTiming solve_two_cycle_timing(const EffectiveHamiltonian& e);

/// Rescales the delays (pulse width fixed) until `repeat` cycles of the
/// rescaled spec satisfy the pi/2 condition with its own eigenvalue gap.
EightPulseCycleSpec fit_cycle_timing(const EightPulseCycleSpec& spec, const SpinSystem& sys, int repeat);

EightPulseCycleSpec apply_parameters(const OptimizationProblem& problem, std::span<const double> values);
std::vector<double> parameters_of(const OptimizationProblem& problem, const EightPulseCycleSpec& spec);

struct ObjectiveBreakdown {
  double value = 0.0;
  double hamiltonian_distance = 0.0;
  double fidelity_phi_plus = 0.0;
  double fidelity_phi_minus = 0.0;
  double lambda_gap = 0.0;
  /// |repeat cycle_time gap / (pi/2) - 1|, 0 when timing_repeat == 0.
  double timing_error = 0.0;
  /// Set when the cycle propagator hit the branch cut; value is +inf.
  bool branch_ambiguity = false;
};

ObjectiveBreakdown evaluate_objective_detailed(const EightPulseCycleSpec& spec, const OptimizationProblem& problem);
double evaluate_objective(const EightPulseCycleSpec& spec, const OptimizationProblem& problem);

struct OptimizationResult {
  /// Parameters exactly as evaluated; re-evaluation reproduces objective_value.
  EightPulseCycleSpec best_spec;
  /// best_spec after the timing fit (identical when timing_repeat == 0).
  EightPulseCycleSpec timed_spec;
  double objective_value = 0.0;
  double fidelity_phi_plus = 0.0;
  double fidelity_phi_minus = 0.0;
  double lambda_gap = 0.0;
  /// (evaluation index, best objective so far), one entry per evaluation.
  std::vector<std::pair<int, double>> trace;
  std::uint64_t seed = 0;
  int evaluations = 0;
  int restarts = 0;
};

/// Nelder-Mead on the box-normalised free parameters with seeded random
/// restarts; `budget` counts objective evaluations. The first evaluation is
/// the base spec.
OptimizationResult optimize(const OptimizationProblem& problem, int budget, std::uint64_t seed);

}  // namespace bellproj
