#pragma once

// Pulse sequences in the rotating frame: hard and selective rf pulses,
// free-evolution delays and virtual (frame) z-rotations, plus the concrete
// sequences used for preparation, entangling and double-quantum averaging.

#include <array>
#include <variant>
#include <vector>

#include "bellproj/quantum_core.hpp"
#include "bellproj/spin_hamiltonians.hpp"

namespace bellproj {

enum class PulseKind { hard, selective };

struct PulseEvent {
  PulseKind kind = PulseKind::hard;
  /// Spin index for selective pulses; ignored for hard pulses.
  int target = 0;
  /// rf phase, 0 = x axis, pi/2 = y axis.
  double phase_rad = 0.0;
  double flip_rad = 0.0;
  /// 0 means an ideal delta pulse.
  double duration_s = 0.0;
};

struct Delay {
  double duration_s = 0.0;
};

/// Instantaneous z-rotation exp(-i (angle/2) sigma_z) applied as a
/// reference-frame update; takes no time and uses no rf.
struct FrameRotation {
  /// Spin index, or -1 for every spin.
  int target = -1;
  double angle_rad = 0.0;
};

using SequenceElement = std::variant<PulseEvent, Delay, FrameRotation>;

struct PulseSequence {
  std::vector<SequenceElement> events;
  int repeat = 1;

  /// Duration of one repetition.
  double cycle_duration() const;
  double total_duration() const { return repeat * cycle_duration(); }
  /// Throws InvalidArgument on negative durations, bad flip angles or repeat < 1.
  void validate() const;
  bool all_delta_pulses() const;
};

/// Appends the events of b after those of a; both must have repeat == 1.
PulseSequence concatenate(const PulseSequence& a, const PulseSequence& b);

struct EightPulseCycleSpec {
  std::array<double, 9> delays_s{};
  std::array<double, 8> phases_rad{};
  double pulse_width_s = 0.0;
  int repeat = 1;

  double cycle_time() const;
  void validate() const;
};

/// exp(-i (flip/2) sum_targets (sigma_x cos(phase) + sigma_y sin(phase))).
Operator rotation(double flip_rad, double phase_rad, int target, int n_spins = 2);

/// Propagator of a single element (one pulse, delay or frame rotation).
Operator element_propagator(const SequenceElement& element, const SpinSystem& sys);

/// Ordered product of segment propagators over one repetition.
Operator cycle_propagator(const PulseSequence& seq, const SpinSystem& sys);

/// Full propagator including repetitions.
Operator propagator_of(const PulseSequence& seq, const SpinSystem& sys);

/// Step-B entangler (pi/2)_h - tau/2 - (pi)_h - tau/2 - [frame] - (pi/2)_s with
/// tau = 1/(2 splitting). The frame element removes the single-spin z phases of
/// the coupling evolution so the echo block acts as the phase gate
/// diag(1, 1, 1, -1) up to the hard pi rotation and a global phase.
PulseSequence entangler_sequence(const SpinSystem& sys, int target, double selective_phase_rad);

/// Echo block tau/2 - (pi)_h - tau/2 - [frame] of the entangler.
PulseSequence phase_gate_block(const SpinSystem& sys);

/// Preparation that yields the requested Phi state from |00>: the entangler
/// with selective phase pi, followed for Phi- by a pi frame rotation on spin 1.
PulseSequence bell_preparation(const SpinSystem& sys, BellState target_state);

/// Partial saturation: keeps the |00> population p, sets the other three to
/// (1 - p)/3 and removes every coherence.
DensityMatrix pseudopure_prep(const DensityMatrix& rho_in);

/// Expands the spec into 8 pulses of 90 degrees interleaved with the 9 delays.
PulseSequence eight_pulse_cycle(const EightPulseCycleSpec& spec);

/// Shifts the phase of every rf pulse by dphi; delays and frame rotations untouched.
PulseSequence phase_shift_all(const PulseSequence& seq, double dphi_rad);

/// Canonical double-quantum cycle
///   tau/2 X tau' X tau X- tau' X- tau X- tau' X- tau X tau' X tau/2
/// with tau' = 2 tau + pulse_width, giving the cycle time requested.
EightPulseCycleSpec reference_dq_cycle(double cycle_time_s, double pulse_width_s, int repeat);

}  // namespace bellproj
