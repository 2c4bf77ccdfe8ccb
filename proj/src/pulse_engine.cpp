#include "bellproj/pulse_engine.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace bellproj {

namespace {

constexpr std::string_view kModule = "pulse-engine";
constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

Operator rf_hamiltonian(const PulseEvent& p, int n_spins) {
  const Operator axis = std::cos(p.phase_rad) * pauli::x() + std::sin(p.phase_rad) * pauli::y();
  Operator h = Operator::zero(1 << n_spins);
  for (int k = 0; k < n_spins; ++k) {
    if (p.kind == PulseKind::hard || p.target == k) h = h + pauli::on_spin(axis, k, n_spins);
  }
  return (0.5 * p.flip_rad / p.duration_s) * h;
}

Operator frame_rotation(const FrameRotation& f, int n_spins) {
  Matrix rz(2, 2);
  rz << std::exp(-kI * (0.5 * f.angle_rad)), 0, 0, std::exp(kI * (0.5 * f.angle_rad));
  Operator out = Operator::identity(1 << n_spins);
  for (int k = 0; k < n_spins; ++k) {
    if (f.target < 0 || f.target == k) out = pauli::on_spin(Operator(rz), k, n_spins) * out;
  }
  return out;
}

// Delays dominate sequence propagation; diagonalising H_int once per
// sequence makes each delay a diagonal phase update.
class FreeEvolution {
 public:
  explicit FreeEvolution(const Operator& h_int) : h_int_(h_int), es_(h_int.matrix()) {}

  Operator operator()(double t) const {
    const Vector phases = (-kI * t * es_.eigenvalues().cast<Complex>()).array().exp();
    return Operator(es_.eigenvectors() * phases.asDiagonal() * es_.eigenvectors().adjoint());
  }

  const Operator& hamiltonian() const { return h_int_; }

 private:
  Operator h_int_;
  Eigen::SelfAdjointEigenSolver<Matrix> es_;
};

Operator propagate(const SequenceElement& element, const FreeEvolution& free, int n_spins) {
  return std::visit(overloaded{
                        [&](const PulseEvent& p) {
                          if (p.duration_s == 0.0) {
                            return rotation(p.flip_rad, p.phase_rad, p.kind == PulseKind::hard ? -1 : p.target,
                                            n_spins);
                          }
                          return expm_hermitian(free.hamiltonian() + rf_hamiltonian(p, n_spins), p.duration_s);
                        },
                        [&](const Delay& d) { return free(d.duration_s); },
                        [&](const FrameRotation& f) { return frame_rotation(f, n_spins); },
                    },
                    element);
}

double element_duration(const SequenceElement& e) {
  return std::visit(overloaded{
                        [](const PulseEvent& p) { return p.duration_s; },
                        [](const Delay& d) { return d.duration_s; },
                        [](const FrameRotation&) { return 0.0; },
                    },
                    e);
}

}  // namespace

double PulseSequence::cycle_duration() const {
  double total = 0.0;
  for (const auto& e : events) total += element_duration(e);
  return total;
}

void PulseSequence::validate() const {
  if (repeat < 1) throw Error(ErrorKind::InvalidArgument, kModule, "repeat must be >= 1");
  for (const auto& e : events) {
    const double d = element_duration(e);
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidArgument, kModule, "negative duration");
    if (const auto* p = std::get_if<PulseEvent>(&e)) {
      if (!(p->flip_rad > 0.0 && p->flip_rad <= 2.0 * kPi + 1e-12)) {
        throw Error(ErrorKind::InvalidArgument, kModule, "flip angle outside (0, 2pi]");
      }
      if (!std::isfinite(p->phase_rad)) throw Error(ErrorKind::InvalidArgument, kModule, "non-finite phase");
      if (p->kind == PulseKind::selective && (p->target < 0 || p->target > 1)) {
        throw Error(ErrorKind::InvalidArgument, kModule, "selective pulse target must be 0 or 1");
      }
    }
  }
}

bool PulseSequence::all_delta_pulses() const {
  for (const auto& e : events) {
    if (const auto* p = std::get_if<PulseEvent>(&e); p && p->duration_s != 0.0) return false;
  }
  return true;
}

PulseSequence concatenate(const PulseSequence& a, const PulseSequence& b) {
  if (a.repeat != 1 || b.repeat != 1) {
    throw Error(ErrorKind::InvalidArgument, kModule, "concatenate requires single-repetition sequences");
  }
  PulseSequence out = a;
  out.events.insert(out.events.end(), b.events.begin(), b.events.end());
  return out;
}

double EightPulseCycleSpec::cycle_time() const {
  double total = 8.0 * pulse_width_s;
  for (double d : delays_s) total += d;
  return total;
}

void EightPulseCycleSpec::validate() const {
  for (double d : delays_s) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorKind::InvalidArgument, kModule, "negative delay");
  }
  for (double p : phases_rad) {
    if (!std::isfinite(p)) throw Error(ErrorKind::InvalidArgument, kModule, "non-finite phase");
  }
  if (!(pulse_width_s >= 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "negative pulse width");
  if (repeat < 1) throw Error(ErrorKind::InvalidArgument, kModule, "repeat must be >= 1");
  if (!(cycle_time() > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "cycle time must be positive");
}

Operator rotation(double flip_rad, double phase_rad, int target, int n_spins) {
  const Complex c = std::cos(0.5 * flip_rad);
  const Complex s = std::sin(0.5 * flip_rad);
  // exp(-i (flip/2) (cos(phi) sx + sin(phi) sy)) for one spin.
  Matrix r(2, 2);
  r << c, -kI * s * std::exp(-kI * phase_rad), -kI * s * std::exp(kI * phase_rad), c;
  Operator out = Operator::identity(1 << n_spins);
  for (int k = 0; k < n_spins; ++k) {
    if (target < 0 || target == k) out = pauli::on_spin(Operator(r), k, n_spins) * out;
  }
  return out;
}

Operator element_propagator(const SequenceElement& element, const SpinSystem& sys) {
  return propagate(element, FreeEvolution(internal_hamiltonian(sys)), sys.n_spins);
}

Operator cycle_propagator(const PulseSequence& seq, const SpinSystem& sys) {
  seq.validate();
  const FreeEvolution free(internal_hamiltonian(sys));
  Matrix u = Matrix::Identity(1 << sys.n_spins, 1 << sys.n_spins);
  for (const auto& e : seq.events) u = propagate(e, free, sys.n_spins).matrix() * u;
  return Operator(std::move(u));
}

Operator propagator_of(const PulseSequence& seq, const SpinSystem& sys) {
  const Operator cycle = cycle_propagator(seq, sys);
  Matrix u = Matrix::Identity(cycle.dim(), cycle.dim());
  for (int k = 0; k < seq.repeat; ++k) u = cycle.matrix() * u;
  return Operator(std::move(u));
}

PulseSequence phase_gate_block(const SpinSystem& sys) {
  sys.validate();
  const double tau = 1.0 / (2.0 * sys.splitting_hz);
  // The coupling term contributes exp(-i omega_d tau s1z s2z) with
  // omega_d tau = pi/4, i.e. diag(1, i, i, 1) up to a global phase. After the
  // pi pulse, z-rotations by 2 omega_d tau on both spins turn this into the
  // controlled phase diag(1, 1, 1, -1).
  const double frame_angle = 2.0 * coupling_rad_s(sys.splitting_hz) * tau;
  PulseSequence seq;
  seq.events = {
      Delay{tau / 2.0},
      PulseEvent{PulseKind::hard, 0, 0.0, kPi, 0.0},
      Delay{tau / 2.0},
      FrameRotation{-1, frame_angle},
  };
  return seq;
}

PulseSequence entangler_sequence(const SpinSystem& sys, int target, double selective_phase_rad) {
  if (target < 0 || target > 1) throw Error(ErrorKind::InvalidArgument, kModule, "target must be 0 or 1");
  PulseSequence seq;
  seq.events.push_back(PulseEvent{PulseKind::hard, 0, 0.0, kPi / 2.0, 0.0});
  const PulseSequence gate = phase_gate_block(sys);
  seq.events.insert(seq.events.end(), gate.events.begin(), gate.events.end());
  seq.events.push_back(PulseEvent{PulseKind::selective, target, selective_phase_rad, kPi / 2.0, 0.0});
  return seq;
}

PulseSequence bell_preparation(const SpinSystem& sys, BellState target_state) {
  PulseSequence seq = entangler_sequence(sys, 1, kPi);
  switch (target_state) {
    case BellState::phi_plus: break;
    case BellState::phi_minus: seq.events.push_back(FrameRotation{0, kPi}); break;
    default: throw Error(ErrorKind::InvalidArgument, kModule, "only Phi+ and Phi- preparations are provided");
  }
  return seq;
}

DensityMatrix pseudopure_prep(const DensityMatrix& rho_in) {
  if (rho_in.dim() != 4) throw Error(ErrorKind::DimMismatch, kModule, "pseudopure_prep expects two spins");
  const double p = rho_in(0, 0).real();
  const double q = (1.0 - p) / 3.0;
  const Eigen::Vector4d pops(p, q, q, q);
  return DensityMatrix(Operator(pops.cast<Complex>().asDiagonal().toDenseMatrix()));
}

PulseSequence eight_pulse_cycle(const EightPulseCycleSpec& spec) {
  spec.validate();
  PulseSequence seq;
  seq.repeat = spec.repeat;
  for (int k = 0; k < 8; ++k) {
    seq.events.push_back(Delay{spec.delays_s[k]});
    seq.events.push_back(PulseEvent{PulseKind::hard, 0, spec.phases_rad[k], kPi / 2.0, spec.pulse_width_s});
  }
  seq.events.push_back(Delay{spec.delays_s[8]});
  return seq;
}

PulseSequence phase_shift_all(const PulseSequence& seq, double dphi_rad) {
  PulseSequence out = seq;
  for (auto& e : out.events) {
    if (auto* p = std::get_if<PulseEvent>(&e)) p->phase_rad += dphi_rad;
  }
  return out;
}

EightPulseCycleSpec reference_dq_cycle(double cycle_time_s, double pulse_width_s, int repeat) {
  const double tau = cycle_time_s / 12.0 - pulse_width_s;
  if (!(tau >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "cycle time too short for the pulse width");
  }
  const double tau_long = 2.0 * tau + pulse_width_s;
  EightPulseCycleSpec spec;
  spec.delays_s = {tau / 2, tau_long, tau, tau_long, tau, tau_long, tau, tau_long, tau / 2};
  spec.phases_rad = {0.0, 0.0, kPi, kPi, kPi, kPi, 0.0, 0.0};
  spec.pulse_width_s = pulse_width_s;
  spec.repeat = repeat;
  return spec;
}

}  // namespace bellproj
