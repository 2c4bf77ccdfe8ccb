#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bellproj/pulse_engine.hpp"
#include "bellproj/random.hpp"
#include "bellproj/serialization.hpp"
#include "support.hpp"

using namespace bellproj;
using testing::max_diff;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix spin_rotation(double flip, double phase) {
  const Matrix axis = std::cos(phase) * testing::sx() + std::sin(phase) * testing::sy();
  const Matrix r1 = std::cos(flip / 2) * testing::id2() - Complex(0, 1) * std::sin(flip / 2) * axis;
  return testing::kron(r1, r1);
}

double global_phase_distance(const Matrix& a, const Matrix& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = overlap / std::abs(overlap);
  return max_diff(a, phase * b);
}

EightPulseCycleSpec random_spec(Rng& rng, double width) {
  EightPulseCycleSpec s;
  for (double& d : s.delays_s) d = rng.uniform(0.0, 100e-6);
  for (double& p : s.phases_rad) p = rng.uniform(0.0, 2 * kPi);
  s.pulse_width_s = width;
  return s;
}

}  // namespace

TEST_SUITE("pulse-engine") {

TEST_CASE("empty sequence propagates to identity") {
  const PulseSequence empty;
  CHECK(max_diff(propagator_of(empty, SpinSystem{}).matrix(), Matrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("hard pi pulse flips both spins") {
  PulseSequence seq;
  seq.events.push_back(PulseEvent{PulseKind::hard, 0, 0.0, kPi, 0.0});
  const Matrix u = propagator_of(seq, SpinSystem{}).matrix();
  CHECK(max_diff(u, -testing::xx()) < 1e-15);
  const Vector out = u * basis_ket(2, 4);
  CHECK(std::norm(out(1)) == doctest::Approx(1.0));
}

TEST_CASE("selective pulse acts on one spin") {
  PulseSequence seq;
  seq.events.push_back(PulseEvent{PulseKind::selective, 1, 0.5 * kPi, kPi, 0.0});
  const Matrix u = propagator_of(seq, SpinSystem{}).matrix();
  CHECK(max_diff(u, testing::kron(testing::id2(), Matrix(Complex(0, -1) * testing::sy()))) < 1e-15);
}

TEST_CASE("entangler delay and output states") {
  SpinSystem sys{0.0, 0.0, 353.0, CouplingModel::weak_zz};
  const PulseSequence ent = entangler_sequence(sys, 1, kPi);
  CHECK(ent.cycle_duration() * 1e3 == doctest::Approx(1.41643).epsilon(1e-5));

  const DensityMatrix g = DensityMatrix::pure(basis_ket(0, 4));
  const DensityMatrix phi = evolve(g, propagator_of(bell_preparation(sys, BellState::phi_plus), sys));
  CHECK(fidelity(phi, bell_vector(BellState::phi_plus)) > 1 - 1e-6);
  const DensityMatrix phim = evolve(g, propagator_of(bell_preparation(sys, BellState::phi_minus), sys));
  CHECK(fidelity(phim, bell_vector(BellState::phi_minus)) > 1 - 1e-6);

  // Classify the literal five-element variants. Phase pi gives Phi+ on either
  // target and phase 0 gives Psi+; Phi- needs the extra frame rotation.
  for (int target : {0, 1}) {
    for (double phase : {0.0, 0.5 * kPi, kPi, 1.5 * kPi}) {
      const DensityMatrix out = evolve(g, propagator_of(entangler_sequence(sys, target, phase), sys));
      const double fp = fidelity(out, bell_vector(BellState::phi_plus));
      const double fm = fidelity(out, bell_vector(BellState::phi_minus));
      const double sp = fidelity(out, bell_vector(BellState::psi_plus));
      if (phase == kPi) CHECK(fp > 1 - 1e-9);
      if (phase == 0.0) CHECK(sp > 1 - 1e-9);
      if (phase == 0.0 || phase == kPi) CHECK(fm < 1e-9);
      if (phase == 0.5 * kPi || phase == 1.5 * kPi) {
        CHECK(fp == doctest::Approx(0.25));
        CHECK(fm == doctest::Approx(0.25));
      }
    }
  }

  SpinSystem shifted{1500.0, -1500.0, 353.0};
  const DensityMatrix real = evolve(g, propagator_of(bell_preparation(shifted, BellState::phi_plus), shifted));
  CHECK(fidelity(real, bell_vector(BellState::phi_plus)) > 0.99);

  SpinSystem zero = sys;
  zero.splitting_hz = 0.0;
  try {
    entangler_sequence(zero, 0, kPi);
    FAIL("expected ZeroSplitting");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroSplitting);
  }
  CHECK_THROWS_AS(entangler_sequence(sys, 2, kPi), Error);
}

TEST_CASE("pseudopure preparation") {
  const DensityMatrix g = DensityMatrix::pure(basis_ket(0, 4));
  CHECK(max_diff(pseudopure_prep(g).matrix(), g.matrix()) < 1e-15);
  const DensityMatrix mixed = DensityMatrix::maximally_mixed(4);
  CHECK(max_diff(pseudopure_prep(mixed).matrix(), mixed.matrix()) < 1e-15);

  Matrix thermal = Matrix::Zero(4, 4);
  thermal.diagonal() << 0.4, 0.3, 0.2, 0.1;
  thermal(0, 1) = thermal(1, 0) = 0.05;
  const DensityMatrix out = pseudopure_prep(DensityMatrix(Operator(thermal)));
  Matrix expected = Matrix::Zero(4, 4);
  expected.diagonal() << 0.4, 0.2, 0.2, 0.2;
  CHECK(max_diff(out.matrix(), expected) < 1e-15);

  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const DensityMatrix r = pseudopure_prep(random_density_matrix(rng, 4, 1 + trial % 4));
    CHECK(std::abs(r.op().trace().real() - 1.0) < 1e-12);
    CHECK(max_off_diagonal(r.op()) == 0.0);
  }
}

TEST_CASE("eight-pulse cycle expansion") {
  const EightPulseCycleSpec ref = reference_dq_cycle(0.75e-3, 10e-6, 2);
  CHECK(ref.cycle_time() == doctest::Approx(0.75e-3).epsilon(1e-12));
  const PulseSequence seq = eight_pulse_cycle(ref);
  CHECK(seq.total_duration() == doctest::Approx(1.5e-3).epsilon(1e-12));
  CHECK(seq.repeat == 2);
  int pulses = 0;
  for (const auto& e : seq.events) {
    if (const auto* p = std::get_if<PulseEvent>(&e)) {
      ++pulses;
      CHECK(p->flip_rad == doctest::Approx(0.5 * kPi));
      CHECK(p->duration_s == 10e-6);
    }
  }
  CHECK(pulses == 8);

  EightPulseCycleSpec bare;
  Rng rng(32);
  for (double& p : bare.phases_rad) p = rng.uniform(0.0, 2 * kPi);
  bare.delays_s[0] = 0.0;
  bare.pulse_width_s = 0.0;
  // a zero cycle time is invalid, so give it a vanishing delay with no coupling effect
  bare.delays_s[4] = 1e-15;
  Matrix expected = Matrix::Identity(4, 4);
  for (double p : bare.phases_rad) expected = spin_rotation(0.5 * kPi, p) * expected;
  CHECK(max_diff(propagator_of(eight_pulse_cycle(bare), SpinSystem{}).matrix(), expected) < 1e-9);

  EightPulseCycleSpec empty;
  CHECK_THROWS_AS(empty.validate(), Error);
  EightPulseCycleSpec negative = ref;
  negative.delays_s[3] = -1e-6;
  CHECK_THROWS_AS(negative.validate(), Error);
}

TEST_CASE("reference cycle delays follow the tau pattern") {
  const EightPulseCycleSpec ref = reference_dq_cycle(0.75e-3, 10e-6, 1);
  const double tau = ref.delays_s[2];
  CHECK(ref.delays_s[0] == doctest::Approx(tau / 2));
  CHECK(ref.delays_s[8] == doctest::Approx(tau / 2));
  CHECK(ref.delays_s[1] == doctest::Approx(2 * tau + 10e-6));
  for (int k : {2, 4, 6}) CHECK(ref.delays_s[k] == doctest::Approx(tau));
  for (int k : {1, 3, 5, 7}) CHECK(ref.delays_s[k] == doctest::Approx(2 * tau + 10e-6));
  CHECK_THROWS_AS(reference_dq_cycle(50e-6, 10e-6, 1), Error);
}

TEST_CASE("phase shifts") {
  Rng rng(33);
  SpinSystem sys{1500.0, -1500.0, 353.0};
  const PulseSequence seq = eight_pulse_cycle(random_spec(rng, 5e-6));
  const PulseSequence same = phase_shift_all(seq, 0.0);
  CHECK(max_diff(propagator_of(same, sys).matrix(), propagator_of(seq, sys).matrix()) == 0.0);
  const PulseSequence full = phase_shift_all(seq, 2 * kPi);
  CHECK(max_diff(propagator_of(full, sys).matrix(), propagator_of(seq, sys).matrix()) < 1e-12);
  const PulseSequence quarter = phase_shift_all(seq, 0.5 * kPi);
  for (std::size_t k = 0; k < seq.events.size(); ++k) {
    if (const auto* d = std::get_if<Delay>(&seq.events[k])) {
      CHECK(std::get<Delay>(quarter.events[k]).duration_s == d->duration_s);
    } else if (const auto* p = std::get_if<PulseEvent>(&seq.events[k])) {
      CHECK(std::get<PulseEvent>(quarter.events[k]).phase_rad == doctest::Approx(p->phase_rad + 0.5 * kPi));
    }
  }
}

TEST_CASE("propagator is multiplicative over concatenation") {
  Rng rng(34);
  SpinSystem sys{1500.0, -1500.0, 353.0};
  for (int trial = 0; trial < 20; ++trial) {
    PulseSequence a = eight_pulse_cycle(random_spec(rng, 3e-6));
    PulseSequence b = eight_pulse_cycle(random_spec(rng, 0.0));
    b.events.push_back(FrameRotation{0, rng.uniform(0.0, kPi)});
    const Matrix joint = propagator_of(concatenate(a, b), sys).matrix();
    CHECK(max_diff(joint, propagator_of(b, sys).matrix() * propagator_of(a, sys).matrix()) < 1e-12);
  }
  PulseSequence twice;
  twice.repeat = 2;
  CHECK_THROWS_AS(concatenate(twice, twice), Error);
}

TEST_CASE("repeat multiplies the cycle propagator") {
  Rng rng(35);
  SpinSystem sys{1500.0, -1500.0, 353.0};
  EightPulseCycleSpec spec = random_spec(rng, 10e-6);
  spec.repeat = 3;
  const PulseSequence seq = eight_pulse_cycle(spec);
  const Matrix one = cycle_propagator(seq, sys).matrix();
  CHECK(max_diff(propagator_of(seq, sys).matrix(), one * one * one) < 1e-12);
}

TEST_CASE("finite pulses converge to delta pulses") {
  // The first-order gap is about |H_int| times the width, ~1e-5 at 1 ns for
  // 3 kHz offsets; it must shrink linearly and drop below 1e-6 by 0.1 ns.
  SpinSystem sys{1500.0, -1500.0, 353.0};
  for (double phase : {0.0, 0.3, 2.0}) {
    auto gap = [&](double width) {
      PulseSequence finite, delta;
      finite.events.push_back(PulseEvent{PulseKind::hard, 0, phase, 0.5 * kPi, width});
      delta.events.push_back(Delay{0.5 * width});
      delta.events.push_back(PulseEvent{PulseKind::hard, 0, phase, 0.5 * kPi, 0.0});
      delta.events.push_back(Delay{0.5 * width});
      return global_phase_distance(propagator_of(finite, sys).matrix(), propagator_of(delta, sys).matrix());
    };
    const double norm = Eigen::SelfAdjointEigenSolver<Matrix>(internal_hamiltonian(sys).matrix())
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff();
    const double g9 = gap(1e-9), g10 = gap(1e-10);
    CHECK(g9 < norm * 1e-9);
    CHECK(g10 < 1e-6);
    CHECK(g10 / g9 == doctest::Approx(0.1).epsilon(0.05));
  }
}

TEST_CASE("sequence validation") {
  PulseSequence seq;
  seq.events.push_back(PulseEvent{PulseKind::hard, 0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(seq.validate(), Error);
  seq.events[0] = Delay{-1.0};
  CHECK_THROWS_AS(seq.validate(), Error);
  seq.events[0] = PulseEvent{PulseKind::selective, 4, 0.0, kPi, 0.0};
  CHECK_THROWS_AS(seq.validate(), Error);
  seq.events[0] = Delay{1.0};
  seq.repeat = 0;
  CHECK_THROWS_AS(seq.validate(), Error);
}

TEST_CASE("sequence json roundtrip") {
  SpinSystem sys{1500.0, -1500.0, 353.0};
  PulseSequence seq = bell_preparation(sys, BellState::phi_minus);
  seq.events.push_back(PulseEvent{PulseKind::hard, 0, 0.25 * kPi, 0.5 * kPi, 10e-6});
  seq.events.push_back(FrameRotation{-1, 0.7});
  const Json j = to_json(seq);
  const PulseSequence back = sequence_from_json(j);
  CHECK(back.repeat == seq.repeat);
  REQUIRE(back.events.size() == seq.events.size());
  CHECK(max_diff(propagator_of(back, sys).matrix(), propagator_of(seq, sys).matrix()) < 1e-12);
  CHECK(j["events"][0]["type"] == "pulse");

  Json bad = j;
  bad["events"][1]["type"] = "wait";
  CHECK_THROWS_AS(sequence_from_json(bad, "/cycle"), Error);
  Json missing = j;
  missing["events"][0].erase("flip_deg");
  try {
    sequence_from_json(missing, "/cycle");
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("/cycle/events/0/flip_deg") != std::string::npos);
  }
  Json negative = j;
  negative["events"][0]["duration_us"] = -1.0;
  CHECK_THROWS_AS(sequence_from_json(negative), Error);
}

}
