#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "bellproj/random.hpp"
#include "bellproj/tomography.hpp"
#include "support.hpp"

using namespace bellproj;
using testing::max_diff;

TEST_SUITE("tomography") {

TEST_CASE("default readout set is informationally complete") {
  const ReadoutSet rs = default_readout_set();
  CHECK(rs.rotations.size() == 9);
  CHECK(rs.observables.size() == 3);
  CHECK(rs.size() == 27);
  const SpinSystem sys{1500.0, -1500.0, 353.0};
  CHECK(readout_rank(rs, sys) == 16);
  const Eigen::MatrixXd map = measurement_map(rs, sys);
  CHECK(map.rows() == 28);
  CHECK(map.cols() == 16);
}

TEST_CASE("readout examples") {
  const ReadoutSet rs = default_readout_set();
  const SpinSystem sys{1500.0, -1500.0, 353.0};
  const MeasurementRecord mixed = simulate_readout(DensityMatrix::maximally_mixed(4), rs, sys, 0.0, 1);
  for (double v : mixed.values) CHECK(std::abs(v) < 1e-14);

  // find the identity rotation and the s1z observable
  const DensityMatrix g = DensityMatrix::pure(basis_ket(0, 4));
  const MeasurementRecord rec = simulate_readout(g, rs, sys, 0.0, 1);
  const Matrix s1z = testing::kron(testing::sz(), testing::id2());
  bool found = false;
  for (std::size_t r = 0; r < rs.rotations.size(); ++r) {
    if (max_diff(propagator_of(rs.rotations[r], sys).matrix(), Matrix::Identity(4, 4)) > 1e-12) continue;
    for (std::size_t o = 0; o < rs.observables.size(); ++o) {
      if (max_diff(rs.observables[o].matrix(), s1z) > 0.0) continue;
      CHECK(rec.values[r * rs.observables.size() + o] == doctest::Approx(1.0));
      found = true;
    }
  }
  CHECK(found);

  // every value matches a direct expectation value
  Rng rng(61);
  const DensityMatrix rho = random_density_matrix(rng, 4);
  const MeasurementRecord direct = simulate_readout(rho, rs, sys, 0.0, 1);
  for (std::size_t r = 0; r < rs.rotations.size(); ++r) {
    const Matrix u = propagator_of(rs.rotations[r], sys).matrix();
    for (std::size_t o = 0; o < rs.observables.size(); ++o) {
      const double want = (rs.observables[o].matrix() * u * rho.matrix() * u.adjoint()).trace().real();
      CHECK(direct.values[r * rs.observables.size() + o] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("noisy readout is deterministic per seed") {
  const ReadoutSet rs = default_readout_set();
  const SpinSystem sys;
  const DensityMatrix g = DensityMatrix::pure(basis_ket(0, 4));
  const MeasurementRecord a = simulate_readout(g, rs, sys, 0.01, 77);
  const MeasurementRecord b = simulate_readout(g, rs, sys, 0.01, 77);
  const MeasurementRecord c = simulate_readout(g, rs, sys, 0.01, 78);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK(a.noise_sigma == 0.01);
  CHECK_THROWS_AS(simulate_readout(g, rs, sys, -0.1, 1), Error);
}

TEST_CASE("noiseless roundtrip") {
  const ReadoutSet rs = default_readout_set();
  const SpinSystem sys{1500.0, -1500.0, 353.0};
  Rng rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const DensityMatrix rho = random_density_matrix(rng, 4, 1 + trial % 4);
    const DensityMatrix back = reconstruct(simulate_readout(rho, rs, sys, 0.0, 0), rs, sys);
    CHECK(max_diff(back.matrix(), rho.matrix()) < 1e-8);
    CHECK(fidelity(back, rho) > 0.9999);
  }
}

TEST_CASE("zero record reconstructs the maximally mixed state") {
  const ReadoutSet rs = default_readout_set();
  const SpinSystem sys;
  const MeasurementRecord zeros{std::vector<double>(rs.size(), 0.0), 0.0};
  CHECK(max_diff(reconstruct(zeros, rs, sys).matrix(), 0.25 * Matrix::Identity(4, 4)) < 1e-12);
  const MeasurementRecord short_rec{std::vector<double>(5, 0.0), 0.0};
  CHECK_THROWS_AS(reconstruct(short_rec, rs, sys), Error);
}

TEST_CASE("incomplete readout is rejected") {
  ReadoutSet rs = default_readout_set();
  rs.rotations.resize(1);
  const SpinSystem sys;
  CHECK(readout_rank(rs, sys) < 16);
  const MeasurementRecord rec = simulate_readout(DensityMatrix::maximally_mixed(4), rs, sys, 0.0, 1);
  try {
    reconstruct(rec, rs, sys);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
}

TEST_CASE("noisy Bell-state reconstruction") {
  const ReadoutSet rs = default_readout_set();
  const SpinSystem sys{1500.0, -1500.0, 353.0};
  for (BellState s : kBellStates) {
    const DensityMatrix bell = DensityMatrix::pure(bell_vector(s));
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      total += fidelity(reconstruct(simulate_readout(bell, rs, sys, 0.01, seed), rs, sys), bell);
    }
    CHECK(total / 100 > 0.99);
  }
}

TEST_CASE("nearest projection beats eigenvalue clipping") {
  const ReadoutSet rs = default_readout_set();
  const SpinSystem sys;
  Rng rng(63);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const DensityMatrix truth = random_density_matrix(rng, 4, 1 + static_cast<int>(seed % 2));
    const MeasurementRecord rec = simulate_readout(truth, rs, sys, 0.05, seed);
    const Operator raw = least_squares_estimate(rec, rs, sys);
    CHECK(std::abs(raw.trace().real() - 1.0) < 1e-10);
    CHECK(raw.is_hermitian());
    const double f_nearest = fidelity(nearest_density_matrix(raw), truth);
    const double f_clip = fidelity(clip_to_density_matrix(raw), truth);
    if (f_nearest >= f_clip - 1e-12) ++wins;
  }
  CHECK(wins >= 95);
}

TEST_CASE("nearest density matrix projects eigenvalues onto the simplex") {
  Matrix m = Matrix::Zero(4, 4);
  m.diagonal() << 0.9, 0.4, -0.1, -0.2;
  const DensityMatrix d = nearest_density_matrix(Operator(m));
  // simplex projection of (0.9, 0.4, -0.1, -0.2): shift by 0.15 and clip
  CHECK(d(0, 0).real() == doctest::Approx(0.75));
  CHECK(d(1, 1).real() == doctest::Approx(0.25));
  CHECK(d(2, 2).real() == doctest::Approx(0.0));
  const DensityMatrix c = clip_to_density_matrix(Operator(m));
  CHECK(c(0, 0).real() == doctest::Approx(0.9 / 1.3));
}

TEST_CASE("bar export") {
  const DensityMatrix g = DensityMatrix::pure(basis_ket(0, 4));
  const BarTable mult = bar_export(g);
  CHECK(mult.rows.size() == 16);
  int nonzero = 0;
  for (const auto& r : mult.rows) {
    if (std::abs(r.re) > 1e-15 || std::abs(r.im) > 1e-15) {
      ++nonzero;
      CHECK(r.row == "00");
      CHECK(r.col == "00");
      CHECK(r.re == 1.0);
    }
  }
  CHECK(nonzero == 1);

  const BarTable bell = bar_export(g, bell_transform());
  int halves = 0;
  for (const auto& r : bell.rows) {
    if (std::abs(r.re - 0.5) < 1e-12) {
      ++halves;
      CHECK((r.row == "Phi+" || r.row == "Phi-"));
      CHECK((r.col == "Phi+" || r.col == "Phi-"));
    } else {
      CHECK(std::abs(r.re) < 1e-12);
    }
  }
  CHECK(halves == 4);

  // entries reassemble to the input
  Rng rng(64);
  const DensityMatrix rho = random_density_matrix(rng, 4);
  const BarTable t = bar_export(rho);
  const std::map<std::string, int> index{{"00", 0}, {"01", 1}, {"10", 2}, {"11", 3}};
  Matrix re = Matrix::Zero(4, 4);
  for (const auto& r : t.rows) re(index.at(r.row), index.at(r.col)) = Complex(r.re, r.im);
  CHECK(max_diff(re, rho.matrix()) == 0.0);

  const std::string csv = to_csv(t);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "basis,row,col,re,im");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 16);
}

}
