#include "bellproj/spin_hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace bellproj {

namespace {

constexpr std::string_view kModule = "spin-hamiltonians";

Operator two_spin(const Operator& a, const Operator& b) { return tensor_product(a, b); }

Operator xx() { return two_spin(pauli::x(), pauli::x()); }
Operator yy() { return two_spin(pauli::y(), pauli::y()); }
Operator zz() { return two_spin(pauli::z(), pauli::z()); }

}  // namespace

std::string_view bell_label(BellState s) {
  switch (s) {
    case BellState::phi_plus: return "Phi+";
    case BellState::phi_minus: return "Phi-";
    case BellState::psi_plus: return "Psi+";
    case BellState::psi_minus: return "Psi-";
  }
  return "?";
}

void SpinSystem::validate() const {
  if (!std::isfinite(shift_1_hz) || !std::isfinite(shift_2_hz) || !std::isfinite(splitting_hz)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "spin system has non-finite fields");
  }
  if (n_spins != 2) throw Error(ErrorKind::InvalidArgument, kModule, "only two-spin systems are supported");
  if (splitting_hz == 0.0) throw Error(ErrorKind::ZeroSplitting, kModule, "splitting must be nonzero");
  if (splitting_hz < 0.0) throw Error(ErrorKind::InvalidArgument, kModule, "splitting must be positive");
}

double hz_to_rad_s(double hz) { return 2.0 * std::numbers::pi * hz; }

double coupling_rad_s(double splitting_hz) { return hz_to_rad_s(splitting_hz) / 4.0; }

Vector bell_vector(BellState s) {
  const double r = 1.0 / std::numbers::sqrt2;
  Vector v = Vector::Zero(4);
  switch (s) {
    case BellState::phi_plus: v << r, 0, 0, r; break;
    case BellState::phi_minus: v << r, 0, 0, -r; break;
    case BellState::psi_plus: v << 0, r, r, 0; break;
    case BellState::psi_minus: v << 0, r, -r, 0; break;
  }
  return v;
}

BasisTransform bell_transform() {
  Matrix m(4, 4);
  for (BellState s : kBellStates) m.col(static_cast<int>(s)) = bell_vector(s);
  return BasisTransform(Operator(m), "multiplicative->Bell");
}

Operator bell_hamiltonian(const BellSpectrum& s) {
  const auto [a, b, c, d] = s.values();
  const Operator id = Operator::identity(4);
  return 0.25 * ((a + b + c + d) * id + (a + b - c - d) * zz() + (a - b + c - d) * xx() + (-a + b + c - d) * yy());
}

Operator bell_hamiltonian_by_transform(const BellSpectrum& s) {
  const BasisTransform b = bell_transform();
  const Eigen::Vector4d diag(s.a, s.b, s.c, s.d);
  return Operator(b.matrix() * diag.cast<Complex>().asDiagonal() * b.matrix().adjoint());
}

Operator h_dipolar_zz() { return zz() - 0.5 * (xx() + yy()); }
Operator h_dipolar_xx() { return xx() - 0.5 * (yy() + zz()); }
Operator h_dipolar_yy() { return yy() - 0.5 * (zz() + xx()); }
Operator h_double_quantum() { return h_dipolar_xx() - h_dipolar_yy(); }

Operator internal_hamiltonian(const SpinSystem& sys) {
  sys.validate();
  const double pi = std::numbers::pi;
  const Operator zeeman = (pi * sys.shift_1_hz) * pauli::on_spin(pauli::z(), 0, 2) +
                          (pi * sys.shift_2_hz) * pauli::on_spin(pauli::z(), 1, 2);
  const Operator coupling = sys.coupling == CouplingModel::dipolar ? h_dipolar_zz() : zz();
  return zeeman + coupling_rad_s(sys.splitting_hz) * coupling;
}

Operator eq3_hamiltonian(double a, double c) { return bell_hamiltonian(BellSpectrum{a, -a, c, 0.0}); }

std::vector<SpectralLine> single_quantum_lines(const Operator& h, double min_intensity) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h).matrix());
  const int n = h.dim();
  int n_spins = 0;
  while ((1 << n_spins) < n) ++n_spins;
  Matrix lower = Matrix::Zero(n, n);
  Matrix sigma_minus(2, 2);
  sigma_minus << 0, 0, 1, 0;
  for (int k = 0; k < n_spins; ++k) lower += pauli::on_spin(Operator(sigma_minus), k, n_spins).matrix();

  // A coherence |i><j| evolves as exp(-i (E_i - E_j) t); the observed signal
  // Tr(rho(t) S-) picks up <j|S-|i>.
  const Matrix lower_eig = es.eigenvectors().adjoint() * lower * es.eigenvectors();
  std::vector<SpectralLine> lines;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double intensity = std::norm(lower_eig(j, i));
      if (intensity < min_intensity) continue;
      const double omega = es.eigenvalues()(i) - es.eigenvalues()(j);
      lines.push_back({omega / (2.0 * std::numbers::pi), intensity});
    }
  }
  std::sort(lines.begin(), lines.end(),
            [](const SpectralLine& l, const SpectralLine& r) { return l.frequency_hz < r.frequency_hz; });
  return lines;
}

}  // namespace bellproj
