#include "bellproj/tomography.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bellproj/random.hpp"
#include "bellproj/spin_hamiltonians.hpp"

namespace bellproj {

namespace {

constexpr std::string_view kModule = "tomography";
constexpr int kPauliCount = 16;

std::array<Operator, 4> single_paulis() { return {pauli::identity(), pauli::x(), pauli::y(), pauli::z()}; }

std::vector<Operator> two_spin_paulis() {
  const auto p = single_paulis();
  std::vector<Operator> out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) out.push_back(tensor_product(p[a], p[b]));
  }
  return out;
}

PulseSequence local_rotation(int spin, int axis) {
  PulseSequence seq;
  if (axis > 0) {
    const double phase = axis == 1 ? 0.0 : 0.5 * std::numbers::pi;
    seq.events.push_back(PulseEvent{PulseKind::selective, spin, phase, 0.5 * std::numbers::pi, 0.0});
  }
  return seq;
}

std::vector<Operator> rotation_unitaries(const ReadoutSet& rs, const SpinSystem& sys) {
  std::vector<Operator> out;
  out.reserve(rs.rotations.size());
  for (const auto& r : rs.rotations) out.push_back(propagator_of(r, sys));
  return out;
}

std::vector<double> exact_values(const DensityMatrix& rho, const ReadoutSet& rs, const SpinSystem& sys) {
  std::vector<double> values;
  values.reserve(rs.size());
  for (const auto& u : rotation_unitaries(rs, sys)) {
    const Matrix rotated = u.matrix() * rho.matrix() * u.matrix().adjoint();
    for (const auto& o : rs.observables) values.push_back((o.matrix() * rotated).trace().real());
  }
  return values;
}

Operator assemble(const Eigen::VectorXd& coeffs) {
  const auto paulis = two_spin_paulis();
  Matrix rho = Matrix::Zero(4, 4);
  for (int k = 0; k < kPauliCount; ++k) rho += (coeffs(k) / 4.0) * paulis[k].matrix();
  return hermitian_part(Operator(rho));
}

// Euclidean projection of a real vector onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

}  // namespace

ReadoutSet default_readout_set() {
  ReadoutSet rs;
  for (int a1 = 0; a1 < 3; ++a1) {
    for (int a2 = 0; a2 < 3; ++a2) rs.rotations.push_back(concatenate(local_rotation(0, a1), local_rotation(1, a2)));
  }
  rs.observables = {pauli::on_spin(pauli::z(), 0, 2), pauli::on_spin(pauli::z(), 1, 2),
                    tensor_product(pauli::z(), pauli::z())};
  return rs;
}

Eigen::MatrixXd measurement_map(const ReadoutSet& rs, const SpinSystem& sys) {
  const auto paulis = two_spin_paulis();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rs.size()) + 1, kPauliCount);
  Eigen::Index row = 0;
  for (const auto& u : rotation_unitaries(rs, sys)) {
    for (const auto& o : rs.observables) {
      if (o.dim() != 4) throw Error(ErrorKind::DimMismatch, kModule, "observables must be two-spin operators");
      const Matrix heisenberg = u.matrix().adjoint() * o.matrix() * u.matrix();
      for (int k = 0; k < kPauliCount; ++k) a(row, k) = (heisenberg * paulis[k].matrix()).trace().real() / 4.0;
      ++row;
    }
  }
  a(row, 0) = 1.0;
  return a;
}

int readout_rank(const ReadoutSet& rs, const SpinSystem& sys) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(measurement_map(rs, sys));
  const auto& s = svd.singularValues();
  return static_cast<int>((s.array() > 1e-10 * s(0)).count());
}

MeasurementRecord simulate_readout(const DensityMatrix& rho, const ReadoutSet& rs, const SpinSystem& sys,
                                   double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "noise_sigma must be >= 0");
  MeasurementRecord rec{exact_values(rho, rs, sys), noise_sigma};
  if (noise_sigma > 0.0) {
    Rng rng(seed);
    for (double& v : rec.values) v += noise_sigma * rng.normal();
  }
  return rec;
}

Operator least_squares_estimate(const MeasurementRecord& rec, const ReadoutSet& rs, const SpinSystem& sys) {
  if (rec.values.size() != rs.size()) {
    throw Error(ErrorKind::DimMismatch, kModule, "record length does not match the readout set");
  }
  const Eigen::MatrixXd a = measurement_map(rs, sys);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  if (svd.rank() < kPauliCount) {
    throw Error(ErrorKind::RankDeficient, kModule,
                "readout map has rank " + std::to_string(svd.rank()) + " < " + std::to_string(kPauliCount));
  }
  Eigen::VectorXd b(a.rows());
  for (std::size_t k = 0; k < rec.values.size(); ++k) b(static_cast<Eigen::Index>(k)) = rec.values[k];
  b(a.rows() - 1) = 1.0;
  Eigen::VectorXd coeffs = svd.solve(b);
  // The trace row is a constraint, not a measurement.
  coeffs(0) = 1.0;
  return assemble(coeffs);
}

DensityMatrix nearest_density_matrix(const Operator& estimate) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(estimate).matrix());
  const Eigen::VectorXd p = project_to_simplex(es.eigenvalues());
  return DensityMatrix(
      hermitian_part(Operator(es.eigenvectors() * p.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint())));
}

DensityMatrix clip_to_density_matrix(const Operator& estimate) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(estimate).matrix());
  Eigen::VectorXd p = es.eigenvalues().cwiseMax(0.0);
  p /= p.sum();
  return DensityMatrix(
      hermitian_part(Operator(es.eigenvectors() * p.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint())));
}

DensityMatrix reconstruct(const MeasurementRecord& rec, const ReadoutSet& rs, const SpinSystem& sys) {
  return nearest_density_matrix(least_squares_estimate(rec, rs, sys));
}

BarTable bar_export(const DensityMatrix& rho, const std::optional<BasisTransform>& basis) {
  static const std::array<std::string, 4> kProduct = {"00", "01", "10", "11"};
  static const std::array<std::string, 4> kBell = {"Phi+", "Phi-", "Psi+", "Psi-"};
  if (rho.dim() != 4) throw Error(ErrorKind::DimMismatch, kModule, "bar export supports two spins");

  BarTable table;
  Operator m = rho.op();
  const std::array<std::string, 4>* labels = &kProduct;
  table.basis = "multiplicative";
  if (basis) {
    m = change_basis(rho.op(), *basis);
    if (basis->label() == bell_transform().label()) {
      table.basis = "bell";
      labels = &kBell;
    } else {
      table.basis = basis->label();
    }
  }
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) table.rows.push_back({(*labels)[r], (*labels)[c], m(r, c).real(), m(r, c).imag()});
  }
  return table;
}

std::string to_csv(const BarTable& table) {
  std::string out = "basis,row,col,re,im\n";
  for (const auto& r : table.rows) {
    out += table.basis + "," + r.row + "," + r.col + "," + format_double(r.re) + "," + format_double(r.im) + "\n";
  }
  return out;
}

}  // namespace bellproj
