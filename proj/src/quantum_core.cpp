#include "bellproj/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

namespace bellproj {

namespace {

constexpr std::string_view kModule = "quantum-core";

bool is_power_of_two(Eigen::Index n) { return n >= 2 && (n & (n - 1)) == 0; }

void require_same_dim(const Operator& a, const Operator& b, std::string_view what) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimMismatch, kModule,
                std::string(what) + ": " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || !is_power_of_two(m_.rows())) {
    throw Error(ErrorKind::InvalidOperator, kModule,
                "operator must be square with dimension a power of 2 (got " + std::to_string(m_.rows()) + "x" +
                    std::to_string(m_.cols()) + ")");
  }
  if (!m_.allFinite()) throw Error(ErrorKind::InvalidOperator, kModule, "operator has non-finite entries");
}

Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }
Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }

double Operator::hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

double Operator::unitarity_error() const {
  return (m_.adjoint() * m_ - Matrix::Identity(m_.rows(), m_.cols())).cwiseAbs().maxCoeff();
}

Operator operator+(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator+");
  return Operator(a.matrix() + b.matrix());
}

Operator operator-(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator-");
  return Operator(a.matrix() - b.matrix());
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "operator*");
  return Operator(a.matrix() * b.matrix());
}

Operator operator*(Complex s, const Operator& a) { return Operator(s * a.matrix()); }
Operator operator*(double s, const Operator& a) { return Operator(s * a.matrix()); }

double max_abs_diff(const Operator& a, const Operator& b) {
  require_same_dim(a, b, "max_abs_diff");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

double frobenius_norm(const Operator& a) { return a.matrix().norm(); }

DensityMatrix::DensityMatrix(Operator op) : op_(std::move(op)) {
  const double herm = op_.hermiticity_error();
  if (herm > tolerance::kHermitian) {
    throw Error(ErrorKind::NotDensityMatrix, kModule, "not Hermitian (error " + std::to_string(herm) + ")");
  }
  const double tr = op_.trace().real();
  if (std::abs(tr - 1.0) > tolerance::kTrace) {
    throw Error(ErrorKind::NotDensityMatrix, kModule, "trace " + std::to_string(tr) + " != 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(op_).matrix(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < tolerance::kPsdFloor) {
    throw Error(ErrorKind::NotDensityMatrix, kModule,
                "negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw Error(ErrorKind::InvalidArgument, kModule, "zero state vector");
  const Vector v = psi / n;
  return DensityMatrix(Operator(v * v.adjoint()));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Operator(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
}

BasisTransform::BasisTransform(Operator matrix, std::string label)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  const double err = matrix_.unitarity_error();
  if (err > tolerance::kUnitary) {
    throw Error(ErrorKind::NotUnitary, kModule, "basis transform '" + label_ + "' not unitary (error " +
                                                    std::to_string(err) + ")");
  }
}

BasisTransform BasisTransform::inverse() const { return BasisTransform(matrix_.adjoint(), label_ + "^-1"); }

namespace pauli {

Operator identity() { return Operator::identity(2); }

Operator x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return Operator(m);
}

Operator y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return Operator(m);
}

Operator z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return Operator(m);
}

Operator on_spin(const Operator& single, int spin, int n_spins) {
  if (single.dim() != 2 || spin < 0 || spin >= n_spins) {
    throw Error(ErrorKind::InvalidArgument, kModule, "on_spin: bad spin index or operator");
  }
  Operator out = spin == 0 ? single : identity();
  for (int k = 1; k < n_spins; ++k) out = tensor_product(out, k == spin ? single : identity());
  return out;
}

}  // namespace pauli

Vector basis_ket(int index, int dim) {
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return v;
}

Operator tensor_product(const Operator& a, const Operator& b) {
  const Eigen::Index da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  }
  return Operator(std::move(out));
}

Operator expm_hermitian(const Operator& h, double t) {
  const double herm = h.hermiticity_error();
  if (herm > tolerance::kHermitian * std::max(1.0, h.matrix().cwiseAbs().maxCoeff())) {
    throw Error(ErrorKind::NotHermitian, kModule, "expm_hermitian: error " + std::to_string(herm));
  }
  if (t == 0.0) return Operator::identity(h.dim());
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h).matrix());
  const Vector phases = (-kI * t * es.eigenvalues().cast<Complex>()).array().exp();
  return Operator(es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint());
}

Operator unitary_log(const Operator& u, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "unitary_log: t must be positive");
  const double uerr = u.unitarity_error();
  if (uerr > 1e-8) throw Error(ErrorKind::NotUnitary, kModule, "unitary_log: error " + std::to_string(uerr));

  // A unitary is normal, so its complex Schur form is diagonal up to
  // roundoff and the Schur vectors are an orthonormal eigenbasis even when
  // eigenvalues are degenerate.
  Eigen::ComplexSchur<Matrix> schur(u.matrix());
  const Matrix& q = schur.matrixU();
  const Matrix& tri = schur.matrixT();
  Vector lambda(u.dim());
  for (int k = 0; k < u.dim(); ++k) {
    const double phase = std::arg(tri(k, k));
    if (std::numbers::pi - std::abs(phase) < tolerance::kBranchCut) {
      throw Error(ErrorKind::BranchAmbiguity, kModule,
                  "eigenphase " + std::to_string(phase) + " within branch-cut tolerance of +-pi");
    }
    // exp(-i lambda t) = exp(i phase)
    lambda(k) = -phase / t;
  }
  return hermitian_part(Operator(q * lambda.asDiagonal() * q.adjoint()));
}

DensityMatrix evolve(const DensityMatrix& rho, const Operator& u) {
  if (u.dim() != rho.dim()) throw Error(ErrorKind::DimMismatch, kModule, "evolve: dimension mismatch");
  if (!u.is_unitary()) {
    throw Error(ErrorKind::NotUnitary, kModule, "evolve: error " + std::to_string(u.unitarity_error()));
  }
  const Matrix out = u.matrix() * rho.matrix() * u.matrix().adjoint();
  return DensityMatrix(Operator(0.5 * (out + out.adjoint())));
}

namespace {

// Eigenvalues this small are roundoff; their square roots would add ~1e-8
// noise to the fidelity of rank-deficient states.
constexpr double kRankFloor = 64 * std::numeric_limits<double>::epsilon();

}  // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw Error(ErrorKind::DimMismatch, kModule, "fidelity");
  Eigen::SelfAdjointEigenSolver<Matrix> er(rho.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix());
  const auto rank = [](const Eigen::VectorXd& ev) { return (ev.array() > kRankFloor).count(); };
  // Work on the support of the lower-rank state; the formula is symmetric.
  const bool swap = rank(es.eigenvalues()) < rank(er.eigenvalues());
  const auto& support = swap ? es : er;
  const Matrix& other = swap ? rho.matrix() : sigma.matrix();

  std::vector<int> keep;
  for (int k = 0; k < support.eigenvalues().size(); ++k) {
    if (support.eigenvalues()(k) > kRankFloor) keep.push_back(k);
  }
  const int r = static_cast<int>(keep.size());
  Matrix half(other.rows(), r);
  for (int j = 0; j < r; ++j) {
    half.col(j) = support.eigenvectors().col(keep[j]) * std::sqrt(support.eigenvalues()(keep[j]));
  }
  Matrix inner = half.adjoint() * other * half;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> ei(inner, Eigen::EigenvaluesOnly);
  double root_sum = 0.0;
  for (double ev : ei.eigenvalues()) {
    if (ev > kRankFloor) root_sum += std::sqrt(ev);
  }
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

double fidelity(const DensityMatrix& rho, const Vector& psi) {
  if (rho.dim() != psi.size()) throw Error(ErrorKind::DimMismatch, kModule, "fidelity");
  return std::clamp((psi.adjoint() * rho.matrix() * psi)(0, 0).real(), 0.0, 1.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw Error(ErrorKind::DimMismatch, kModule, "trace_distance");
  const Matrix diff = rho.matrix() - sigma.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Operator change_basis(const Operator& m, const BasisTransform& b) {
  if (m.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, kModule, "change_basis");
  return Operator(b.matrix().adjoint() * m.matrix() * b.matrix());
}

DensityMatrix dephase_in_basis(const DensityMatrix& rho, const BasisTransform& b) {
  if (rho.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, kModule, "dephase_in_basis");
  const Matrix in_b = b.matrix().adjoint() * rho.matrix() * b.matrix();
  const Matrix diag = in_b.diagonal().real().cast<Complex>().asDiagonal();
  return DensityMatrix(Operator(b.matrix() * diag * b.matrix().adjoint()));
}

double max_off_diagonal(const Operator& m) {
  double worst = 0.0;
  for (int r = 0; r < m.dim(); ++r) {
    for (int c = 0; c < m.dim(); ++c) {
      if (r != c) worst = std::max(worst, std::abs(m(r, c)));
    }
  }
  return worst;
}

Operator hermitian_part(const Operator& m) { return Operator(0.5 * (m.matrix() + m.matrix().adjoint())); }

Operator psd_sqrt(const Operator& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m).matrix());
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return Operator(es.eigenvectors() * roots.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
}

}  // namespace bellproj
