#pragma once

// Dense complex-matrix foundation: operators, density matrices, basis
// transforms, matrix functions and state metrics.
//
// Conventions shared by every module:
//   * propagators are U = exp(-i H t) with H in rad/s (hbar = 1);
//   * matrix functions go through the eigendecomposition of a Hermitian
//     matrix, never a power series;
//   * two-spin basis ordering is |00>, |01>, |10>, |11> with spin 1 the
//     most significant (left) tensor factor.

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "bellproj/error.hpp"

namespace bellproj {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

namespace tolerance {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kUnitary = 1e-10;
inline constexpr double kTrace = 1e-10;
inline constexpr double kPsdFloor = -1e-9;
/// Minimum distance of any eigenphase from the +-pi branch cut.
inline constexpr double kBranchCut = 1e-6;
}  // namespace tolerance

/// Square complex matrix of dimension 2^n with finite entries.
class Operator {
 public:
  explicit Operator(Matrix m);

  static Operator identity(int dim);
  static Operator zero(int dim);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

  Operator adjoint() const { return Operator(m_.adjoint()); }
  Complex trace() const { return m_.trace(); }

  /// Largest entrywise |M - M^dagger|.
  double hermiticity_error() const;
  /// Largest entrywise |M^dagger M - I|.
  double unitarity_error() const;
  bool is_hermitian(double tol = tolerance::kHermitian) const { return hermiticity_error() <= tol; }
  bool is_unitary(double tol = tolerance::kUnitary) const { return unitarity_error() <= tol; }

 private:
  Matrix m_;
};

Operator operator+(const Operator& a, const Operator& b);
Operator operator-(const Operator& a, const Operator& b);
Operator operator*(const Operator& a, const Operator& b);
Operator operator*(Complex s, const Operator& a);
Operator operator*(double s, const Operator& a);

/// Largest entrywise |a - b|; throws DimMismatch on differing dimensions.
double max_abs_diff(const Operator& a, const Operator& b);
double frobenius_norm(const Operator& a);

/// Hermitian, unit-trace, positive-semidefinite operator.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op);

  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const noexcept { return op_.dim(); }
  const Operator& op() const noexcept { return op_; }
  const Matrix& matrix() const noexcept { return op_.matrix(); }
  Complex operator()(int row, int col) const { return op_(row, col); }

 private:
  Operator op_;
};

/// Unitary whose columns are the new basis vectors written in the old basis.
class BasisTransform {
 public:
  BasisTransform(Operator matrix, std::string label);

  const Operator& op() const noexcept { return matrix_; }
  const Matrix& matrix() const noexcept { return matrix_.matrix(); }
  const std::string& label() const noexcept { return label_; }
  int dim() const noexcept { return matrix_.dim(); }

  BasisTransform inverse() const;

 private:
  Operator matrix_;
  std::string label_;
};

namespace pauli {
Operator identity();
Operator x();
Operator y();
Operator z();
/// Embeds a single-spin operator acting on `spin` (0-based, 0 = leftmost) into n spins.
Operator on_spin(const Operator& single, int spin, int n_spins);
}  // namespace pauli

/// |b_{n-1} ... b_0> computational basis ket for `index` in a 2^n space.
Vector basis_ket(int index, int dim);

Operator tensor_product(const Operator& a, const Operator& b);

/// exp(-i h t) through the eigendecomposition of h.
Operator expm_hermitian(const Operator& h, double t);

/// Hermitian H with exp(-i H t) = u on the principal branch.
Operator unitary_log(const Operator& u, double t);

DensityMatrix evolve(const DensityMatrix& rho, const Operator& u);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
/// <psi|rho|psi> for a normalised ket.
double fidelity(const DensityMatrix& rho, const Vector& psi);
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// B^dagger m B.
Operator change_basis(const Operator& m, const BasisTransform& b);

/// Removes every coherence of rho in the basis b (ideal projective measurement).
DensityMatrix dephase_in_basis(const DensityMatrix& rho, const BasisTransform& b);

/// Largest |entry| off the diagonal.
double max_off_diagonal(const Operator& m);

/// Hermitian part (M + M^dagger)/2.
Operator hermitian_part(const Operator& m);

/// Square root of a Hermitian PSD operator; small negative eigenvalues are clipped.
Operator psd_sqrt(const Operator& m);

}  // namespace bellproj
