#include "bellproj/kernels.hpp"

#include <Eigen/Eigenvalues>

namespace bellproj::kernels {

Matrix conjugation_average(const Matrix& rho, std::span<const Matrix> unitaries, std::span<const double> weights,
                           Execution exec) {
  if (unitaries.size() != weights.size()) {
    throw Error(ErrorKind::InvalidArgument, "kernels", "unitaries and weights differ in length");
  }
  const auto terms = evaluate_batch(
      unitaries.size(),
      [&](std::size_t k) -> Matrix { return weights[k] * (unitaries[k] * rho * unitaries[k].adjoint()); }, exec);
  Matrix sum = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& t : terms) sum += t;
  return sum;
}

Matrix time_average(const Matrix& rho, const Matrix& h, std::span<const double> times, Execution exec) {
  if (times.empty()) throw Error(ErrorKind::InvalidArgument, "kernels", "empty time array");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  const Matrix& v = es.eigenvectors();
  const Eigen::VectorXd& lambda = es.eigenvalues();
  const Eigen::Index d = h.rows();

  // Coherence (i, j) in the eigenbasis is multiplied by the average of
  // exp(-i (lambda_i - lambda_j) t_k) over the time array.
  const auto factors = evaluate_batch(
      times.size(),
      [&](std::size_t k) -> Matrix {
        Matrix f(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
          for (Eigen::Index j = 0; j < d; ++j) f(i, j) = std::exp(-kI * ((lambda(i) - lambda(j)) * times[k]));
        }
        return f;
      },
      exec);
  Matrix mean = Matrix::Zero(d, d);
  for (const auto& f : factors) mean += f;
  mean /= static_cast<double>(times.size());

  const Matrix rho_eig = v.adjoint() * rho * v;
  return v * rho_eig.cwiseProduct(mean) * v.adjoint();
}

}  // namespace bellproj::kernels
