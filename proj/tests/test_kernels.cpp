#include <doctest.h>

#include <omp.h>

#include <stdexcept>
#include <vector>

#include "bellproj/kernels.hpp"
#include "bellproj/random.hpp"
#include "support.hpp"

using namespace bellproj;
using testing::max_diff;

namespace {

std::vector<Matrix> random_unitaries(Rng& rng, int n) {
  std::vector<Matrix> out;
  for (int k = 0; k < n; ++k) out.push_back(expm_hermitian(random_hermitian(rng, 4), 1.0).matrix());
  return out;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a.data()[k].real() != b.data()[k].real() || a.data()[k].imag() != b.data()[k].imag()) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("conjugation average matches the direct sum") {
  Rng rng(71);
  const Matrix rho = random_density_matrix(rng, 4).matrix();
  const auto us = random_unitaries(rng, 37);
  std::vector<double> w(us.size());
  for (double& x : w) x = rng.uniform();
  Matrix direct = Matrix::Zero(4, 4);
  for (std::size_t k = 0; k < us.size(); ++k) direct += w[k] * us[k] * rho * us[k].adjoint();
  const Matrix serial = kernels::conjugation_average(rho, us, w, kernels::Execution::serial);
  CHECK(max_diff(serial, direct) < 1e-13);
}

TEST_CASE("time average matches per-time exponentials") {
  Rng rng(72);
  const Matrix rho = random_density_matrix(rng, 4).matrix();
  const Operator h = random_hermitian(rng, 4, 100.0);
  std::vector<double> times;
  for (int k = 0; k < 25; ++k) times.push_back(rng.uniform(0.0, 0.1));
  Matrix direct = Matrix::Zero(4, 4);
  for (double t : times) {
    const Matrix u = expm_hermitian(h, t).matrix();
    direct += u * rho * u.adjoint();
  }
  direct /= static_cast<double>(times.size());
  CHECK(max_diff(kernels::time_average(rho, h.matrix(), times, kernels::Execution::serial), direct) < 1e-12);
}

TEST_CASE("serial and parallel paths are bitwise identical") {
  Rng rng(73);
  const Matrix rho = random_density_matrix(rng, 4).matrix();
  const auto us = random_unitaries(rng, 101);
  std::vector<double> w(us.size(), 1.0 / us.size());
  const Matrix h = random_hermitian(rng, 4, 30.0).matrix();
  std::vector<double> times;
  for (int k = 0; k < 203; ++k) times.push_back(rng.uniform(0.0, 1.0));

  const Matrix cs = kernels::conjugation_average(rho, us, w, kernels::Execution::serial);
  const Matrix ts = kernels::time_average(rho, h, times, kernels::Execution::serial);
  for (int threads : {1, 2, 4, 7}) {
    omp_set_num_threads(threads);
    CHECK(bitwise_equal(kernels::conjugation_average(rho, us, w, kernels::Execution::parallel), cs));
    CHECK(bitwise_equal(kernels::time_average(rho, h, times, kernels::Execution::parallel), ts));
    const auto batch = kernels::evaluate_batch(50, [&](std::size_t i) { return std::sin(0.1 * i) * times[i]; });
    const auto serial =
        kernels::evaluate_batch(50, [&](std::size_t i) { return std::sin(0.1 * i) * times[i]; }, kernels::Execution::serial);
    CHECK(batch == serial);
  }
}

TEST_CASE("batch failures surface the lowest failing index") {
  auto f = [](std::size_t i) -> int {
    if (i == 7 || i == 19) throw std::runtime_error("item " + std::to_string(i));
    return static_cast<int>(i);
  };
  for (auto exec : {kernels::Execution::serial, kernels::Execution::parallel}) {
    try {
      kernels::evaluate_batch(30, f, exec);
      FAIL("expected a failure");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "item 7");
    }
  }
}

}
