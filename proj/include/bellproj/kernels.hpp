#pragma once

// Data-parallel kernels. Each kernel has a serial reference path and an
// OpenMP path; both produce per-item results in index order and reduce them
// sequentially, so the two paths are bitwise identical and run-to-run
// deterministic regardless of thread count.

#include <cstddef>
#include <exception>
#include <span>
#include <type_traits>
#include <vector>

#include "bellproj/quantum_core.hpp"

namespace bellproj::kernels {

enum class Execution { serial, parallel };

/// sum_k w_k U_k rho U_k^dagger.
Matrix conjugation_average(const Matrix& rho, std::span<const Matrix> unitaries, std::span<const double> weights,
                           Execution exec = Execution::parallel);

/// (1/N) sum_k exp(-i h t_k) rho exp(i h t_k), evaluated in the eigenbasis of h.
Matrix time_average(const Matrix& rho, const Matrix& h, std::span<const double> times,
                    Execution exec = Execution::parallel);

/// Calls f(i) for i in [0, n) and returns the results in index order.
template <class F>
auto evaluate_batch(std::size_t n, F&& f, Execution exec = Execution::parallel)
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  std::vector<std::invoke_result_t<F&, std::size_t>> out(n);
  if (exec == Execution::serial) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  // Exceptions must not escape the parallel region; the one from the lowest
  // index is rethrown so failures match the serial path.
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace bellproj::kernels
