#pragma once

// Seeded generators used by tomography noise, optimizer restarts and the
// randomized test suites. Uniform and normal variates are derived from the
// raw mt19937_64 stream by hand so results do not depend on the standard
// library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "bellproj/quantum_core.hpp"

namespace bellproj {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  Complex complex_normal() { return {normal(), normal()}; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Matrix ginibre(Rng& rng, int rows, int cols) {
  Matrix g(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) g(r, c) = rng.complex_normal();
  }
  return g;
}

/// Hermitian matrix with i.i.d. Gaussian entries scaled by `scale`.
inline Operator random_hermitian(Rng& rng, int dim, double scale = 1.0) {
  const Matrix g = ginibre(rng, dim, dim);
  return Operator(0.5 * scale * (g + g.adjoint()));
}

/// Density matrix of the given rank from the induced Hilbert-Schmidt measure.
inline DensityMatrix random_density_matrix(Rng& rng, int dim, int rank = -1) {
  const Matrix g = ginibre(rng, dim, rank <= 0 ? dim : rank);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(Operator(0.5 * (rho + rho.adjoint())));
}

inline Vector random_ket(Rng& rng, int dim) {
  Vector v = ginibre(rng, dim, 1).col(0);
  return v / v.norm();
}

}  // namespace bellproj
