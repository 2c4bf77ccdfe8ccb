#pragma once

// Small oracles shared by the test files. Pauli algebra is rebuilt here from
// raw Eigen matrices so the library constructions are checked against
// something they do not share code with.

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "bellproj/quantum_core.hpp"

namespace testing {

using bellproj::Complex;
using bellproj::Matrix;

inline Matrix sx() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix sy() {
  Matrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
inline Matrix sz() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
inline Matrix id2() { return Matrix::Identity(2, 2); }

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix xx() { return kron(sx(), sx()); }
inline Matrix yy() { return kron(sy(), sy()); }
inline Matrix zz() { return kron(sz(), sz()); }

inline double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Pure-state Bell projectors written out by hand.
inline Matrix bell_columns() {
  const double r = 1.0 / std::sqrt(2.0);
  Matrix b(4, 4);
  b << r, r, 0, 0,
       0, 0, r, r,
       0, 0, r, -r,
       r, -r, 0, 0;
  return b;
}

inline Matrix ket_projector(int index) {
  Matrix m = Matrix::Zero(4, 4);
  m(index, index) = 1.0;
  return m;
}

}  // namespace testing
