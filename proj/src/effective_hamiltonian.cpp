#include "bellproj/effective_hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace bellproj {

namespace {

constexpr std::string_view kModule = "effective-hamiltonian";

Matrix bell_matrix() { return bell_transform().matrix(); }

// Rotates an orthonormal basis of a degenerate eigenspace onto the Bell
// vectors that have the largest weight in it (orthogonal Procrustes).
void align_cluster(Matrix& vecs, Eigen::Index first, Eigen::Index size, const Matrix& bell) {
  const Matrix block = vecs.middleCols(first, size);
  const Matrix proj = block.adjoint() * bell;  // size x 4
  std::vector<int> order(4);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int l, int r) { return proj.col(l).squaredNorm() > proj.col(r).squaredNorm() + 1e-12; });
  Matrix selected(size, size);
  for (Eigen::Index k = 0; k < size; ++k) selected.col(k) = proj.col(order[k]);
  Eigen::JacobiSVD<Matrix> svd(selected, Eigen::ComputeFullU | Eigen::ComputeFullV);
  vecs.middleCols(first, size) = block * (svd.matrixU() * svd.matrixV().adjoint());
}

}  // namespace

double EffectiveHamiltonian::phi_gap() const {
  return std::abs(eigenvalue(BellState::phi_plus) - eigenvalue(BellState::phi_minus));
}

EffectiveHamiltonian label_by_bell_overlap(const Operator& h, double cycle_time_s) {
  if (h.dim() != 4) throw Error(ErrorKind::DimMismatch, kModule, "Bell labelling needs a two-spin operator");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h).matrix());
  const Eigen::VectorXd& lambda = es.eigenvalues();
  Matrix vecs = es.eigenvectors();
  const Matrix bell = bell_matrix();

  for (Eigen::Index start = 0; start < 4;) {
    Eigen::Index end = start + 1;
    while (end < 4 && lambda(end) - lambda(end - 1) < kDegeneracyTolerance) ++end;
    if (end - start > 1) align_cluster(vecs, start, end - start, bell);
    start = end;
  }

  Eigen::Matrix4d overlap;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) overlap(i, j) = std::norm(bell.col(j).dot(vecs.col(i)));
  }

  std::vector<std::tuple<double, int, int>> pairs;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) pairs.emplace_back(overlap(i, j), i, j);
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& l, const auto& r) { return std::get<0>(l) > std::get<0>(r); });

  std::array<int, 4> eig_for_bell{-1, -1, -1, -1};
  std::array<bool, 4> eig_used{};
  for (const auto& [value, i, j] : pairs) {
    if (eig_used[i] || eig_for_bell[j] >= 0) continue;
    if (value > kAssignmentTolerance) {
      for (int other = 0; other < 4; ++other) {
        if (other != i && !eig_used[other] && std::abs(overlap(other, j) - value) < kAssignmentTolerance) {
          throw Error(ErrorKind::AssignmentAmbiguity, kModule,
                      "eigenvectors " + std::to_string(i) + " and " + std::to_string(other) + " both claim " +
                          std::string(bell_label(static_cast<BellState>(j))));
        }
      }
    }
    eig_for_bell[j] = i;
    eig_used[i] = true;
  }

  EffectiveHamiltonian out;
  out.h_eff = hermitian_part(h);
  out.cycle_time_s = cycle_time_s;
  for (int j = 0; j < 4; ++j) {
    const int i = eig_for_bell[j];
    Vector v = vecs.col(i);
    const Complex phase = bell.col(j).dot(v);
    if (std::abs(phase) > 1e-12) v *= std::conj(phase) / std::abs(phase);
    out.eigenvalues[j] = lambda(i);
    out.eigenvectors[j] = v;
    out.bell_overlaps[j] = overlap(i, j);
  }
  return out;
}

EffectiveHamiltonian extract_effective(const PulseSequence& seq, const SpinSystem& sys) {
  const double t = seq.cycle_duration();
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "cycle duration must be positive");
  const Operator u = cycle_propagator(seq, sys);
  return label_by_bell_overlap(unitary_log(u, t), t);
}

Operator magnus_zeroth(const PulseSequence& seq, const SpinSystem& sys) {
  seq.validate();
  if (!seq.all_delta_pulses()) {
    throw Error(ErrorKind::FinitePulse, kModule, "zeroth-order average requires delta pulses");
  }
  const Operator h_int = internal_hamiltonian(sys);
  const int dim = h_int.dim();
  Matrix u_rf = Matrix::Identity(dim, dim);
  Matrix sum = Matrix::Zero(dim, dim);
  double total = 0.0;
  for (const auto& e : seq.events) {
    if (const auto* d = std::get_if<Delay>(&e)) {
      sum += d->duration_s * (u_rf.adjoint() * h_int.matrix() * u_rf);
      total += d->duration_s;
    } else {
      u_rf = element_propagator(e, sys).matrix() * u_rf;
    }
  }
  if (!(total > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "sequence has no free evolution");
  return hermitian_part(Operator(sum / total));
}

double distance_to_target(const Operator& h, const Operator& target) {
  if (h.dim() != target.dim()) throw Error(ErrorKind::DimMismatch, kModule, "distance_to_target");
  const double norm = frobenius_norm(target);
  if (norm == 0.0) throw Error(ErrorKind::ZeroTarget, kModule, "target has zero norm");
  Matrix diff = h.matrix() - target.matrix();
  const double shift = diff.trace().real() / static_cast<double>(h.dim());
  diff.diagonal().array() -= shift;
  return diff.norm() / norm;
}

double distance_to_target(const EffectiveHamiltonian& e, const Operator& target) {
  return distance_to_target(e.h_eff, target);
}

}  // namespace bellproj
