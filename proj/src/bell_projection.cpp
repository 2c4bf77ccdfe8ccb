#include "bellproj/bell_projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bellproj/kernels.hpp"
#include "bellproj/random.hpp"

namespace bellproj {

namespace {

constexpr std::string_view kModule = "bell-projection";
constexpr double kPi = std::numbers::pi;

std::vector<double> pairwise_gaps(const std::vector<double>& spectrum) {
  std::vector<double> gaps;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    for (std::size_t j = i + 1; j < spectrum.size(); ++j) {
      const double g = std::abs(spectrum[i] - spectrum[j]);
      if (g < kDegenerateGapTolerance) {
        throw Error(ErrorKind::DegenerateSpectrum, kModule,
                    "levels " + std::to_string(i) + " and " + std::to_string(j) + " are degenerate");
      }
      gaps.push_back(g);
    }
  }
  return gaps;
}

double gap_residual(const std::vector<double>& times, const std::vector<double>& gaps) {
  double worst = 0.0;
  for (double g : gaps) {
    Complex sum = 0.0;
    for (double t : times) sum += std::exp(kI * (g * t));
    worst = std::max(worst, std::abs(sum) / static_cast<double>(times.size()));
  }
  return worst;
}

// Closed-form residual of the arithmetic grid t_k = k s (Dirichlet kernel).
double grid_residual(double spacing, int n, const std::vector<double>& gaps) {
  double worst = 0.0;
  for (double g : gaps) {
    const double half = 0.5 * g * spacing;
    const double den = std::sin(half);
    const double r = std::abs(den) < 1e-300 ? 1.0 : std::abs(std::sin(n * half) / (n * den));
    worst = std::max(worst, std::min(r, 1.0));
  }
  return worst;
}

template <class F>
double golden_minimize(F&& f, double lo, double hi, int iterations) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iterations; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

std::vector<double> arithmetic_grid(double spacing, int n) {
  std::vector<double> times(n);
  for (int k = 0; k < n; ++k) times[k] = k * spacing;
  return times;
}

// Sum-of-squares coordinate descent on the phase sums S_g = sum_k e^{i g t_k};
// each coordinate update minimises a one-dimensional trigonometric sum.
void refine_coordinates(std::vector<double>& times, const std::vector<double>& gaps, double period, double tol,
                        int budget, Rng& rng) {
  const int n = static_cast<int>(times.size());
  std::vector<double> best = times;
  double best_residual = gap_residual(times, gaps);
  double last_objective = std::numeric_limits<double>::infinity();
  constexpr int kScan = 256;
  for (int sweep = 0; sweep < budget && best_residual >= tol; ++sweep) {
    for (int k = 0; k < n; ++k) {
      std::vector<Complex> rest(gaps.size());
      for (std::size_t gi = 0; gi < gaps.size(); ++gi) {
        Complex s = 0.0;
        for (int m = 0; m < n; ++m) {
          if (m != k) s += std::exp(kI * (gaps[gi] * times[m]));
        }
        rest[gi] = s;
      }
      auto objective = [&](double t) {
        double f = 0.0;
        for (std::size_t gi = 0; gi < gaps.size(); ++gi) f += std::norm(rest[gi] + std::exp(kI * (gaps[gi] * t)));
        return f;
      };
      double best_t = times[k];
      double best_f = objective(best_t);
      const double step = period / kScan;
      for (int s = 0; s < kScan; ++s) {
        const double t = s * step;
        if (const double f = objective(t); f < best_f) {
          best_f = f;
          best_t = t;
        }
      }
      const double lo = std::max(0.0, best_t - step), hi = best_t + step;
      const double refined = golden_minimize(objective, lo, hi, 40);
      times[k] = objective(refined) < best_f ? refined : best_t;
    }
    const double residual = gap_residual(times, gaps);
    if (residual < best_residual) {
      best_residual = residual;
      best = times;
    }
    double objective_total = 0.0;
    for (double g : gaps) {
      Complex s = 0.0;
      for (double t : times) s += std::exp(kI * (g * t));
      objective_total += std::norm(s);
    }
    // Stalled in a local minimum: restart from a random array.
    if (last_objective - objective_total < 1e-12 * std::max(1.0, objective_total)) {
      for (double& t : times) t = rng.uniform(0.0, period);
      last_objective = std::numeric_limits<double>::infinity();
    } else {
      last_objective = objective_total;
    }
  }
  times = best;
}

TimeArray search_time_array(const std::vector<double>& gaps, int n_times, double tol,
                            const TimeArrayOptions& options) {
  if (n_times < 1) throw Error(ErrorKind::InvalidArgument, kModule, "n_times must be >= 1");
  if (gaps.empty()) throw Error(ErrorKind::InvalidArgument, kModule, "no coherence gaps to cancel");
  const double g_min = *std::min_element(gaps.begin(), gaps.end());

  // Scan spacings up to where the smallest gap has wound 8 full turns per step.
  const double s_max = 16.0 * kPi / g_min;
  const int candidates = std::max(options.grid_candidates, 16);
  const double ds = s_max / candidates;
  double best_s = ds;
  double best_r = grid_residual(best_s, n_times, gaps);
  for (int c = 2; c <= candidates; ++c) {
    const double s = c * ds;
    if (const double r = grid_residual(s, n_times, gaps); r < best_r) {
      best_r = r;
      best_s = s;
    }
  }
  best_s = golden_minimize([&](double s) { return grid_residual(s, n_times, gaps); }, best_s - ds, best_s + ds, 80);

  TimeArray out{arithmetic_grid(best_s, n_times), 0.0};
  out.residual = gap_residual(out.times_s, gaps);
  if (out.residual < tol) return out;

  Rng rng(options.seed);
  refine_coordinates(out.times_s, gaps, 2.0 * kPi / g_min * 8.0, tol, options.refinement_budget, rng);
  out.residual = gap_residual(out.times_s, gaps);
  if (out.residual < tol) return out;
  throw Error(ErrorKind::SearchFailed, kModule,
              "best residual " + std::to_string(out.residual) + " not below tolerance " + std::to_string(tol));
}

}  // namespace

void ProjectionScheme::validate() const {
  if (variants.size() < 2) throw Error(ErrorKind::InvalidArgument, kModule, "scheme needs at least two variants");
  double total = 0.0;
  for (const auto& v : variants) {
    if (!(v.weight > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "weights must be positive");
    total += v.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::InvalidArgument, kModule, "weights must sum to 1");
}

double solve_projection_time(double lambda1_rad_s, double lambda2_rad_s) {
  const double gap = std::abs(lambda1_rad_s - lambda2_rad_s);
  if (gap < kDegenerateEigenvalueTolerance) {
    throw Error(ErrorKind::DegenerateEigenvalues, kModule, "lambda1 and lambda2 coincide");
  }
  return 0.5 * kPi / gap;
}

ProjectionScheme canonical_two_variant(const PulseSequence& forward) {
  ProjectionScheme scheme;
  scheme.variants = {{forward, 0.5}, {phase_shift_all(forward, 0.5 * kPi), 0.5}};
  scheme.description = "forward + time-reversed (all pulse phases +90 deg), equal weights";
  return scheme;
}

DensityMatrix project_two_variant(const DensityMatrix& rho, const ProjectionScheme& scheme, const SpinSystem& sys) {
  scheme.validate();
  const auto unitaries = kernels::evaluate_batch(scheme.variants.size(), [&](std::size_t k) -> Matrix {
    return propagator_of(scheme.variants[k].sequence, sys).matrix();
  });
  std::vector<double> weights;
  for (const auto& v : scheme.variants) weights.push_back(v.weight);
  const Matrix out = kernels::conjugation_average(rho.matrix(), unitaries, weights);
  return DensityMatrix(hermitian_part(Operator(out)));
}

double time_array_residual(const std::vector<double>& times_s, const std::vector<double>& spectrum_rad_s) {
  if (times_s.empty()) throw Error(ErrorKind::InvalidArgument, kModule, "empty time array");
  return gap_residual(times_s, pairwise_gaps(spectrum_rad_s));
}

TimeArray compute_time_array(const std::vector<double>& spectrum_rad_s, int n_times, double tol,
                             const TimeArrayOptions& options) {
  return search_time_array(pairwise_gaps(spectrum_rad_s), n_times, tol, options);
}

TimeArray compute_time_array_for_gaps(const std::vector<double>& gaps_rad_s, int n_times, double tol,
                                      const TimeArrayOptions& options) {
  for (double g : gaps_rad_s) {
    if (!(std::abs(g) >= kDegenerateGapTolerance)) {
      throw Error(ErrorKind::DegenerateSpectrum, kModule, "targeted gap is zero");
    }
  }
  std::vector<double> gaps(gaps_rad_s.size());
  std::transform(gaps_rad_s.begin(), gaps_rad_s.end(), gaps.begin(), [](double g) { return std::abs(g); });
  return search_time_array(gaps, n_times, tol, options);
}

DensityMatrix project_general(const DensityMatrix& rho, const Operator& h, const TimeArray& ta) {
  if (h.dim() != rho.dim()) throw Error(ErrorKind::DimMismatch, kModule, "project_general");
  if (!h.is_hermitian(tolerance::kHermitian * std::max(1.0, h.matrix().cwiseAbs().maxCoeff()))) {
    throw Error(ErrorKind::NotHermitian, kModule, "project_general needs a Hermitian generator");
  }
  const Matrix out = kernels::time_average(rho.matrix(), h.matrix(), ta.times_s);
  return DensityMatrix(hermitian_part(Operator(out)));
}

}  // namespace bellproj
