#include "bellproj/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "bellproj/bell_projection.hpp"
#include "bellproj/kernels.hpp"
#include "bellproj/random.hpp"

namespace bellproj {

namespace {

constexpr std::string_view kModule = "optimizer";
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr std::size_t kRestartSamples = 32;
constexpr std::size_t kLocalEvaluationsPerParameter = 100;
constexpr double kHopScale = 0.1;

struct ParameterRef {
  enum class Field { delay, phase, pulse_width } field;
  int index = 0;
};

ParameterRef parse_path(const std::string& path) {
  auto indexed = [&](std::string_view prefix, int count) -> std::optional<int> {
    if (path.rfind(prefix, 0) != 0 || path.back() != ']') return std::nullopt;
    const std::string digits = path.substr(prefix.size(), path.size() - prefix.size() - 1);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
    const int k = std::stoi(digits);
    if (k < 0 || k >= count) return std::nullopt;
    return k;
  };
  if (path == "pulse_width") return {ParameterRef::Field::pulse_width, 0};
  if (auto k = indexed("delays[", 9)) return {ParameterRef::Field::delay, *k};
  if (auto k = indexed("phases[", 8)) return {ParameterRef::Field::phase, *k};
  throw Error(ErrorKind::InvalidArgument, kModule, "unknown parameter path '" + path + "'");
}

void set_parameter(EightPulseCycleSpec& spec, const ParameterRef& ref, double value, bool mirror) {
  switch (ref.field) {
    case ParameterRef::Field::delay:
      spec.delays_s[ref.index] = value;
      if (mirror) spec.delays_s[8 - ref.index] = value;
      break;
    case ParameterRef::Field::phase: spec.phases_rad[ref.index] = value; break;
    case ParameterRef::Field::pulse_width: spec.pulse_width_s = value; break;
  }
}

double get_parameter(const EightPulseCycleSpec& spec, const ParameterRef& ref) {
  switch (ref.field) {
    case ParameterRef::Field::delay: return spec.delays_s[ref.index];
    case ParameterRef::Field::phase: return spec.phases_rad[ref.index];
    case ParameterRef::Field::pulse_width: return spec.pulse_width_s;
  }
  return 0.0;
}

EightPulseCycleSpec scale_delays(EightPulseCycleSpec spec, double s) {
  for (double& d : spec.delays_s) d *= s;
  return spec;
}

EightPulseCycleSpec normalise_cycle(const EightPulseCycleSpec& spec, double cycle_time_s) {
  if (!(cycle_time_s > 0.0)) return spec;
  const double delay_sum = spec.cycle_time() - 8.0 * spec.pulse_width_s;
  if (!(delay_sum > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "cannot rescale a cycle without delays");
  return scale_delays(spec, (cycle_time_s - 8.0 * spec.pulse_width_s) / delay_sum);
}

EightPulseCycleSpec timed_candidate(const EightPulseCycleSpec& spec, const OptimizationProblem& problem);

double timing_mismatch(const EightPulseCycleSpec& spec, const SpinSystem& sys, int repeat) {
  const EffectiveHamiltonian e = extract_effective(eight_pulse_cycle(spec), sys);
  return repeat * spec.cycle_time() * e.phi_gap() - kHalfPi;
}

// Box-normalised coordinates: u in [0, 1]^n.
class Search {
 public:
  Search(const OptimizationProblem& problem, int budget) : problem_(problem), budget_(budget) {}

  int remaining() const { return budget_ - static_cast<int>(trace_.size()); }

  std::vector<double> to_values(const std::vector<double>& u) const {
    std::vector<double> x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto& p = problem_.free_parameters[i];
      x[i] = p.lower + u[i] * (p.upper - p.lower);
    }
    return x;
  }

  // Evaluates as many of the points as the budget allows, in order.
  std::vector<double> evaluate(const std::vector<std::vector<double>>& points) {
    const std::size_t n = std::min<std::size_t>(points.size(), static_cast<std::size_t>(std::max(remaining(), 0)));
    const auto values = kernels::evaluate_batch(n, [&](std::size_t k) {
      return evaluate_objective(apply_parameters(problem_, to_values(points[k])), problem_);
    });
    for (std::size_t k = 0; k < n; ++k) {
      if (values[k] < best_value_) {
        best_value_ = values[k];
        best_u_ = points[k];
      }
      trace_.emplace_back(static_cast<int>(trace_.size()), best_value_);
    }
    return values;
  }

  std::optional<double> evaluate_one(const std::vector<double>& u) {
    if (remaining() <= 0) return std::nullopt;
    return evaluate({u}).front();
  }

  const std::vector<double>& best_u() const { return best_u_; }
  double best_value() const { return best_value_; }
  std::vector<std::pair<int, double>> take_trace() { return std::move(trace_); }

 private:
  const OptimizationProblem& problem_;
  int budget_;
  std::vector<std::pair<int, double>> trace_;
  std::vector<double> best_u_;
  double best_value_ = kInf;
};

std::vector<double> clamp_unit(std::vector<double> u) {
  for (double& v : u) v = std::clamp(v, 0.0, 1.0);
  return u;
}

struct Vertex {
  std::vector<double> u;
  double f;
};

void nelder_mead(Search& search, std::vector<double> start, int max_evaluations) {
  const std::size_t n = start.size();
  const int stop_at = search.remaining() - max_evaluations;
  constexpr double kStep = 0.1;
  std::vector<std::vector<double>> points{start};
  for (std::size_t i = 0; i < n; ++i) {
    auto p = start;
    p[i] += p[i] + kStep <= 1.0 ? kStep : -kStep;
    points.push_back(p);
  }
  const auto values = search.evaluate(points);
  if (values.size() < points.size()) return;
  std::vector<Vertex> simplex;
  for (std::size_t i = 0; i <= n; ++i) simplex.push_back({points[i], values[i]});

  auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return clamp_unit(out);
  };

  while (search.remaining() > 0 && search.remaining() > stop_at) {
    std::stable_sort(simplex.begin(), simplex.end(), [](const Vertex& l, const Vertex& r) { return l.f < r.f; });
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) diameter = std::max(diameter, std::abs(simplex[i].u[k] - simplex[0].u[k]));
    }
    const double spread = simplex[n].f - simplex[0].f;
    if (diameter < 1e-9 || (std::isfinite(spread) && spread <= 1e-12 * (1.0 + std::abs(simplex[0].f)) &&
                            diameter < 1e-5)) {
      return;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i].u[k] / static_cast<double>(n);
    }
    const Vertex& worst = simplex[n];
    const auto reflected = combine(centroid, worst.u, -1.0);
    const auto fr = search.evaluate_one(reflected);
    if (!fr) return;

    if (*fr < simplex[0].f) {
      const auto expanded = combine(centroid, worst.u, -2.0);
      const auto fe = search.evaluate_one(expanded);
      if (!fe) return;
      simplex[n] = *fe < *fr ? Vertex{expanded, *fe} : Vertex{reflected, *fr};
      continue;
    }
    if (*fr < simplex[n - 1].f) {
      simplex[n] = {reflected, *fr};
      continue;
    }
    const bool outside = *fr < worst.f;
    const auto contracted = outside ? combine(centroid, reflected, 0.5) : combine(centroid, worst.u, 0.5);
    const auto fc = search.evaluate_one(contracted);
    if (!fc) return;
    if (*fc < std::min(*fr, worst.f)) {
      simplex[n] = {contracted, *fc};
      continue;
    }
    std::vector<std::vector<double>> shrunk;
    for (std::size_t i = 1; i <= n; ++i) shrunk.push_back(combine(simplex[0].u, simplex[i].u, 0.5));
    const auto fs = search.evaluate(shrunk);
    if (fs.size() < shrunk.size()) return;
    for (std::size_t i = 1; i <= n; ++i) simplex[i] = {shrunk[i - 1], fs[i - 1]};
  }
}

}  // namespace

void OptimizationProblem::validate() const {
  base_spec.validate();
  system.validate();
  if (free_parameters.empty()) throw Error(ErrorKind::InvalidArgument, kModule, "no free parameters");
  for (const auto& p : free_parameters) {
    parse_path(p.path);
    if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper)) {
      throw Error(ErrorKind::InvalidArgument, kModule, "bounds of '" + p.path + "' must be finite with lower < upper");
    }
  }
  if (objective != ObjectiveKind::state_infidelity && frobenius_norm(target) == 0.0) {
    throw Error(ErrorKind::ZeroTarget, kModule, "objective needs a nonzero target Hamiltonian");
  }
  if (!(timing_weight >= 0.0 && mix_weight + timing_weight <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "timing_weight must be >= 0 with mix_weight + timing_weight <= 1");
  }
  if (timing_weight > 0.0 && timing_repeat < 1) {
    throw Error(ErrorKind::InvalidArgument, kModule, "timing_weight needs timing_repeat >= 1");
  }
  if (!(mix_weight >= 0.0 && mix_weight <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "mix_weight must lie in [0, 1]");
  }
  if (timing_repeat < 0) throw Error(ErrorKind::InvalidArgument, kModule, "timing_repeat must be >= 0");
  if (!(max_cycle_time_s >= 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "max_cycle_time_s must be >= 0");
  if (!(fixed_cycle_time_s >= 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "fixed_cycle_time_s must be >= 0");
  if (fixed_cycle_time_s > 0.0 && !(fixed_cycle_time_s > 8.0 * base_spec.pulse_width_s)) {
    throw Error(ErrorKind::InvalidArgument, kModule, "fixed_cycle_time_s must exceed the eight pulse widths");
  }
}

std::vector<FreeParameter> default_delay_parameters(const EightPulseCycleSpec& base, double lower_fraction,
                                                    double upper_fraction, bool mirror_symmetric) {
  std::vector<FreeParameter> out;
  const int count = mirror_symmetric ? 5 : 9;
  for (int k = 0; k < count; ++k) {
    out.push_back({"delays[" + std::to_string(k) + "]", lower_fraction * base.delays_s[k],
                   upper_fraction * base.delays_s[k]});
  }
  return out;
}

CycleTiming solve_two_cycle_timing(const EffectiveHamiltonian& e) {
  const double gap = e.phi_gap();
  if (gap < kDegenerateEigenvalueTolerance) {
    throw Error(ErrorKind::DegenerateEigenvalues, kModule, "Phi+ and Phi- eigenvalues coincide");
  }
  if (!(e.cycle_time_s > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "cycle time must be positive");
  CycleTiming out;
  out.total_time_s = kHalfPi / gap;
  out.repeat = std::max(1, static_cast<int>(std::lround(out.total_time_s / e.cycle_time_s)));
  out.cycle_time_s = out.total_time_s / out.repeat;
  out.scale = out.cycle_time_s / e.cycle_time_s;
  return out;
}

EightPulseCycleSpec fit_cycle_timing(const EightPulseCycleSpec& spec, const SpinSystem& sys, int repeat) {
  spec.validate();
  if (repeat < 1) throw Error(ErrorKind::InvalidArgument, kModule, "repeat must be >= 1");
  const double delay_sum = spec.cycle_time() - 8.0 * spec.pulse_width_s;
  if (!(delay_sum > 0.0)) throw Error(ErrorKind::InvalidArgument, kModule, "cannot rescale a cycle without delays");

  auto linear_guess = [&](double s, double gap) {
    const double wanted_cycle = kHalfPi / (repeat * gap);
    return std::max((wanted_cycle - 8.0 * spec.pulse_width_s) / delay_sum, 1e-3 * s);
  };

  double s0 = 1.0;
  double f0 = timing_mismatch(scale_delays(spec, s0), sys, repeat);
  double s1 = linear_guess(s0, extract_effective(eight_pulse_cycle(spec), sys).phi_gap());
  for (int it = 0; it < 60; ++it) {
    const EightPulseCycleSpec trial = scale_delays(spec, s1);
    const double f1 = timing_mismatch(trial, sys, repeat);
    if (std::abs(f1) < 1e-13 * kHalfPi) {
      EightPulseCycleSpec out = trial;
      out.repeat = repeat;
      return out;
    }
    double next = (f1 != f0) ? s1 - f1 * (s1 - s0) / (f1 - f0) : s1;
    if (!(next > 0.0) || !std::isfinite(next)) next = 0.5 * s1;
    s0 = s1;
    f0 = f1;
    s1 = next;
  }
  throw Error(ErrorKind::SearchFailed, kModule, "timing fit did not converge");
}

namespace {

EightPulseCycleSpec timed_candidate(const EightPulseCycleSpec& spec, const OptimizationProblem& problem) {
  if (problem.fixed_cycle_time_s > 0.0) return normalise_cycle(spec, problem.fixed_cycle_time_s);
  if (problem.timing_repeat > 0) return fit_cycle_timing(spec, problem.system, problem.timing_repeat);
  return spec;
}

}  // namespace

EightPulseCycleSpec apply_parameters(const OptimizationProblem& problem, std::span<const double> values) {
  if (values.size() != problem.free_parameters.size()) {
    throw Error(ErrorKind::InvalidArgument, kModule, "parameter count mismatch");
  }
  EightPulseCycleSpec spec = problem.base_spec;
  for (std::size_t i = 0; i < values.size(); ++i) {
    set_parameter(spec, parse_path(problem.free_parameters[i].path), values[i], problem.mirror_symmetric);
  }
  return spec;
}

std::vector<double> parameters_of(const OptimizationProblem& problem, const EightPulseCycleSpec& spec) {
  std::vector<double> out;
  for (const auto& p : problem.free_parameters) out.push_back(get_parameter(spec, parse_path(p.path)));
  return out;
}

ObjectiveBreakdown evaluate_objective_detailed(const EightPulseCycleSpec& spec, const OptimizationProblem& problem) {
  ObjectiveBreakdown out;
  try {
    const EightPulseCycleSpec timed = timed_candidate(spec, problem);
    if (problem.max_cycle_time_s > 0.0 && timed.cycle_time() > problem.max_cycle_time_s) {
      out.value = kInf;
      return out;
    }
    const EffectiveHamiltonian e = extract_effective(eight_pulse_cycle(timed), problem.system);
    out.fidelity_phi_plus = e.overlap(BellState::phi_plus);
    out.fidelity_phi_minus = e.overlap(BellState::phi_minus);
    out.lambda_gap = e.phi_gap();
    if (problem.timing_repeat > 0) {
      out.timing_error = std::abs(problem.timing_repeat * timed.cycle_time() * out.lambda_gap / kHalfPi - 1.0);
    }
    const double infidelity = 1.0 - std::min(out.fidelity_phi_plus, out.fidelity_phi_minus);
    if (problem.objective != ObjectiveKind::state_infidelity) {
      out.hamiltonian_distance = distance_to_target(e, problem.target);
    }
    switch (problem.objective) {
      case ObjectiveKind::hamiltonian_distance: out.value = out.hamiltonian_distance; break;
      case ObjectiveKind::state_infidelity: out.value = infidelity; break;
      case ObjectiveKind::weighted_mix:
        out.value = problem.mix_weight * out.hamiltonian_distance + problem.timing_weight * out.timing_error +
                    (1.0 - problem.mix_weight - problem.timing_weight) * infidelity;
        break;
    }
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::BranchAmbiguity && err.kind() != ErrorKind::SearchFailed &&
        err.kind() != ErrorKind::AssignmentAmbiguity && err.kind() != ErrorKind::InvalidArgument) {
      throw;
    }
    out.value = kInf;
    out.branch_ambiguity = err.kind() == ErrorKind::BranchAmbiguity;
  }
  return out;
}

double evaluate_objective(const EightPulseCycleSpec& spec, const OptimizationProblem& problem) {
  return evaluate_objective_detailed(spec, problem).value;
}

OptimizationResult optimize(const OptimizationProblem& problem, int budget, std::uint64_t seed) {
  problem.validate();
  if (budget < 1) throw Error(ErrorKind::InvalidArgument, kModule, "budget must be >= 1");

  const std::size_t n = problem.free_parameters.size();
  std::vector<double> start(n);
  const auto base_values = parameters_of(problem, problem.base_spec);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = problem.free_parameters[i];
    start[i] = std::clamp((base_values[i] - p.lower) / (p.upper - p.lower), 0.0, 1.0);
  }

  Search search(problem, budget);
  Rng rng(seed);
  OptimizationResult result;
  result.seed = seed;
  while (search.remaining() > 0) {
    nelder_mead(search, start, static_cast<int>(kLocalEvaluationsPerParameter * n));
    if (search.remaining() <= 0) break;
    ++result.restarts;
    // Restarts alternate between screening uniform points and screening
    // perturbations of the best point so far; the descent starts from the
    // best screened candidate.
    const bool hop = result.restarts % 2 == 0 && !search.best_u().empty();
    std::vector<std::vector<double>> candidates(kRestartSamples, std::vector<double>(n));
    for (auto& c : candidates) {
      for (std::size_t i = 0; i < n; ++i) {
        c[i] = hop ? std::clamp(search.best_u()[i] + kHopScale * rng.normal(), 0.0, 1.0) : rng.uniform();
      }
    }
    const auto values = search.evaluate(candidates);
    if (values.empty()) break;
    const auto best = std::min_element(values.begin(), values.end()) - values.begin();
    start = candidates[static_cast<std::size_t>(best)];
  }

  result.trace = search.take_trace();
  result.evaluations = static_cast<int>(result.trace.size());
  const auto best_u = search.best_u().empty() ? start : search.best_u();
  result.best_spec = apply_parameters(problem, search.to_values(best_u));
  const ObjectiveBreakdown b = evaluate_objective_detailed(result.best_spec, problem);
  result.objective_value = b.value;
  result.fidelity_phi_plus = b.fidelity_phi_plus;
  result.fidelity_phi_minus = b.fidelity_phi_minus;
  result.lambda_gap = b.lambda_gap;
  result.timed_spec = std::isfinite(b.value) ? timed_candidate(result.best_spec, problem) : result.best_spec;
  result.timed_spec.repeat = problem.timing_repeat > 0 ? problem.timing_repeat : result.best_spec.repeat;
  return result;
}

}  // namespace bellproj
