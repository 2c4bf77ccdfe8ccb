#include "bellproj/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "bellproj/bell_projection.hpp"
#include "bellproj/effective_hamiltonian.hpp"
#include "bellproj/tomography.hpp"

namespace bellproj {

namespace {

constexpr std::string_view kModule = "cli-runner";
constexpr double kPi = std::numbers::pi;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Config, kModule, (path.empty() ? std::string("<root>") : path) + ": " + what);
}

// Walks one JSON object, remembering which keys were consumed so that
// anything left over can be reported as unknown.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return path_ + "/" + key; }

  const Json& raw(const std::string& key) {
    if (!j_.contains(key)) fail(path(key), "missing required field");
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = {}) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(path(key), "missing required field");
    }
    const Json& v = raw(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path(key), "must be finite");
    return x;
  }

  long long integer(const std::string& key, std::optional<long long> fallback = {}) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(path(key), "missing required field");
    }
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(path(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = {}) {
    if (!has(key)) {
      if (fallback) return *fallback;
      fail(path(key), "missing required field");
    }
    const Json& v = raw(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }

  template <std::size_t N>
  std::array<double, N> numbers(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != N) fail(path(key), "expected an array of " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t k = 0; k < N; ++k) {
      if (!v[k].is_number() || !std::isfinite(v[k].get<double>())) {
        fail(path(key) + "/" + std::to_string(k), "expected a finite number");
      }
      out[k] = v[k].get<double>();
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) fail(path(key), "unknown field");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class E, std::size_t N>
E choose(const std::string& value, const std::array<std::pair<std::string_view, E>, N>& options,
         const std::string& path) {
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  }
  fail(path, "'" + value + "' is not one of " + allowed);
}

constexpr std::array<std::pair<std::string_view, CouplingModel>, 2> kCouplings = {
    {{"dipolar", CouplingModel::dipolar}, {"weak_zz", CouplingModel::weak_zz}}};
constexpr std::array<std::pair<std::string_view, InitialStateKind>, 4> kInitialKinds = {
    {{"pseudopure_00", InitialStateKind::pseudopure_00},
     {"bell_phi_plus", InitialStateKind::bell_phi_plus},
     {"bell_phi_minus", InitialStateKind::bell_phi_minus},
     {"custom", InitialStateKind::custom}}};
constexpr std::array<std::pair<std::string_view, PreparationKind>, 2> kPreparations = {
    {{"ideal", PreparationKind::ideal}, {"sequence", PreparationKind::sequence}}};
constexpr std::array<std::pair<std::string_view, ProjectionKind>, 3> kProjections = {
    {{"two_variant", ProjectionKind::two_variant},
     {"time_array", ProjectionKind::time_array},
     {"ideal_oracle", ProjectionKind::ideal_oracle}}};
constexpr std::array<std::pair<std::string_view, ObjectiveKind>, 3> kObjectives = {
    {{"hamiltonian_distance", ObjectiveKind::hamiltonian_distance},
     {"state_infidelity", ObjectiveKind::state_infidelity},
     {"weighted_mix", ObjectiveKind::weighted_mix}}};

template <class E, std::size_t N>
std::string name_of(E value, const std::array<std::pair<std::string_view, E>, N>& options) {
  for (const auto& [name, e] : options) {
    if (e == value) return std::string(name);
  }
  return "";
}

SpinSystem parse_system(const Json& j, const std::string& path) {
  Reader r(j, path);
  SpinSystem sys;
  sys.shift_1_hz = r.number("shift_1_hz", 0.0);
  sys.shift_2_hz = r.number("shift_2_hz", 0.0);
  sys.splitting_hz = r.number("splitting_hz");
  if (!(sys.splitting_hz > 0.0)) fail(r.path("splitting_hz"), "must be > 0");
  sys.coupling = choose(r.string("coupling", "dipolar"), kCouplings, r.path("coupling"));
  r.finish();
  return sys;
}

InitialStateConfig parse_initial(const Json& j, const std::string& path) {
  Reader r(j, path);
  InitialStateConfig s;
  s.kind = choose(r.string("kind"), kInitialKinds, r.path("kind"));
  if (s.kind == InitialStateKind::custom) {
    s.matrix = operator_from_json(r.raw("matrix"), r.path("matrix"));
    if (s.matrix->dim() != 4) fail(r.path("matrix"), "expected a two-spin (4x4) matrix");
    try {
      DensityMatrix check(*s.matrix);
    } catch (const Error& err) {
      fail(r.path("matrix"), err.what());
    }
  } else {
    s.ground_population = r.number("ground_population", 1.0);
    if (!(s.ground_population >= 0.25 && s.ground_population <= 1.0)) {
      fail(r.path("ground_population"), "must lie in [0.25, 1]");
    }
  }
  r.finish();
  return s;
}

CycleConfig parse_cycle(const Json& j, const std::string& path) {
  Reader r(j, path);
  CycleConfig c;
  c.reference = r.string("reference", "");
  c.pulse_width_us = r.number("pulse_width_us", 0.0);
  if (c.pulse_width_us < 0.0) fail(r.path("pulse_width_us"), "must be >= 0");
  const long long repeat = r.integer("repeat", 2);
  if (repeat < 1 || repeat > 1000) fail(r.path("repeat"), "must lie in [1, 1000]");
  c.repeat = static_cast<int>(repeat);
  c.fit_timing = r.boolean("fit_timing", true);
  if (c.reference == "dq8") {
    c.cycle_time_us = r.number("cycle_time_us", 750.0);
    if (!(c.cycle_time_us > 8.0 * c.pulse_width_us)) fail(r.path("cycle_time_us"), "must exceed 8 pulse widths");
  } else if (c.reference.empty()) {
    c.delays_us = r.numbers<9>("delays_us");
    c.phases_deg = r.numbers<8>("phases_deg");
    for (std::size_t k = 0; k < 9; ++k) {
      if (c.delays_us[k] < 0.0) fail(r.path("delays_us") + "/" + std::to_string(k), "must be >= 0");
    }
  } else {
    fail(r.path("reference"), "'" + c.reference + "' is not a known cycle (dq8)");
  }
  r.finish();
  return c;
}

ProjectionConfig parse_projection(const Json& j, const std::string& path) {
  Reader r(j, path);
  ProjectionConfig p;
  p.kind = choose(r.string("kind"), kProjections, r.path("kind"));
  if (p.kind == ProjectionKind::time_array) {
    const long long n = r.integer("n_times");
    if (n < 2 || n > 100000) fail(r.path("n_times"), "must lie in [2, 100000]");
    p.n_times = static_cast<int>(n);
    p.tol = r.number("tol", 1e-6);
    if (!(p.tol > 0.0)) fail(r.path("tol"), "must be > 0");
    p.spectrum_rad_s = r.numbers<4>("spectrum_rad_s");
    p.seed = r.seed("seed", p.seed);
  }
  r.finish();
  return p;
}

TomographyConfig parse_tomography(const Json& j, const std::string& path) {
  Reader r(j, path);
  TomographyConfig t;
  t.enabled = r.boolean("enabled", false);
  t.noise_sigma = r.number("noise_sigma", 0.0);
  if (t.noise_sigma < 0.0) fail(r.path("noise_sigma"), "must be >= 0");
  t.seed = r.seed("seed", 1);
  r.finish();
  return t;
}

OptimizationConfig parse_optimization(const Json& j, const std::string& path) {
  Reader r(j, path);
  OptimizationConfig o;
  o.objective = choose(r.string("objective", "weighted_mix"), kObjectives, r.path("objective"));
  o.mix_weight = r.number("mix_weight", o.mix_weight);
  if (!(o.mix_weight >= 0.0 && o.mix_weight <= 1.0)) fail(r.path("mix_weight"), "must lie in [0, 1]");
  o.timing_weight = r.number("timing_weight", o.timing_weight);
  if (!(o.timing_weight >= 0.0 && o.mix_weight + o.timing_weight <= 1.0)) {
    fail(r.path("timing_weight"), "must be >= 0 with mix_weight + timing_weight <= 1");
  }
  o.target_total_time_us = r.number("target_total_time_us", o.target_total_time_us);
  if (!(o.target_total_time_us > 0.0)) fail(r.path("target_total_time_us"), "must be > 0");
  const long long repeat = r.integer("timing_repeat", o.timing_repeat);
  if (repeat < 0 || repeat > 1000) fail(r.path("timing_repeat"), "must lie in [0, 1000]");
  o.timing_repeat = static_cast<int>(repeat);
  if (o.timing_weight > 0.0 && o.timing_repeat < 1) fail(r.path("timing_repeat"), "timing_weight needs >= 1");
  o.fixed_cycle_time_us = r.number("fixed_cycle_time_us", o.fixed_cycle_time_us);
  if (o.fixed_cycle_time_us < 0.0) fail(r.path("fixed_cycle_time_us"), "must be >= 0");
  o.max_cycle_time_us = r.number("max_cycle_time_us", o.max_cycle_time_us);
  if (o.max_cycle_time_us < 0.0) fail(r.path("max_cycle_time_us"), "must be >= 0");
  o.mirror_symmetric = r.boolean("mirror_symmetric", o.mirror_symmetric);
  o.lower_fraction = r.number("lower_fraction", o.lower_fraction);
  o.upper_fraction = r.number("upper_fraction", o.upper_fraction);
  if (!(o.lower_fraction >= 0.0 && o.upper_fraction > o.lower_fraction)) {
    fail(r.path("upper_fraction"), "bounds must satisfy 0 <= lower_fraction < upper_fraction");
  }
  const long long budget = r.integer("budget", o.budget);
  if (budget < 1) fail(r.path("budget"), "must be >= 1");
  o.budget = static_cast<int>(budget);
  o.seed = r.seed("seed", o.seed);
  r.finish();
  return o;
}

Json matrix_entries(const Operator& op) { return to_json(op)["entries"]; }

Json both_bases(const DensityMatrix& rho) {
  return Json{{"multiplicative", to_json(rho.op())}, {"bell", to_json(change_basis(rho.op(), bell_transform()))}};
}

Json per_bell(const std::array<double, 4>& v) {
  Json out = Json::object();
  for (BellState s : kBellStates) out[std::string(bell_label(s))] = v[static_cast<int>(s)];
  return out;
}

Json effective_json(const EffectiveHamiltonian& e) {
  return Json{{"cycle_time_us", e.cycle_time_s * 1e6},
              {"eigenvalues_rad_s", per_bell(e.eigenvalues)},
              {"bell_overlaps", per_bell(e.bell_overlaps)},
              {"lambda_gap_rad_s", e.phi_gap()},
              {"h_eff_rad_s", matrix_entries(e.h_eff)}};
}

Json spec_json(const EightPulseCycleSpec& spec) {
  Json delays = Json::array(), phases = Json::array();
  for (double d : spec.delays_s) delays.push_back(d * 1e6);
  for (double p : spec.phases_rad) phases.push_back(p * 180.0 / kPi);
  return Json{{"delays_us", delays},
              {"phases_deg", phases},
              {"pulse_width_us", spec.pulse_width_s * 1e6},
              {"repeat", spec.repeat},
              {"cycle_time_us", spec.cycle_time() * 1e6},
              {"total_time_us", spec.repeat * spec.cycle_time() * 1e6}};
}

std::vector<OutputFile> bar_files(const DensityMatrix& before, const DensityMatrix& after) {
  return {{"before_multiplicative.csv", to_csv(bar_export(before))},
          {"before_bell.csv", to_csv(bar_export(before, bell_transform()))},
          {"after_multiplicative.csv", to_csv(bar_export(after))},
          {"after_bell.csv", to_csv(bar_export(after, bell_transform()))}};
}

DensityMatrix mixed_with(const Vector& psi, double p) {
  const double q = (1.0 - p) / 3.0;
  const Matrix proj = psi * psi.adjoint();
  return DensityMatrix(hermitian_part(Operator(p * proj + q * (Matrix::Identity(4, 4) - proj))));
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  Reader r(j, "");
  ExperimentConfig c;
  c.name = r.string("name", "run");
  c.system = parse_system(r.raw("system"), "/system");
  c.initial_state = parse_initial(r.raw("initial_state"), "/initial_state");
  c.preparation = choose(r.string("preparation", "ideal"), kPreparations, "/preparation");
  if (c.preparation == PreparationKind::sequence && c.initial_state.kind == InitialStateKind::custom) {
    fail("/preparation", "a custom initial state can only use the ideal preparation");
  }
  if (r.has("cycle")) c.cycle = parse_cycle(r.raw("cycle"), "/cycle");
  c.projection = parse_projection(r.raw("projection"), "/projection");
  if (r.has("tomography")) c.tomography = parse_tomography(r.raw("tomography"), "/tomography");
  if (r.has("acceptance")) {
    Reader a(r.raw("acceptance"), "/acceptance");
    c.oracle_deviation_max = a.number("oracle_deviation_max", c.oracle_deviation_max);
    if (!(c.oracle_deviation_max >= 0.0)) fail("/acceptance/oracle_deviation_max", "must be >= 0");
    a.finish();
  }
  if (r.has("optimization")) c.optimization = parse_optimization(r.raw("optimization"), "/optimization");
  if (r.has("outputs")) {
    Reader o(r.raw("outputs"), "/outputs");
    c.output_dir = o.string("directory", c.output_dir);
    o.finish();
  }
  r.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, kModule, path.string() + ": cannot open");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, kModule, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

Json to_json(const ExperimentConfig& c) {
  Json initial{{"kind", name_of(c.initial_state.kind, kInitialKinds)}};
  if (c.initial_state.matrix) {
    initial["matrix"] = to_json(*c.initial_state.matrix);
  } else {
    initial["ground_population"] = c.initial_state.ground_population;
  }

  Json cycle{{"reference", c.cycle.reference}};
  if (c.cycle.reference == "dq8") {
    cycle["cycle_time_us"] = c.cycle.cycle_time_us;
  } else {
    cycle["delays_us"] = c.cycle.delays_us;
    cycle["phases_deg"] = c.cycle.phases_deg;
  }
  cycle["pulse_width_us"] = c.cycle.pulse_width_us;
  cycle["repeat"] = c.cycle.repeat;
  cycle["fit_timing"] = c.cycle.fit_timing;

  Json projection{{"kind", name_of(c.projection.kind, kProjections)}};
  if (c.projection.kind == ProjectionKind::time_array) {
    projection["n_times"] = c.projection.n_times;
    projection["tol"] = c.projection.tol;
    projection["spectrum_rad_s"] = c.projection.spectrum_rad_s;
    projection["seed"] = c.projection.seed;
  }

  Json out{{"name", c.name},
           {"system",
            {{"shift_1_hz", c.system.shift_1_hz},
             {"shift_2_hz", c.system.shift_2_hz},
             {"splitting_hz", c.system.splitting_hz},
             {"coupling", name_of(c.system.coupling, kCouplings)}}},
           {"initial_state", initial},
           {"preparation", name_of(c.preparation, kPreparations)},
           {"cycle", cycle},
           {"projection", projection},
           {"tomography",
            {{"enabled", c.tomography.enabled},
             {"noise_sigma", c.tomography.noise_sigma},
             {"seed", c.tomography.seed}}},
           {"acceptance", {{"oracle_deviation_max", c.oracle_deviation_max}}}};
  if (c.optimization) {
    const auto& o = *c.optimization;
    out["optimization"] = {{"objective", name_of(o.objective, kObjectives)},
                           {"mix_weight", o.mix_weight},
                           {"timing_weight", o.timing_weight},
                           {"target_total_time_us", o.target_total_time_us},
                           {"timing_repeat", o.timing_repeat},
                           {"fixed_cycle_time_us", o.fixed_cycle_time_us},
                           {"max_cycle_time_us", o.max_cycle_time_us},
                           {"mirror_symmetric", o.mirror_symmetric},
                           {"lower_fraction", o.lower_fraction},
                           {"upper_fraction", o.upper_fraction},
                           {"budget", o.budget},
                           {"seed", o.seed}};
  }
  out["outputs"] = {{"directory", c.output_dir}};
  return out;
}

std::filesystem::path default_config_dir() { return BELLPROJ_CONFIG_DIR; }

EightPulseCycleSpec resolve_cycle(const ExperimentConfig& config) {
  const CycleConfig& c = config.cycle;
  EightPulseCycleSpec spec;
  if (c.reference == "dq8") {
    spec = reference_dq_cycle(c.cycle_time_us * 1e-6, c.pulse_width_us * 1e-6, c.repeat);
  } else {
    for (std::size_t k = 0; k < 9; ++k) spec.delays_s[k] = c.delays_us[k] * 1e-6;
    for (std::size_t k = 0; k < 8; ++k) spec.phases_rad[k] = c.phases_deg[k] * kPi / 180.0;
    spec.pulse_width_s = c.pulse_width_us * 1e-6;
    spec.repeat = c.repeat;
  }
  spec.validate();
  return c.fit_timing ? fit_cycle_timing(spec, config.system, c.repeat) : spec;
}

DensityMatrix prepare_state(const ExperimentConfig& config) {
  const InitialStateConfig& s = config.initial_state;
  if (s.kind == InitialStateKind::custom) return DensityMatrix(*s.matrix);

  const double p = s.ground_population;
  DensityMatrix ground = mixed_with(basis_ket(0, 4), p);
  if (config.preparation == PreparationKind::sequence) {
    // Partial saturation acts on whatever populations the polarization
    // transfer left; only the ground population survives it.
    const double rest = 1.0 - p;
    const Eigen::Vector4d pops(p, 0.5 * rest, 0.3 * rest, 0.2 * rest);
    ground = pseudopure_prep(DensityMatrix(Operator(pops.cast<Complex>().asDiagonal().toDenseMatrix())));
  }
  if (s.kind == InitialStateKind::pseudopure_00) return ground;

  const BellState target =
      s.kind == InitialStateKind::bell_phi_plus ? BellState::phi_plus : BellState::phi_minus;
  if (config.preparation == PreparationKind::ideal) return mixed_with(bell_vector(target), p);
  return evolve(ground, propagator_of(bell_preparation(config.system, target), config.system));
}

RunOutput run(const ExperimentConfig& config) {
  config.system.validate();
  const DensityMatrix before = prepare_state(config);
  const BasisTransform bell = bell_transform();
  const DensityMatrix oracle = dephase_in_basis(before, bell);

  Json report;
  report["scenario"] = config.name;
  report["config"] = to_json(config);

  std::optional<DensityMatrix> after;
  switch (config.projection.kind) {
    case ProjectionKind::two_variant: {
      const EightPulseCycleSpec spec = resolve_cycle(config);
      const ProjectionScheme scheme = canonical_two_variant(eight_pulse_cycle(spec));
      after = project_two_variant(before, scheme, config.system);
      const EffectiveHamiltonian fwd = extract_effective(scheme.variants[0].sequence, config.system);
      const EffectiveHamiltonian rev = extract_effective(scheme.variants[1].sequence, config.system);
      Json seq = spec_json(spec);
      const double total = spec.repeat * spec.cycle_time();
      seq["timing_condition_error"] = total * fwd.phi_gap() / (0.5 * kPi) - 1.0;
      report["sequence"] = seq;
      report["effective_hamiltonian"] = {{"forward", effective_json(fwd)},
                                         {"reversed", effective_json(rev)},
                                         {"reversal_distance", distance_to_target(rev.h_eff, -1.0 * fwd.h_eff)}};
      break;
    }
    case ProjectionKind::time_array: {
      const auto& sp = config.projection.spectrum_rad_s;
      const Operator h = bell_hamiltonian({sp[0], sp[1], sp[2], sp[3]});
      TimeArrayOptions opts;
      opts.seed = config.projection.seed;
      const TimeArray ta =
          compute_time_array(std::vector<double>(sp.begin(), sp.end()), config.projection.n_times,
                             config.projection.tol, opts);
      after = project_general(before, h, ta);
      Json times = Json::array();
      for (double t : ta.times_s) times.push_back(t * 1e6);
      report["time_array"] = {{"times_us", times}, {"residual", ta.residual}};
      break;
    }
    case ProjectionKind::ideal_oracle: after = oracle; break;
  }

  const double deviation = trace_distance(*after, oracle);
  report["states"] = {{"before", both_bases(before)}, {"after", both_bases(*after)}, {"oracle", both_bases(oracle)}};
  report["metrics"] = {{"fidelity_after_to_before", fidelity(*after, before)},
                       {"fidelity_after_to_oracle", fidelity(*after, oracle)},
                       {"bell_max_off_diagonal_after", max_off_diagonal(change_basis(after->op(), bell))},
                       {"oracle_deviation", deviation},
                       {"oracle_deviation_max", config.oracle_deviation_max},
                       {"within_bound", deviation <= config.oracle_deviation_max}};

  DensityMatrix shown_before = before, shown_after = *after;
  if (config.tomography.enabled) {
    const ReadoutSet rs = default_readout_set();
    const auto& t = config.tomography;
    shown_before = reconstruct(simulate_readout(before, rs, config.system, t.noise_sigma, t.seed), rs, config.system);
    shown_after =
        reconstruct(simulate_readout(*after, rs, config.system, t.noise_sigma, t.seed + 1), rs, config.system);
    report["tomography"] = {{"records", rs.size()},
                            {"before", both_bases(shown_before)},
                            {"after", both_bases(shown_after)},
                            {"fidelity_before", fidelity(shown_before, before)},
                            {"fidelity_after", fidelity(shown_after, *after)}};
  }

  RunOutput out;
  out.report = report;
  out.files.push_back({"report.json", dump_report(report)});
  for (auto& f : bar_files(shown_before, shown_after)) out.files.push_back(std::move(f));
  return out;
}

RunOutput repro(const std::string& scenario, const std::filesystem::path& config_dir) {
  if (scenario != "fig2" && scenario != "fig3") {
    throw Error(ErrorKind::Config, kModule, "unknown scenario '" + scenario + "' (fig2, fig3)");
  }
  return run(load_config(config_dir / (scenario + ".json")));
}

RunOutput inspect_average(const ExperimentConfig& config) {
  config.system.validate();
  const EightPulseCycleSpec spec = resolve_cycle(config);
  const PulseSequence fwd_seq = eight_pulse_cycle(spec);
  const PulseSequence rev_seq = phase_shift_all(fwd_seq, 0.5 * kPi);
  const EffectiveHamiltonian fwd = extract_effective(fwd_seq, config.system);
  const EffectiveHamiltonian rev = extract_effective(rev_seq, config.system);

  // Least-squares coefficient of the double-quantum operator.
  const Operator dq = h_double_quantum();
  const double coeff = (dq.matrix().adjoint() * fwd.h_eff.matrix()).trace().real() /
                       (dq.matrix().adjoint() * dq.matrix()).trace().real();

  Json report{{"scenario", config.name},
              {"config", to_json(config)},
              {"sequence", spec_json(spec)},
              {"events", to_json(fwd_seq)},
              {"forward", effective_json(fwd)},
              {"reversed", effective_json(rev)},
              {"reversal_distance", distance_to_target(rev.h_eff, -1.0 * fwd.h_eff)},
              {"double_quantum_coefficient_rad_s", coeff}};
  if (coeff != 0.0) report["double_quantum_residual"] = distance_to_target(fwd.h_eff, coeff * dq);
  if (fwd_seq.all_delta_pulses()) {
    const Operator magnus = magnus_zeroth(fwd_seq, config.system);
    report["magnus_zeroth_rad_s"] = matrix_entries(magnus);
    report["magnus_distance"] = distance_to_target(fwd.h_eff, magnus);
  }
  const CycleTiming timing = solve_two_cycle_timing(fwd);
  report["timing"] = {{"repeat", timing.repeat},
                      {"total_time_us", timing.total_time_s * 1e6},
                      {"cycle_time_us", timing.cycle_time_s * 1e6},
                      {"scale", timing.scale}};
  return {report, {{"avg_report.json", dump_report(report)}}};
}

RunOutput tomography_roundtrip(const ExperimentConfig& config) {
  config.system.validate();
  const DensityMatrix rho = prepare_state(config);
  const ReadoutSet rs = default_readout_set();
  const auto& t = config.tomography;
  const MeasurementRecord rec = simulate_readout(rho, rs, config.system, t.noise_sigma, t.seed);
  const Operator raw = least_squares_estimate(rec, rs, config.system);
  const DensityMatrix nearest = nearest_density_matrix(raw);
  const DensityMatrix clipped = clip_to_density_matrix(raw);

  Json values = Json::array();
  for (double v : rec.values) values.push_back(v);
  Json report{{"scenario", config.name},
              {"config", to_json(config)},
              {"readout_rank", readout_rank(rs, config.system)},
              {"records", values},
              {"true_state", both_bases(rho)},
              {"reconstructed", both_bases(nearest)},
              {"fidelity_nearest", fidelity(nearest, rho)},
              {"fidelity_clipped", fidelity(clipped, rho)},
              {"trace_distance_nearest", trace_distance(nearest, rho)}};
  RunOutput out{report, {{"tomo_report.json", dump_report(report)}}};
  out.files.push_back({"reconstructed_multiplicative.csv", to_csv(bar_export(nearest))});
  out.files.push_back({"reconstructed_bell.csv", to_csv(bar_export(nearest, bell_transform()))});
  return out;
}

OptimizationProblem make_problem(const ExperimentConfig& config) {
  if (!config.optimization) fail("/optimization", "missing required section");
  const OptimizationConfig& o = *config.optimization;
  OptimizationProblem p;
  const double base_cycle_us = o.fixed_cycle_time_us > 0.0 ? o.fixed_cycle_time_us : config.cycle.cycle_time_us;
  p.base_spec = reference_dq_cycle(base_cycle_us * 1e-6, config.cycle.pulse_width_us * 1e-6,
                                   std::max(o.timing_repeat, 1));
  p.system = config.system;
  p.objective = o.objective;
  p.mix_weight = o.mix_weight;
  p.timing_weight = o.timing_weight;
  p.mirror_symmetric = o.mirror_symmetric;
  p.timing_repeat = o.timing_repeat;
  p.fixed_cycle_time_s = o.fixed_cycle_time_us * 1e-6;
  p.max_cycle_time_s = o.max_cycle_time_us * 1e-6;
  // Double-quantum target with lambda(Phi+) < lambda(Phi-), the sign the
  // reference cycle produces.
  const double gap = 0.5 * kPi / (o.target_total_time_us * 1e-6);
  p.target = bell_hamiltonian({-0.5 * gap, 0.5 * gap, 0.0, 0.0});
  p.free_parameters = default_delay_parameters(p.base_spec, o.lower_fraction, o.upper_fraction, o.mirror_symmetric);
  p.validate();
  return p;
}

RunOutput run_optimization(const ExperimentConfig& config, std::optional<std::uint64_t> seed_override) {
  config.system.validate();
  const OptimizationProblem problem = make_problem(config);
  const std::uint64_t seed = seed_override.value_or(config.optimization->seed);
  const OptimizationResult r = optimize(problem, config.optimization->budget, seed);

  Json report{{"scenario", config.name},
              {"config", to_json(config)},
              {"seed", seed},
              {"budget", config.optimization->budget},
              {"evaluations", r.evaluations},
              {"restarts", r.restarts},
              {"initial_objective", r.trace.empty() ? r.objective_value : r.trace.front().second},
              {"objective_value", r.objective_value},
              {"fidelity_phi_plus", r.fidelity_phi_plus},
              {"fidelity_phi_minus", r.fidelity_phi_minus},
              {"lambda_gap_rad_s", r.lambda_gap},
              {"timing_error", evaluate_objective_detailed(r.best_spec, problem).timing_error},
              {"best_spec", spec_json(r.best_spec)},
              {"timed_spec", spec_json(r.timed_spec)}};
  std::string trace = "evaluation,best_objective\n";
  char buf[64];
  for (const auto& [k, v] : r.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g\n", k, v);
    trace += buf;
  }
  return {report, {{"optimize_report.json", dump_report(report)}, {"optimizer_trace.csv", trace}}};
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

void write_outputs(const RunOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : out.files) {
    std::ofstream os(dir / f.name, std::ios::binary);
    if (!os) throw Error(ErrorKind::Config, kModule, (dir / f.name).string() + ": cannot write");
    os << f.contents;
  }
}

}  // namespace bellproj
