#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bellproj/kernels.hpp"
#include "bellproj/runner.hpp"

namespace fs = std::filesystem;
using namespace bellproj;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

bool verbose = false;

void emit(const RunOutput& out, const fs::path& dir) {
  write_outputs(out, dir);
  if (verbose) std::cout << dump_report(out.report);
  std::cout << "wrote";
  for (const auto& f : out.files) std::cout << " " << (dir / f.name).string();
  std::cout << "\n";
}

// Runs the body and maps failures onto the documented exit codes.
template <class F>
int guarded(F&& body) {
  try {
    body();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

fs::path output_dir(const std::string& flag, const ExperimentConfig& cfg) {
  return flag.empty() ? fs::path(cfg.output_dir) : fs::path(flag);
}

int run_batch(const fs::path& dir, const std::string& out_flag) {
  if (!fs::is_directory(dir)) {
    std::cerr << "error: " << dir.string() << " is not a directory\n";
    return kExitConfig;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  struct Outcome {
    int code = 0;
    std::string message;
  };
  const auto outcomes = kernels::evaluate_batch(files.size(), [&](std::size_t i) {
    Outcome o;
    o.code = guarded([&] {
      const ExperimentConfig cfg = load_config(files[i]);
      const fs::path target = out_flag.empty() ? fs::path(cfg.output_dir) : fs::path(out_flag) / files[i].stem();
      write_outputs(run(cfg), target);
      o.message = target.string();
    });
    return o;
  });

  int worst = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::cout << files[i].filename().string() << ": "
              << (outcomes[i].code == 0 ? "ok -> " + outcomes[i].message : "exit " + std::to_string(outcomes[i].code))
              << "\n";
    worst = std::max(worst, outcomes[i].code);
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-basis projection by averaged pulsed spin dynamics"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path, out_dir, config_dir, scenario;
  std::optional<std::uint64_t> seed;

  auto* run_cmd = app.add_subcommand("run", "run one config, or every config in a directory");
  auto* cfg_opt = run_cmd->add_option("--config", config_path, "experiment config (JSON)");
  auto* dir_opt = run_cmd->add_option("--config-dir", config_dir, "run every *.json in this directory");
  cfg_opt->excludes(dir_opt);
  run_cmd->add_option("--out", out_dir, "output directory (overrides outputs.directory)");
  run_cmd->add_flag("--verbose", verbose, "print the report");

  auto* repro_cmd = app.add_subcommand("repro", "reproduce a shipped figure scenario");
  repro_cmd->add_option("scenario", scenario, "fig2 or fig3")->required()->check(CLI::IsMember({"fig2", "fig3"}));
  repro_cmd->add_option("--config-dir", config_dir, "directory holding the scenario configs");
  repro_cmd->add_option("--out", out_dir, "output directory");
  repro_cmd->add_flag("--verbose", verbose, "print the report");

  auto* opt_cmd = app.add_subcommand("optimize", "tune the cycle delays of a config");
  opt_cmd->add_option("--config", config_path, "experiment config with an optimization section")->required();
  opt_cmd->add_option("--seed", seed, "overrides optimization.seed");
  opt_cmd->add_option("--out", out_dir, "output directory");
  opt_cmd->add_flag("--verbose", verbose, "print the report");

  auto* avg_cmd = app.add_subcommand("avg", "effective Hamiltonian of the configured cycle");
  avg_cmd->add_option("--config", config_path, "experiment config")->required();
  avg_cmd->add_option("--out", out_dir, "output directory");
  avg_cmd->add_flag("--verbose", verbose, "print the report");

  auto* tomo_cmd = app.add_subcommand("tomo", "readout and reconstruction of the prepared state");
  tomo_cmd->add_option("--config", config_path, "experiment config")->required();
  tomo_cmd->add_option("--seed", seed, "overrides tomography.seed");
  tomo_cmd->add_option("--out", out_dir, "output directory");
  tomo_cmd->add_flag("--verbose", verbose, "print the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (run_cmd->parsed()) {
    if (!config_dir.empty()) return run_batch(config_dir, out_dir);
    if (config_path.empty()) {
      std::cerr << "error: run needs --config or --config-dir\n";
      return kExitConfig;
    }
    return guarded([&] {
      const ExperimentConfig cfg = load_config(config_path);
      emit(run(cfg), output_dir(out_dir, cfg));
    });
  }
  if (repro_cmd->parsed()) {
    return guarded([&] {
      const RunOutput out = config_dir.empty() ? repro(scenario) : repro(scenario, config_dir);
      emit(out, out_dir.empty() ? fs::path("out") / scenario : fs::path(out_dir));
    });
  }
  if (opt_cmd->parsed()) {
    return guarded([&] {
      const ExperimentConfig cfg = load_config(config_path);
      const RunOutput out = run_optimization(cfg, seed);
      emit(out, output_dir(out_dir, cfg));
      const auto& r = out.report;
      std::printf("objective %.6g  F(Phi+) %.4f  F(Phi-) %.4f  gap %.2f rad/s\n", r["objective_value"].get<double>(),
                  r["fidelity_phi_plus"].get<double>(), r["fidelity_phi_minus"].get<double>(),
                  r["lambda_gap_rad_s"].get<double>());
    });
  }
  if (avg_cmd->parsed()) {
    return guarded([&] {
      const ExperimentConfig cfg = load_config(config_path);
      const RunOutput out = inspect_average(cfg);
      emit(out, output_dir(out_dir, cfg));
      const auto& f = out.report["forward"];
      std::printf("gap %.6f rad/s  F(Phi+) %.6f  F(Phi-) %.6f\n", f["lambda_gap_rad_s"].get<double>(),
                  f["bell_overlaps"]["Phi+"].get<double>(), f["bell_overlaps"]["Phi-"].get<double>());
    });
  }
  if (tomo_cmd->parsed()) {
    return guarded([&] {
      ExperimentConfig cfg = load_config(config_path);
      if (seed) cfg.tomography.seed = *seed;
      const RunOutput out = tomography_roundtrip(cfg);
      emit(out, output_dir(out_dir, cfg));
      std::printf("reconstruction fidelity %.8f\n", out.report["fidelity_nearest"].get<double>());
    });
  }
  return 0;
}
