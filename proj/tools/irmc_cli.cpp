#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irmc/harness.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kNumericError = 3;

struct RunArgs {
  std::string config;
  std::string preset;
  std::string suite;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> chains;
  std::optional<std::string> out;
  std::optional<std::string> sampler;
  std::optional<std::string> target;
  std::vector<std::string> sets;
  unsigned threads = 0;
  std::string data_dir = IRMC_DEFAULT_DATA_DIR;
};

void applySet(irmc::ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw irmc::ConfigError("--set expects section.key=value, got '" + assignment + "'");
  irmc::setConfigValue(cfg, assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1),
                       assignment.substr(eq + 1));
}

irmc::ExperimentConfig assemble(irmc::ExperimentConfig cfg, const RunArgs& a) {
  irmc::applyEnvironmentOverrides(cfg);
  if (a.seed) cfg.experiment.seed = *a.seed;
  if (a.iters) cfg.experiment.iterations = *a.iters;
  if (a.chains) cfg.experiment.chains = *a.chains;
  if (a.out) cfg.output.dir = *a.out;
  if (a.sampler) cfg.sampler.kind = *a.sampler;
  if (a.target) cfg.target.name = *a.target;
  for (const auto& s : a.sets) applySet(cfg, s);
  return cfg;
}

int run(const RunArgs& a) {
  const int sources = !a.config.empty() + !a.preset.empty() + !a.suite.empty();
  if (sources > 1) throw irmc::ConfigError("use at most one of --config, --preset and --suite");
  std::vector<irmc::ExperimentConfig> configs;
  if (!a.suite.empty()) {
    for (const auto& name : irmc::suite(a.suite)) {
      auto cfg = assemble(irmc::preset(name), a);
      if (a.out) cfg.output.dir = (std::filesystem::path(*a.out) / name).string();
      configs.push_back(std::move(cfg));
    }
  } else if (!a.preset.empty()) {
    configs.push_back(assemble(irmc::preset(a.preset), a));
  } else if (!a.config.empty()) {
    configs.push_back(assemble(irmc::loadConfig(a.config), a));
  } else {
    configs.push_back(assemble(irmc::ExperimentConfig{}, a));
  }
  // Validate everything before the first long run starts.
  for (const auto& c : configs) irmc::resolveConfig(c, a.data_dir);
  int status = 0;
  for (const auto& c : configs) {
    const int rc = irmc::runExperiment(c, irmc::RunOptions{a.threads, a.data_dir}, std::cerr);
    if (rc != 0) status = rc;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Irreversible MCMC samplers and diagnostics"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment (preset, suite or config file)");
  run_cmd->add_option("--config", run_args.config, "INI experiment config")->check(CLI::ExistingFile);
  run_cmd->add_option("--preset", run_args.preset, "Named preset (see list-presets)");
  run_cmd->add_option("--suite", run_args.suite, "Named suite of presets; --out becomes a parent directory");
  run_cmd->add_option("--seed", run_args.seed, "Base seed; chain i uses seed XOR i");
  run_cmd->add_option("--iters", run_args.iters, "Iterations per chain, burn-in included");
  run_cmd->add_option("--chains", run_args.chains, "Number of chains");
  run_cmd->add_option("--out", run_args.out, "Output directory");
  run_cmd->add_option("--sampler", run_args.sampler, "mh | ijump | sde | mala | imala | hmc");
  run_cmd->add_option("--target", run_args.target, "Target name");
  run_cmd->add_option("--set", run_args.sets, "Override any key: section.key=value (repeatable)");
  run_cmd->add_option("--threads", run_args.threads, "Worker threads (0: available parallelism)");
  run_cmd->add_option("--data-dir", run_args.data_dir, "Directory holding bundled datasets");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  auto* compare_cmd = app.add_subcommand("compare", "Tabulate completed runs as CSV");
  compare_cmd->add_option("runs", compare_dirs, "Run directories (or parents of run directories)")->required();
  compare_cmd->add_option("--out", compare_out, "Write the table to a file instead of stdout");

  std::string trace_path, diag_config, diag_target, diag_out, diag_box, diag_variant = "printed", diag_escape = "none";
  std::size_t diag_window = 0, diag_batches = 0, diag_bins = 100, diag_dim = 0;
  std::string data_dir = IRMC_DEFAULT_DATA_DIR;
  auto* diag_cmd = app.add_subcommand("diagnose", "Diagnostics report (JSON) for an existing trace CSV");
  diag_cmd->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);
  diag_cmd->add_option("--config", diag_config, "Take target and diagnostics settings from this config")
      ->check(CLI::ExistingFile);
  diag_cmd->add_option("--target", diag_target, "Target name, enables TV against the target density");
  diag_cmd->add_option("--dim", diag_dim, "Target dimension for --target std-normal");
  diag_cmd->add_option("--window", diag_window, "Bartlett window M (0: default)");
  diag_cmd->add_option("--batches", diag_batches, "Batch count K (0: floor(sqrt(N)))");
  diag_cmd->add_option("--mbm-variant", diag_variant, "printed | standard");
  diag_cmd->add_option("--tv-box", diag_box, "Histogram box lo:hi[,lo:hi]");
  diag_cmd->add_option("--tv-bins", diag_bins, "Bins per dimension");
  diag_cmd->add_option("--escape", diag_escape, "none | sign-z0");
  diag_cmd->add_option("--out", diag_out, "Write the report to a file instead of stdout");
  diag_cmd->add_option("--data-dir", data_dir, "Directory holding bundled datasets");

  bool show_suites = false;
  std::string show_preset;
  auto* list_cmd = app.add_subcommand("list-presets", "List presets and suites");
  list_cmd->add_flag("--suites", show_suites, "List suites with their members");
  list_cmd->add_option("--show", show_preset, "Print the fully resolved config of one preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  auto emit = [](const std::string& text, const std::string& path) {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
  };

  try {
    if (*run_cmd) return run(run_args);
    if (*compare_cmd) {
      std::vector<std::filesystem::path> dirs(compare_dirs.begin(), compare_dirs.end());
      emit(irmc::compareRuns(dirs), compare_out);
      return 0;
    }
    if (*diag_cmd) {
      irmc::DiagnosticsConfig dc;
      std::optional<irmc::TargetConfig> tc;
      if (!diag_config.empty()) {
        const auto cfg = irmc::loadConfig(diag_config);
        dc = cfg.diagnostics;
        tc = cfg.target;
      }
      if (!diag_target.empty()) {
        tc = irmc::TargetConfig{};
        tc->name = diag_target;
        if (diag_dim) tc->dim = diag_dim;
      }
      if (diag_window) dc.ess_window = static_cast<long long>(diag_window);
      if (diag_batches) dc.mbm_batches = static_cast<long long>(diag_batches);
      if (diag_cmd->count("--mbm-variant")) dc.mbm_variant = diag_variant;
      if (!diag_box.empty()) dc.tv_box = diag_box;
      if (diag_cmd->count("--tv-bins")) dc.tv_bins = diag_bins;
      if (diag_cmd->count("--escape")) dc.escape = diag_escape;
      const auto opts = irmc::buildDiagnostics(dc);
      std::optional<irmc::TargetDensity> target;
      if (tc) target = irmc::buildTarget(*tc, data_dir);
      const auto report = irmc::diagnoseTrace(trace_path, opts, target ? &*target : nullptr);
      emit(report.toJson() + "\n", diag_out);
      return 0;
    }
    if (*list_cmd) {
      if (!show_preset.empty()) {
        std::cout << irmc::serializeConfig(irmc::resolveConfig(irmc::preset(show_preset), IRMC_DEFAULT_DATA_DIR));
      } else if (show_suites) {
        for (const auto& s : irmc::suiteNames()) {
          std::cout << s << ":";
          for (const auto& m : irmc::suite(s)) std::cout << " " << m;
          std::cout << "\n";
        }
      } else {
        for (const auto& p : irmc::presetNames()) std::cout << p << "\n";
      }
      return 0;
    }
  } catch (const irmc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const irmc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const irmc::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const irmc::InitializationError& e) {
    std::cerr << "initialization failure: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
