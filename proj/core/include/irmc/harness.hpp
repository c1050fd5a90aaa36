#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "irmc/chain.hpp"
#include "irmc/diagnostics.hpp"
#include "irmc/targets.hpp"

namespace irmc {

/// Invalid or unknown configuration input (maps to CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSection {
  std::string name = "custom";
  std::size_t iterations = 100000;
  long long burn_in = -1;  ///< -1: 10% of iterations
  std::size_t chains = 1;
  std::uint64_t seed = 1;
  bool operator==(const ExperimentSection&) const = default;
};

struct TargetConfig {
  /// std-normal, log-normal, bimodal, moon, multimodal, multimodal-concentrated,
  /// gaussian-mixture, uniform, logistic
  std::string name = "std-normal";
  std::size_t dim = 1;
  double tau = 1.0;
  /// gaussian-mixture: "weight:scale:m0,m1;..." components
  std::string components;
  /// uniform: "lo:hi,lo:hi,..."
  std::string box;
  /// logistic: file path, or @heart / @australian for the bundled copies
  std::string dataset;
  int label_column = -1;
  bool standardize = true;
  double alpha = 100.0;
  bool operator==(const TargetConfig&) const = default;
};

struct SamplerConfig {
  std::string kind = "mh";
  /// mh: gaussian | symmetrized-gamma; ijump: half-space-gaussian | gamma-directional | plain-gaussian
  std::string proposal = "gaussian";
  double sigma = 1.0;
  double shape = 1.1;
  /// Gamma beta; the increment is gamma-distributed with mean shape * rate.
  double rate = 1.0;
  double eps = 0.1;
  int leapfrog_steps = 10;
  /// langevin (D = c_D I, Q = 0), rotation (D = c_D I, Q = c_Q J), hamiltonian (D = 0, Q = c_Q J)
  std::string dynamics = "langevin";
  double diffusion_scale = 1.0;
  double skew_scale = 1.0;
  long long resample_period = -1;  ///< -1: 100 for ijump, 0 otherwise
  bool operator==(const SamplerConfig&) const = default;
};

struct DiagnosticsConfig {
  long long ess_window = 0;   ///< 0: min(3000, N / 10)
  long long mbm_batches = 0;  ///< 0: floor(sqrt(N))
  std::string mbm_variant = "printed";
  bool mbm_fallback = true;
  bool tv = true;
  std::size_t tv_bins = 100;
  std::string tv_box;  ///< empty: the target's own box
  std::string escape = "none";  ///< none | sign-z0
  std::size_t acf_lags = 50;
  bool operator==(const DiagnosticsConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "irmc-out";
  bool write_traces = true;
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  ExperimentSection experiment;
  TargetConfig target;
  SamplerConfig sampler;
  DiagnosticsConfig diagnostics;
  OutputConfig output;
  bool operator==(const ExperimentConfig&) const = default;
};

/// INI text with sections [experiment] [target] [sampler] [diagnostics] [output].
/// Unknown sections or keys and malformed values throw ConfigError.
ExperimentConfig parseConfig(std::istream& in, const std::string& source = "<config>");
ExperimentConfig loadConfig(const std::filesystem::path& path);
/// Every key in a fixed order, so parseConfig(serializeConfig(c)) == c.
std::string serializeConfig(const ExperimentConfig& config);

/// Overrides any key from IRMC_<SECTION>_<KEY> (upper case), e.g. IRMC_SAMPLER_EPS.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
void applyEnvironmentOverrides(ExperimentConfig& config, const EnvLookup& lookup);
void applyEnvironmentOverrides(ExperimentConfig& config);

/// Sets one key; `section.key` naming as in the INI file.
void setConfigValue(ExperimentConfig& config, const std::string& section, const std::string& key,
                    const std::string& value);

/// Replaces every automatic default (-1 / 0 / empty) by its concrete value.
ExperimentConfig resolveConfig(ExperimentConfig config, const std::filesystem::path& data_dir);

std::filesystem::path resolveDatasetPath(const std::string& ref, const std::filesystem::path& data_dir);
TargetDensity buildTarget(const TargetConfig& config, const std::filesystem::path& data_dir);
SamplerSpec buildSampler(const SamplerConfig& config, std::size_t dim);
DiagnosticsOptions buildDiagnostics(const DiagnosticsConfig& config);
Box parseBox(const std::string& text);
std::string formatBox(const Box& box);

std::vector<std::string> presetNames();
ExperimentConfig preset(const std::string& name);
std::vector<std::string> suiteNames();
std::vector<std::string> suite(const std::string& name);

struct RunOptions {
  unsigned threads = 0;  ///< 0: hardware concurrency
  std::filesystem::path data_dir = "data";
};

/// Runs every chain on a worker pool and writes, under config.output.dir:
/// config.ini (resolved), chain_<i>.csv, chain_<i>.json and summary.json.
/// Returns 0, or 3 after a numeric failure (completed outputs are still written).
int runExperiment(const ExperimentConfig& config, const RunOptions& options, std::ostream& log);

/// One CSV row per run directory (directories without summary.json are
/// searched one level down). Throws std::invalid_argument naming missing paths.
std::string compareRuns(const std::vector<std::filesystem::path>& runs);

DiagnosticsReport diagnoseTrace(const std::filesystem::path& trace_path, const DiagnosticsOptions& options,
                                const TargetDensity* target = nullptr);

}  // namespace irmc
