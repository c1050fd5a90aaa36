#include "irmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "irmc/dataset.hpp"
#include "irmc/rng.hpp"

namespace irmc {
namespace {

using nlohmann::json;

std::string formatDouble(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

[[noreturn]] void badValue(const std::string& where, const std::string& value, const char* expected) {
  throw ConfigError(where + ": invalid value '" + value + "' (expected " + expected + ")");
}

template <class T>
T parseValue(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    badValue(where, v, "true or false");
  } else if constexpr (std::is_floating_point_v<T>) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) badValue(where, v, "a number");
    return out;
  } else {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) badValue(where, v, "an integer");
    return out;
  }
}

template <class T>
std::string formatValue(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) return v;
  else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
  else if constexpr (std::is_floating_point_v<T>) return formatDouble(v);
  else return std::to_string(v);
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class S, class T>
Field field(const char* section, const char* key, S ExperimentConfig::*sec, T S::*member) {
  const std::string where = std::string(section) + "." + key;
  return Field{section, key,
               [=](const ExperimentConfig& c) { return formatValue((c.*sec).*member); },
               [=](ExperimentConfig& c, const std::string& v) { (c.*sec).*member = parseValue<T>(v, where); }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> f = {
      field("experiment", "name", &C::experiment, &ExperimentSection::name),
      field("experiment", "iterations", &C::experiment, &ExperimentSection::iterations),
      field("experiment", "burn_in", &C::experiment, &ExperimentSection::burn_in),
      field("experiment", "chains", &C::experiment, &ExperimentSection::chains),
      field("experiment", "seed", &C::experiment, &ExperimentSection::seed),
      field("target", "name", &C::target, &TargetConfig::name),
      field("target", "dim", &C::target, &TargetConfig::dim),
      field("target", "tau", &C::target, &TargetConfig::tau),
      field("target", "components", &C::target, &TargetConfig::components),
      field("target", "box", &C::target, &TargetConfig::box),
      field("target", "dataset", &C::target, &TargetConfig::dataset),
      field("target", "label_column", &C::target, &TargetConfig::label_column),
      field("target", "standardize", &C::target, &TargetConfig::standardize),
      field("target", "alpha", &C::target, &TargetConfig::alpha),
      field("sampler", "kind", &C::sampler, &SamplerConfig::kind),
      field("sampler", "proposal", &C::sampler, &SamplerConfig::proposal),
      field("sampler", "sigma", &C::sampler, &SamplerConfig::sigma),
      field("sampler", "shape", &C::sampler, &SamplerConfig::shape),
      field("sampler", "rate", &C::sampler, &SamplerConfig::rate),
      field("sampler", "eps", &C::sampler, &SamplerConfig::eps),
      field("sampler", "leapfrog_steps", &C::sampler, &SamplerConfig::leapfrog_steps),
      field("sampler", "dynamics", &C::sampler, &SamplerConfig::dynamics),
      field("sampler", "diffusion_scale", &C::sampler, &SamplerConfig::diffusion_scale),
      field("sampler", "skew_scale", &C::sampler, &SamplerConfig::skew_scale),
      field("sampler", "resample_period", &C::sampler, &SamplerConfig::resample_period),
      field("diagnostics", "ess_window", &C::diagnostics, &DiagnosticsConfig::ess_window),
      field("diagnostics", "mbm_batches", &C::diagnostics, &DiagnosticsConfig::mbm_batches),
      field("diagnostics", "mbm_variant", &C::diagnostics, &DiagnosticsConfig::mbm_variant),
      field("diagnostics", "mbm_fallback", &C::diagnostics, &DiagnosticsConfig::mbm_fallback),
      field("diagnostics", "tv", &C::diagnostics, &DiagnosticsConfig::tv),
      field("diagnostics", "tv_bins", &C::diagnostics, &DiagnosticsConfig::tv_bins),
      field("diagnostics", "tv_box", &C::diagnostics, &DiagnosticsConfig::tv_box),
      field("diagnostics", "escape", &C::diagnostics, &DiagnosticsConfig::escape),
      field("diagnostics", "acf_lags", &C::diagnostics, &DiagnosticsConfig::acf_lags),
      field("output", "dir", &C::output, &OutputConfig::dir),
      field("output", "write_traces", &C::output, &OutputConfig::write_traces),
  };
  return f;
}

const Field& findField(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return f;
  throw ConfigError("unknown config key '" + section + "." + key + "'");
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(c == '-' ? '_' : std::toupper(static_cast<unsigned char>(c)));
  return s;
}

json configToJson(const ExperimentConfig& c) {
  json j = json::object();
  for (const auto& f : fields()) j[f.section][f.key] = f.get(c);
  return j;
}

void writeText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> splitDoubles(const std::string& s, char sep, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(parseValue<double>(tok, where));
  return out;
}

std::vector<MixtureComponent> parseComponents(const std::string& text) {
  std::vector<MixtureComponent> comps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto a = item.find(':');
    const auto b = item.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw ConfigError("target.components: expected 'weight:scale:m0,m1' items, got '" + item + "'");
    MixtureComponent c;
    c.weight = parseValue<double>(item.substr(0, a), "target.components weight");
    c.scale = parseValue<double>(item.substr(a + 1, b - a - 1), "target.components scale");
    const auto m = splitDoubles(item.substr(b + 1), ',', "target.components mean");
    c.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    comps.push_back(std::move(c));
  }
  if (comps.empty()) throw ConfigError("target.components is empty");
  return comps;
}

}  // namespace

Box parseBox(const std::string& text) {
  Box box;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("box: expected 'lo:hi' intervals, got '" + item + "'");
    Interval iv{parseValue<double>(item.substr(0, colon), "box lower bound"),
                parseValue<double>(item.substr(colon + 1), "box upper bound")};
    if (!(iv.hi > iv.lo)) throw ConfigError("box: interval '" + item + "' is empty");
    box.push_back(iv);
  }
  if (box.empty()) throw ConfigError("box is empty");
  return box;
}

std::string formatBox(const Box& box) {
  std::string s;
  for (std::size_t i = 0; i < box.size(); ++i)
    s += (i ? "," : "") + formatDouble(box[i].lo) + ":" + formatDouble(box[i].hi);
  return s;
}

ExperimentConfig parseConfig(std::istream& in, const std::string& source) {
  namespace pt = boost::property_tree;
  // read_ini only knows whole-line comments; drop trailing " ; ..." / " # ..." too.
  std::stringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    cleaned << line << '\n';
  }
  pt::ptree tree;
  try {
    pt::read_ini(cleaned, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ExperimentConfig cfg;
  static const std::set<std::string> sections{"experiment", "target", "sampler", "diagnostics", "output"};
  for (const auto& [name, node] : tree) {
    if (node.empty()) throw ConfigError(source + ": key '" + name + "' is outside any section");
    if (!sections.count(name)) throw ConfigError(source + ": unknown section [" + name + "]");
    for (const auto& [key, value] : node) {
      try {
        findField(name, key).set(cfg, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
      }
    }
  }
  return cfg;
}

ExperimentConfig loadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parseConfig(in, path.string());
}

std::string serializeConfig(const ExperimentConfig& config) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      out += (current.empty() ? "[" : "\n[") + f.section + "]\n";
      current = f.section;
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

void setConfigValue(ExperimentConfig& config, const std::string& section, const std::string& key,
                    const std::string& value) {
  findField(section, key).set(config, value);
}

void applyEnvironmentOverrides(ExperimentConfig& config, const EnvLookup& lookup) {
  for (const auto& f : fields()) {
    const std::string var = "IRMC_" + upper(f.section) + "_" + upper(f.key);
    if (auto v = lookup(var)) {
      try {
        f.set(config, *v);
      } catch (const ConfigError& e) {
        throw ConfigError("environment " + var + ": " + e.what());
      }
    }
  }
}

void applyEnvironmentOverrides(ExperimentConfig& config) {
  applyEnvironmentOverrides(config, [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  });
}

std::filesystem::path resolveDatasetPath(const std::string& ref, const std::filesystem::path& data_dir) {
  if (ref.empty()) throw ConfigError("target.dataset is required for the logistic target");
  if (ref == "@heart") return data_dir / "heart.dat";
  if (ref == "@australian") return data_dir / "australian.dat";
  if (ref.front() == '@') throw ConfigError("unknown bundled dataset '" + ref + "' (expected @heart or @australian)");
  return ref;
}

TargetDensity buildTarget(const TargetConfig& c, const std::filesystem::path& data_dir) {
  const std::string& n = c.name;
  try {
    if (n == "std-normal") return stdNormalTarget(c.dim);
    if (n == "log-normal") return logNormalTarget();
    if (n == "bimodal") return bimodalTarget(c.tau);
    if (n == "moon") return moonTarget();
    if (n == "multimodal") return gaussianMixtureTarget(multimodalPreset(false));
    if (n == "multimodal-concentrated") return gaussianMixtureTarget(multimodalPreset(true));
    if (n == "gaussian-mixture") return gaussianMixtureTarget(parseComponents(c.components));
    if (n == "uniform") return uniformBoxTarget(parseBox(c.box));
    if (n == "logistic") {
      const auto data = loadStatlogCsv(resolveDatasetPath(c.dataset, data_dir), c.label_column, c.standardize);
      return logisticRegressionTarget(data, c.alpha);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("target '" + n + "': " + e.what());
  }
  throw ConfigError("unknown target '" + n +
                    "' (expected std-normal, log-normal, bimodal, moon, multimodal, multimodal-concentrated, "
                    "gaussian-mixture, uniform or logistic)");
}

SamplerSpec buildSampler(const SamplerConfig& c, std::size_t dim) {
  SamplerSpec s;
  try {
    s.kind = parseSamplerKind(c.kind);
    s.proposal = parseProposalFamily(c.proposal);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const bool mh_family = s.proposal == ProposalFamily::Gaussian || s.proposal == ProposalFamily::SymmetrizedGamma;
  if (s.kind == SamplerKind::MH && !mh_family)
    throw ConfigError("sampler kind mh needs proposal gaussian or symmetrized-gamma, not " + c.proposal);
  if (s.kind == SamplerKind::IJump && mh_family)
    throw ConfigError("sampler kind ijump needs a directional proposal, not " + c.proposal);
  s.sigma = c.sigma;
  s.shape = c.shape;
  s.beta = c.rate;
  s.eps = c.eps;
  s.leapfrog_steps = c.leapfrog_steps;
  if (c.resample_period < -1) throw ConfigError("sampler.resample_period must be >= 0 (or -1 for the default)");
  s.resample_period = c.resample_period < 0 ? (s.kind == SamplerKind::IJump ? 100 : 0)
                                            : static_cast<std::size_t>(c.resample_period);
  if (s.kind == SamplerKind::SDE || s.kind == SamplerKind::MALA || s.kind == SamplerKind::IMALA) {
    const auto d = static_cast<Eigen::Index>(dim);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
    try {
      if (c.dynamics == "langevin")
        s.dynamics = constantDynamics(c.diffusion_scale * eye, Eigen::MatrixXd::Zero(d, d));
      else if (c.dynamics == "rotation")
        s.dynamics = constantDynamics(c.diffusion_scale * eye, c.skew_scale * blockRotationSkew(dim));
      else if (c.dynamics == "hamiltonian")
        s.dynamics = constantDynamics(Eigen::MatrixXd::Zero(d, d), c.skew_scale * blockRotationSkew(dim));
      else
        throw ConfigError("unknown dynamics '" + c.dynamics + "' (expected langevin, rotation or hamiltonian)");
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("sampler dynamics: ") + e.what());
    }
    if (s.kind != SamplerKind::SDE && c.dynamics == "hamiltonian")
      throw ConfigError("dynamics hamiltonian has D = 0, so the " + c.kind + " proposal would be degenerate; use sde");
    if (s.kind == SamplerKind::MALA && s.dynamics->hasSkew())
      throw ConfigError("sampler kind mala requires Q = 0; use imala with dynamics = rotation");
  }
  if (!(s.sigma > 0.0) || !(s.shape > 0.0) || !(s.beta > 0.0) || !(s.eps > 0.0))
    throw ConfigError("sampler sigma, shape, rate and eps must be positive");
  if (s.leapfrog_steps < 1) throw ConfigError("sampler.leapfrog_steps must be at least 1");
  return s;
}

DiagnosticsOptions buildDiagnostics(const DiagnosticsConfig& c) {
  DiagnosticsOptions o;
  if (c.ess_window < 0 || c.mbm_batches < 0) throw ConfigError("diagnostics window and batch counts must be >= 0");
  if (c.ess_window > 0) o.ess_window = static_cast<std::size_t>(c.ess_window);
  o.mbm.batches = static_cast<std::size_t>(c.mbm_batches);
  try {
    o.mbm.variant = parseMbmVariant(c.mbm_variant);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  o.mbm.allow_fallback = c.mbm_fallback;
  o.acf_lags = c.acf_lags;
  o.tv = c.tv;
  o.tv_bins = c.tv_bins;
  if (!c.tv_box.empty()) o.tv_box = parseBox(c.tv_box);
  if (c.escape == "sign-z0") o.escape_sign_z0 = true;
  else if (c.escape != "none") throw ConfigError("unknown escape classifier '" + c.escape + "' (expected none or sign-z0)");
  if (o.tv_bins < 1) throw ConfigError("diagnostics.tv_bins must be positive");
  if (o.acf_lags < 1) throw ConfigError("diagnostics.acf_lags must be positive");
  return o;
}

ExperimentConfig resolveConfig(ExperimentConfig c, const std::filesystem::path& data_dir) {
  auto& e = c.experiment;
  if (e.iterations < 2) throw ConfigError("experiment.iterations must be at least 2");
  if (e.chains < 1) throw ConfigError("experiment.chains must be at least 1");
  if (e.burn_in < -1) throw ConfigError("experiment.burn_in must be >= 0 (or -1 for 10%)");
  if (e.burn_in == -1) e.burn_in = static_cast<long long>(e.iterations / 10);
  if (static_cast<std::size_t>(e.burn_in) >= e.iterations) throw ConfigError("experiment.burn_in must be below iterations");

  const TargetDensity target = buildTarget(c.target, data_dir);
  c.target.dim = target.dim();
  const SamplerSpec spec = buildSampler(c.sampler, target.dim());
  c.sampler.resample_period = static_cast<long long>(spec.resample_period);
  const DiagnosticsOptions diag = buildDiagnostics(c.diagnostics);

  const std::size_t n = e.iterations - static_cast<std::size_t>(e.burn_in);
  if (c.diagnostics.ess_window == 0) c.diagnostics.ess_window = static_cast<long long>(defaultBartlettWindow(n));
  if (c.diagnostics.mbm_batches == 0)
    c.diagnostics.mbm_batches = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(n))));
  if (c.diagnostics.tv_box.empty() && target.dim() <= 2 && target.supportBox())
    c.diagnostics.tv_box = formatBox(*target.supportBox());
  (void)diag;
  return c;
}

namespace {

struct ChainOutcome {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<ChainTrace> trace;
  std::optional<DiagnosticsReport> report;
  std::string error;
};

// Single-consumer queue between chain workers and the file-writing collector.
class OutcomeQueue {
 public:
  void push(ChainOutcome o) {
    {
      std::lock_guard lock(m_);
      q_.push_back(std::move(o));
    }
    cv_.notify_one();
  }
  ChainOutcome pop() {
    std::unique_lock lock(m_);
    cv_.wait(lock, [&] { return !q_.empty(); });
    ChainOutcome o = std::move(q_.front());
    q_.pop_front();
    return o;
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::deque<ChainOutcome> q_;
};

struct ChainSummary {
  bool ok = false;
  std::string error;
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  double acceptance = 0.0;
  double ess_bw_min = 0.0;
  double ess_mbm = 0.0;
  std::optional<double> tv;
  std::optional<EscapeTimes> escape;
  double wall = 0.0;
  Eigen::VectorXd mean;
  Eigen::VectorXd mcse;
};

}  // namespace

int runExperiment(const ExperimentConfig& input, const RunOptions& options, std::ostream& log) {
  const ExperimentConfig cfg = resolveConfig(input, options.data_dir);
  const TargetDensity target = buildTarget(cfg.target, options.data_dir);
  const SamplerSpec spec = buildSampler(cfg.sampler, target.dim());
  const DiagnosticsOptions diag = buildDiagnostics(cfg.diagnostics);

  const std::filesystem::path out_dir = cfg.output.dir;
  std::filesystem::create_directories(out_dir);
  writeText(out_dir / "config.ini", serializeConfig(cfg));

  const std::size_t chains = cfg.experiment.chains;
  const std::size_t iters = cfg.experiment.iterations;
  const auto burn = static_cast<std::size_t>(cfg.experiment.burn_in);
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, chains));

  OutcomeQueue queue;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < chains; i = next++) {
      ChainOutcome o;
      o.index = i;
      o.seed = chainSeed(cfg.experiment.seed, i);
      try {
        o.trace = runChain(spec, target, iters, burn, o.seed);
        o.report = diagnose(*o.trace, diag, &target);
      } catch (const ChainAborted& e) {
        o.trace = e.partial();
        o.error = e.what();
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      queue.push(std::move(o));
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);

  const json cfg_json = configToJson(cfg);
  std::vector<ChainSummary> summaries(chains);
  for (std::size_t received = 0; received < chains; ++received) {
    ChainOutcome o = queue.pop();
    ChainSummary& s = summaries[o.index];
    s.seed = o.seed;
    const std::string stem = "chain_" + std::to_string(o.index);
    if (o.trace && cfg.output.write_traces) writeTraceCsv(out_dir / (stem + ".csv"), *o.trace);
    json chain_cfg = cfg_json;
    chain_cfg["chain"] = {{"index", o.index}, {"seed", o.seed}};
    if (o.report) {
      const auto& r = *o.report;
      writeText(out_dir / (stem + ".json"), r.toJson(chain_cfg.dump()) + "\n");
      s.ok = o.error.empty();
      s.rows = r.iterations;
      s.acceptance = r.acceptance_rate;
      s.ess_bw_min = r.ess_bw_min;
      s.ess_mbm = r.ess_mbm.ess;
      s.tv = r.tv;
      s.escape = r.escape;
      s.wall = r.wall_time_seconds;
      s.mean = o.trace->states.colwise().mean().transpose();
      const Eigen::RowVectorXd mu = o.trace->states.colwise().mean();
      const Eigen::VectorXd var =
          ((o.trace->states.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(r.iterations - 1))
              .transpose();
      s.mcse = (var.array() / r.ess_bw.array().max(1.0)).sqrt();
    } else {
      json j = {{"error", o.error}, {"rows_written", o.trace ? o.trace->size() : 0}, {"config", chain_cfg}};
      writeText(out_dir / (stem + ".json"), j.dump(2) + "\n");
    }
    if (!o.error.empty()) {
      s.ok = false;
      s.error = o.error;
      log << "chain " << o.index << " failed: " << o.error << "\n";
    }
  }
  pool.clear();

  json sum;
  sum["experiment"] = cfg.experiment.name;
  sum["sampler"] = cfg.sampler.kind;
  sum["proposal"] = cfg.sampler.proposal;
  sum["target"] = cfg.target.name;
  sum["dim"] = target.dim();
  sum["chains"] = chains;
  sum["iterations"] = iters;
  sum["burn_in"] = burn;
  sum["post_burn_in"] = iters - burn;
  sum["seed"] = cfg.experiment.seed;
  json errors = json::array();
  json detail = json::array();
  double acc = 0, ess = 0, mbm = 0, tv = 0, wall = 0;
  std::size_t ok = 0, tv_n = 0;
  std::vector<EscapeTimes> escapes;
  std::size_t gap_count = 0;
  double gap_sum = 0.0;
  const auto d = static_cast<Eigen::Index>(target.dim());
  Eigen::VectorXd mean_sum = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd se2_sum = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < chains; ++i) {
    const ChainSummary& s = summaries[i];
    json c = {{"index", i}, {"seed", s.seed}, {"ok", s.ok}};
    if (!s.error.empty()) {
      c["error"] = s.error;
      errors.push_back("chain " + std::to_string(i) + ": " + s.error);
    }
    if (s.ok) {
      ++ok;
      acc += s.acceptance;
      ess += s.ess_bw_min;
      mbm += s.ess_mbm;
      wall += s.wall;
      mean_sum += s.mean;
      se2_sum += s.mcse.array().square().matrix();
      c["acceptance_rate"] = s.acceptance;
      c["ess_bw_min"] = num(s.ess_bw_min);
      c["ess_mbm"] = num(s.ess_mbm);
      c["wall_time_seconds"] = s.wall;
      if (s.tv) {
        tv += *s.tv;
        ++tv_n;
        c["tv"] = *s.tv;
      }
      if (s.escape) {
        escapes.push_back(*s.escape);
        for (auto g : s.escape->gaps) gap_sum += static_cast<double>(g);
        gap_count += s.escape->gaps.size();
        c["mean_escape_time"] = num(s.escape->mean());
        c["escape_switches"] = s.escape->switches;
      }
    }
    detail.push_back(std::move(c));
  }
  const double n_post = static_cast<double>(iters - burn);
  sum["status"] = ok == chains ? "ok" : "failed";
  sum["errors"] = errors;
  sum["completed_chains"] = ok;
  if (ok) {
    const double k = static_cast<double>(ok);
    sum["acceptance_rate"] = acc / k;
    sum["ess_bw_min"] = num(ess / k);
    sum["ess_bw_min_per_iter"] = num(ess / k / n_post);
    sum["ess_bw_min_per_sec"] = wall > 0 ? num(ess / wall) : json(nullptr);
    sum["ess_mbm"] = num(mbm / k);
    sum["ess_mbm_per_iter"] = num(mbm / k / n_post);
    sum["ess_mbm_per_sec"] = wall > 0 ? num(mbm / wall) : json(nullptr);
    sum["ess_mbm_variant"] = cfg.diagnostics.mbm_variant;
    sum["tv"] = tv_n ? json(tv / static_cast<double>(tv_n)) : json(nullptr);
    sum["mean_escape_time"] = gap_count ? json(gap_sum / static_cast<double>(gap_count)) : json(nullptr);
    sum["pooled_escape_time"] = escapes.empty() ? json(nullptr) : num(pooledEscapeTime(escapes));
    const Eigen::VectorXd pm = mean_sum / k;
    const Eigen::VectorXd se = se2_sum.cwiseSqrt() / k;
    sum["posterior_mean"] = std::vector<double>(pm.data(), pm.data() + pm.size());
    sum["posterior_mcse"] = std::vector<double>(se.data(), se.data() + se.size());
  }
  sum["wall_time_seconds"] = wall;
  sum["chains_detail"] = detail;
  writeText(out_dir / "summary.json", sum.dump(2) + "\n");
  log << cfg.experiment.name << ": " << ok << "/" << chains << " chains completed, output in " << out_dir.string() << "\n";
  return ok == chains ? 0 : 3;
}

namespace {

std::string csvCell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v.get<double>());
    return buf;
  }
  return v.dump();
}

}  // namespace

std::string compareRuns(const std::vector<std::filesystem::path>& runs) {
  namespace fs = std::filesystem;
  std::vector<fs::path> summaries;
  std::vector<std::string> missing;
  for (const auto& r : runs) {
    if (fs::is_regular_file(r / "summary.json")) {
      summaries.push_back(r / "summary.json");
      continue;
    }
    std::vector<fs::path> nested;
    if (fs::is_directory(r))
      for (const auto& entry : fs::directory_iterator(r))
        if (fs::is_regular_file(entry.path() / "summary.json")) nested.push_back(entry.path() / "summary.json");
    if (nested.empty()) {
      missing.push_back(r.string());
      continue;
    }
    std::sort(nested.begin(), nested.end());
    summaries.insert(summaries.end(), nested.begin(), nested.end());
  }
  if (!missing.empty()) {
    std::string msg = "no completed run (summary.json) found at:";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }
  static const std::vector<std::string> cols{
      "experiment", "sampler", "proposal", "target", "dim", "chains", "post_burn_in", "acceptance_rate",
      "ess_bw_min_per_iter", "ess_bw_min_per_sec", "ess_mbm_per_iter", "ess_mbm_per_sec", "mean_escape_time",
      "pooled_escape_time", "tv"};
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& p : summaries) {
    std::ifstream in(p);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(p.string() + ": " + e.what());
    }
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + (j.contains(cols[i]) ? csvCell(j[cols[i]]) : "");
    out += "\n";
  }
  return out;
}

DiagnosticsReport diagnoseTrace(const std::filesystem::path& trace_path, const DiagnosticsOptions& options,
                                const TargetDensity* target) {
  const ChainTrace trace = readTraceCsv(trace_path);
  if (target && target->dim() != trace.dim())
    throw std::invalid_argument("trace has " + std::to_string(trace.dim()) + " columns but target '" +
                                target->name() + "' has dimension " + std::to_string(target->dim()));
  return diagnose(trace, options, target);
}

}  // namespace irmc
