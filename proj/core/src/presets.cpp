#include <cmath>
#include <map>
#include <sstream>

#include "irmc/harness.hpp"

namespace irmc {
namespace {

struct PresetSource {
  std::string name;
  std::string ini;
};

std::string experiment(const std::string& name, std::size_t iterations, std::size_t chains, std::uint64_t seed = 1) {
  std::ostringstream s;
  s << "[experiment]\nname = " << name << "\niterations = " << iterations << "\nchains = " << chains
    << "\nseed = " << seed << "\n[output]\ndir = runs/" << name << "\n";
  return s.str();
}

std::string gammaJump(double rate, double shape = 1.1) {
  std::ostringstream s;
  s << "[sampler]\nkind = ijump\nproposal = gamma-directional\nshape = " << shape << "\nrate = " << rate
    << "\nresample_period = 100\n";
  return s.str();
}

std::string halfSpaceJump(double sigma) {
  std::ostringstream s;
  s << "[sampler]\nkind = ijump\nproposal = half-space-gaussian\nsigma = " << sigma << "\nresample_period = 100\n";
  return s.str();
}

std::string randomWalk(double sigma) {
  std::ostringstream s;
  s << "[sampler]\nkind = mh\nproposal = gaussian\nsigma = " << sigma << "\n";
  return s.str();
}

std::string gradient(const char* kind, double eps, const char* dynamics, double skew = 1.0) {
  std::ostringstream s;
  s << "[sampler]\nkind = " << kind << "\neps = " << eps << "\ndynamics = " << dynamics
    << "\ndiffusion_scale = 1\nskew_scale = " << skew << "\n";
  return s.str();
}

std::string hmc(double eps, int steps) {
  std::ostringstream s;
  s << "[sampler]\nkind = hmc\neps = " << eps << "\nleapfrog_steps = " << steps << "\n";
  return s.str();
}

std::string target(const std::string& body) { return "[target]\n" + body + "\n"; }
std::string diagnostics(const std::string& body) { return "[diagnostics]\n" + body + "\n"; }

// Sections may repeat across fragments; merge them so each appears once.
std::string merge(const std::vector<std::string>& parts) {
  std::map<std::string, std::string> sections;
  std::vector<std::string> order;
  for (const auto& p : parts) {
    std::istringstream in(p);
    std::string line, current;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line.front() == '[') {
        current = line.substr(1, line.find(']') - 1);
        if (!sections.count(current)) order.push_back(current);
        sections[current];
        continue;
      }
      sections[current] += line + "\n";
    }
  }
  std::string out;
  for (const auto& s : order) out += "[" + s + "]\n" + sections[s];
  return out;
}

const std::vector<PresetSource>& sources() {
  static const std::vector<PresetSource> list = [] {
    std::vector<PresetSource> v;
    auto add = [&](const std::string& name, std::vector<std::string> parts) {
      parts.insert(parts.begin(), experiment(name, 100000, 4));
      v.push_back({name, merge(parts)});
    };
    auto addN = [&](const std::string& name, std::size_t iters, std::size_t chains, std::vector<std::string> parts) {
      parts.insert(parts.begin(), experiment(name, iters, chains));
      v.push_back({name, merge(parts)});
    };

    const std::string normal1 = target("name = std-normal\ndim = 1");
    const std::string box1 = diagnostics("tv_box = -5:5\ntv_bins = 100");
    add("onedim-normal-ijump", {normal1, gammaJump(1.2), box1});
    add("onedim-normal-mh", {normal1, randomWalk(2.4), box1});
    const std::string lognormal = target("name = log-normal");
    const std::string boxLog = diagnostics("tv_box = 0:5\ntv_bins = 100");
    add("lognormal-ijump", {lognormal, gammaJump(0.8), boxLog});
    add("lognormal-mh", {lognormal, randomWalk(1.5), boxLog});

    const std::string normal2 = target("name = std-normal\ndim = 2");
    const std::string box2 = diagnostics("tv_box = -5:5,-5:5");
    addN("visual2d-mh", 1000, 1, {normal2, randomWalk(0.5), box2});
    addN("visual2d-ijump", 1000, 1, {normal2, gammaJump(0.15), box2});
    addN("visual2d-imala", 1000, 1, {normal2, gradient("imala", 0.1, "rotation"), box2});

    const std::pair<const char*, const char*> taus[] = {{"05", "0.5"}, {"1", "1"}, {"15", "1.5"}};
    for (const auto& [tag, tau] : taus) {
      const std::string t = target(std::string("name = bimodal\ntau = ") + tau);
      const std::string d = diagnostics("tv_box = -3:3,-1.5:1.5\nescape = sign-z0");
      const std::string base = std::string("bimodal-tau") + tag;
      addN(base + "-ijump", 100000, 20, {t, gammaJump(0.4), d});
      addN(base + "-mh", 100000, 20, {t, randomWalk(0.5), d});
    }

    const std::string multiBox = diagnostics("tv_box = -7:7,-7:7");
    add("multimodal-ijump", {target("name = multimodal"), gammaJump(1.5), multiBox});
    add("multimodal-mh", {target("name = multimodal"), randomWalk(1.0), multiBox});
    add("multimodal-concentrated-ijump", {target("name = multimodal-concentrated"), gammaJump(1.5), multiBox});
    add("multimodal-concentrated-mh", {target("name = multimodal-concentrated"), randomWalk(1.0), multiBox});

    const std::string moon = target("name = moon");
    const std::string moonBox = diagnostics("tv_box = -2.5:2.5,-1.5:0.5");
    add("moon-ijump", {moon, gammaJump(0.25), moonBox});
    add("moon-mh", {moon, randomWalk(0.3), moonBox});
    add("moon-mala", {moon, gradient("mala", 0.02, "langevin"), moonBox});
    add("moon-imala", {moon, gradient("imala", 0.02, "rotation"), moonBox});

    for (const char* dim : {"10", "20", "40"}) {
      const std::string t = target(std::string("name = std-normal\ndim = ") + dim);
      const double sigma = 2.38 / std::sqrt(std::stod(dim));
      const std::string base = std::string("gauss-d") + dim;
      addN(base + "-mh", 100000, 10, {t, randomWalk(sigma), diagnostics("tv = false")});
      addN(base + "-ijump", 100000, 10, {t, halfSpaceJump(sigma), diagnostics("tv = false")});
    }

    const std::string heart = target("name = logistic\ndataset = @heart\nlabel_column = -1\nstandardize = true\nalpha = 100");
    const std::string aus =
        target("name = logistic\ndataset = @australian\nlabel_column = -1\nstandardize = true\nalpha = 100");
    const std::string noTv = diagnostics("tv = false");
    addN("heart-mala", 50000, 10, {heart, gradient("mala", 0.02, "langevin"), noTv});
    addN("heart-imala", 50000, 10, {heart, gradient("imala", 0.012, "rotation"), noTv});
    addN("heart-hmc", 50000, 10, {heart, hmc(0.05, 10), noTv});
    addN("australian-mala", 50000, 4, {aus, gradient("mala", 0.02, "langevin"), noTv});
    addN("australian-imala", 50000, 4, {aus, gradient("imala", 0.011, "rotation"), noTv});

    for (const char* dim : {"1", "2"}) {
      const std::string t = target(std::string("name = std-normal\ndim = ") + dim);
      const std::string d = diagnostics(std::string("tv_box = ") + (dim[0] == '1' ? "-5:5\ntv_bins = 100" : "-5:5,-5:5\ntv_bins = 10"));
      const std::string p = std::string("stdnormal") + dim + "-";
      const std::pair<std::string, std::string> samplers[] = {
          {"mh", randomWalk(dim[0] == '1' ? 2.4 : 1.7)},
          {"ijump-halfspace", halfSpaceJump(dim[0] == '1' ? 2.4 : 1.7)},
          {"ijump-gamma", gammaJump(1.1)},
          {"mala", gradient("mala", dim[0] == '1' ? 2.0 : 1.4, "langevin")},
          {"imala", gradient("imala", dim[0] == '1' ? 2.0 : 0.8, "rotation")},
          {"hmc", hmc(0.3, 5)},
      };
      for (const auto& [suffix, sampler] : samplers) {
        addN(p + suffix, 1100000, 1, {"[experiment]\nburn_in = 100000\n", t, sampler, d});
      }
    }
    return v;
  }();
  return list;
}

const std::map<std::string, std::vector<std::string>>& suites() {
  static const std::map<std::string, std::vector<std::string>> s = {
      {"gauss-dims", {"gauss-d10-mh", "gauss-d10-ijump", "gauss-d20-mh", "gauss-d20-ijump", "gauss-d40-mh",
                      "gauss-d40-ijump"}},
      {"bimodal", {"bimodal-tau05-mh", "bimodal-tau05-ijump", "bimodal-tau1-mh", "bimodal-tau1-ijump",
                   "bimodal-tau15-mh", "bimodal-tau15-ijump"}},
      {"heart", {"heart-mala", "heart-imala", "heart-hmc"}},
      {"australian", {"australian-mala", "australian-imala"}},
      {"stationarity",
       {"stdnormal1-mh", "stdnormal1-ijump-halfspace", "stdnormal1-ijump-gamma", "stdnormal1-mala",
        "stdnormal1-imala", "stdnormal1-hmc", "stdnormal2-mh", "stdnormal2-ijump-halfspace", "stdnormal2-ijump-gamma",
        "stdnormal2-mala", "stdnormal2-imala", "stdnormal2-hmc"}},
      {"onedim", {"onedim-normal-mh", "onedim-normal-ijump", "lognormal-mh", "lognormal-ijump"}},
      {"moon", {"moon-mh", "moon-ijump", "moon-mala", "moon-imala"}},
  };
  return s;
}

}  // namespace

std::vector<std::string> presetNames() {
  std::vector<std::string> names;
  for (const auto& p : sources()) names.emplace_back(p.name);
  return names;
}

ExperimentConfig preset(const std::string& name) {
  for (const auto& p : sources()) {
    if (name == p.name) {
      std::istringstream in(p.ini);
      return parseConfig(in, "preset " + name);
    }
  }
  throw ConfigError("unknown preset '" + name + "' (see list-presets)");
}

std::vector<std::string> suiteNames() {
  std::vector<std::string> names;
  for (const auto& [name, members] : suites()) names.push_back(name);
  return names;
}

std::vector<std::string> suite(const std::string& name) {
  const auto it = suites().find(name);
  if (it == suites().end()) throw ConfigError("unknown suite '" + name + "'");
  return it->second;
}

}  // namespace irmc
