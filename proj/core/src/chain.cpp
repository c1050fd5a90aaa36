#include "irmc/chain.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "irmc/jump.hpp"
#include "irmc/mala.hpp"
#include "irmc/rng.hpp"

namespace irmc {

std::string toString(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::MH: return "mh";
    case SamplerKind::IJump: return "ijump";
    case SamplerKind::SDE: return "sde";
    case SamplerKind::MALA: return "mala";
    case SamplerKind::IMALA: return "imala";
    case SamplerKind::HMC: return "hmc";
  }
  return "unknown";
}

SamplerKind parseSamplerKind(const std::string& name) {
  for (auto k : {SamplerKind::MH, SamplerKind::IJump, SamplerKind::SDE, SamplerKind::MALA,
                 SamplerKind::IMALA, SamplerKind::HMC})
    if (toString(k) == name) return k;
  throw std::invalid_argument("unknown sampler '" + name + "' (expected mh, ijump, sde, mala, imala or hmc)");
}

std::string toString(ProposalFamily family) {
  switch (family) {
    case ProposalFamily::Gaussian: return "gaussian";
    case ProposalFamily::SymmetrizedGamma: return "symmetrized-gamma";
    case ProposalFamily::HalfSpaceGaussian: return "half-space-gaussian";
    case ProposalFamily::GammaDirectional: return "gamma-directional";
    case ProposalFamily::PlainGaussian: return "plain-gaussian";
  }
  return "unknown";
}

ProposalFamily parseProposalFamily(const std::string& name) {
  for (auto f : {ProposalFamily::Gaussian, ProposalFamily::SymmetrizedGamma,
                 ProposalFamily::HalfSpaceGaussian, ProposalFamily::GammaDirectional,
                 ProposalFamily::PlainGaussian})
    if (toString(f) == name) return f;
  throw std::invalid_argument("unknown proposal family '" + name + "'");
}

double ChainTrace::acceptanceRate() const {
  if (accepted.empty()) return 0.0;
  return static_cast<double>(std::accumulate(accepted.begin(), accepted.end(), std::size_t{0})) /
         static_cast<double>(accepted.size());
}

double ChainTrace::flipRate() const {
  if (flipped.empty()) return 0.0;
  return static_cast<double>(std::accumulate(flipped.begin(), flipped.end(), std::size_t{0})) /
         static_cast<double>(flipped.size());
}

namespace {

std::shared_ptr<const Proposal> mhProposal(const SamplerSpec& s, std::size_t dim) {
  switch (s.proposal) {
    case ProposalFamily::Gaussian: return gaussianRandomWalk(s.sigma, dim);
    case ProposalFamily::SymmetrizedGamma: return symmetrizedGammaProposal(s.shape, s.beta, dim);
    default: throw std::invalid_argument("mh supports the gaussian and symmetrized-gamma proposals, not " + toString(s.proposal));
  }
}

std::shared_ptr<const DirectionalProposal> liftedProposal(const SamplerSpec& s, std::size_t dim) {
  switch (s.proposal) {
    case ProposalFamily::HalfSpaceGaussian: return halfSpaceGaussianProposal(s.sigma, dim);
    case ProposalFamily::GammaDirectional: return gammaDirectionalProposal(s.shape, s.beta, dim);
    case ProposalFamily::PlainGaussian: return plainGaussianDirectional(s.sigma, dim);
    default:
      throw std::invalid_argument("ijump supports half-space-gaussian, gamma-directional and plain-gaussian, not " +
                                  toString(s.proposal));
  }
}

DynamicsSpec dynamicsFor(const SamplerSpec& s, std::size_t dim) {
  DynamicsSpec dyn = s.dynamics ? *s.dynamics : langevinDynamics(dim);
  if (dyn.dim() != dim)
    throw std::invalid_argument("dynamics dimension " + std::to_string(dyn.dim()) +
                                " does not match target dimension " + std::to_string(dim));
  return dyn;
}

class Recorder {
 public:
  Recorder(ChainTrace& trace, std::size_t burn_in) : trace_(trace), burn_in_(burn_in) {}

  void record(std::size_t iter, const Eigen::VectorXd& z, bool acc, bool flip, bool res) {
    if (iter < burn_in_) return;
    const auto row = static_cast<Eigen::Index>(iter - burn_in_);
    trace_.states.row(row) = z.transpose();
    trace_.accepted[static_cast<std::size_t>(row)] = acc;
    trace_.flipped[static_cast<std::size_t>(row)] = flip;
    trace_.resampled[static_cast<std::size_t>(row)] = res;
    recorded_ = static_cast<std::size_t>(row) + 1;
  }
  std::size_t recorded() const { return recorded_; }

 private:
  ChainTrace& trace_;
  std::size_t burn_in_;
  std::size_t recorded_ = 0;
};

bool resampleDue(std::size_t period, std::size_t iter) { return period > 0 && iter > 0 && iter % period == 0; }

}  // namespace

ChainTrace runChain(const SamplerSpec& spec, const TargetDensity& target, std::size_t iterations,
                    std::size_t burn_in, std::uint64_t seed, std::optional<Eigen::VectorXd> initial) {
  if (iterations <= burn_in) throw std::invalid_argument("iterations must exceed burn-in");
  const std::size_t dim = target.dim();
  Eigen::VectorXd z = initial ? *initial : target.initialPoint();
  if (static_cast<std::size_t>(z.size()) != dim) throw std::invalid_argument("initial point dimension mismatch");
  const double h0 = target.potential(z);
  if (!std::isfinite(h0))
    throw InitializationError("potential is not finite at the initial state of target '" + target.name() + "'");

  ChainTrace trace;
  trace.seed = seed;
  trace.burn_in = burn_in;
  trace.sampler = toString(spec.kind);
  const std::size_t n = iterations - burn_in;
  trace.states.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  trace.accepted.assign(n, 0);
  trace.flipped.assign(n, 0);
  trace.resampled.assign(n, 0);
  Recorder rec(trace, burn_in);

  Rng rng(seed);
  Rng aux(auxSeed(seed));
  const auto start = std::chrono::steady_clock::now();

  try {
    switch (spec.kind) {
      case SamplerKind::MH: {
        const auto q = mhProposal(spec, dim);
        double h = h0;
        for (std::size_t t = 0; t < iterations; ++t) {
          MhResult r = mhStep(z, h, target, *q, rng);
          z = std::move(r.z);
          h = r.potential;
          rec.record(t, z, r.accepted, false, false);
        }
        break;
      }
      case SamplerKind::IJump: {
        const auto q = liftedProposal(spec, dim);
        LiftedState state{z, q->sampleAux(aux)};
        double h = h0;
        for (std::size_t t = 0; t < iterations; ++t) {
          const bool res = resampleDue(spec.resample_period, t);
          if (res) state = resampleAux(state, *q, aux);
          IJumpResult r = iJumpStep(state, h, target, *q, rng);
          state = std::move(r.state);
          h = r.potential;
          rec.record(t, state.z, r.accepted, r.flipped, res);
        }
        break;
      }
      case SamplerKind::SDE: {
        const DynamicsSpec dyn = dynamicsFor(spec, dim);
        const StepSchedule sched(spec.eps);
        for (std::size_t t = 0; t < iterations; ++t) {
          z = sdeStep(z, target, dyn, sched, rng);
          if (!z.allFinite()) throw NumericError("SDE state became non-finite at iteration " + std::to_string(t));
          rec.record(t, z, true, false, false);
        }
        break;
      }
      case SamplerKind::MALA: {
        const DynamicsSpec dyn = dynamicsFor(spec, dim);
        if (dyn.hasSkew()) throw std::invalid_argument("mala requires Q = 0; use imala for skew dynamics");
        const OneStepKernel forward(dyn, spec.eps, Direction::Forward);
        EvaluatedPoint p = evaluate(target, z);
        for (std::size_t t = 0; t < iterations; ++t) {
          GradientStepResult r = malaStep(p, target, forward, rng);
          p = std::move(r.point);
          rec.record(t, p.z, r.accepted, false, false);
        }
        break;
      }
      case SamplerKind::IMALA: {
        const DynamicsSpec dyn = dynamicsFor(spec, dim);
        const OneStepKernel forward(dyn, spec.eps, Direction::Forward);
        const OneStepKernel adjoint(dyn, spec.eps, Direction::Adjoint);
        EvaluatedPoint p = evaluate(target, z);
        double zp = aux.sign();
        for (std::size_t t = 0; t < iterations; ++t) {
          const bool res = resampleDue(spec.resample_period, t);
          if (res) zp = aux.sign();
          LiftedGradientStepResult r = imalaStep(p, zp, target, forward, adjoint, rng);
          p = std::move(r.point);
          zp = r.zp;
          rec.record(t, p.z, r.accepted, r.flipped, res);
        }
        break;
      }
      case SamplerKind::HMC: {
        const auto d = static_cast<Eigen::Index>(dim);
        Eigen::MatrixXd minv = spec.mass_inverse.size() ? spec.mass_inverse : Eigen::MatrixXd::Identity(d, d);
        if (minv.rows() != d) throw std::invalid_argument("inverse mass matrix dimension mismatch");
        const HamiltonianKernel kernel(std::move(minv), spec.eps, spec.leapfrog_steps);
        EvaluatedPoint p = evaluate(target, z);
        for (std::size_t t = 0; t < iterations; ++t) {
          GradientStepResult r = kernel.step(p, target, rng);
          p = std::move(r.point);
          rec.record(t, p.z, r.accepted, false, false);
        }
        break;
      }
    }
  } catch (const NumericError& e) {
    const auto kept = static_cast<Eigen::Index>(rec.recorded());
    trace.states.conservativeResize(kept, static_cast<Eigen::Index>(dim));
    trace.accepted.resize(rec.recorded());
    trace.flipped.resize(rec.recorded());
    trace.resampled.resize(rec.recorded());
    trace.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    throw ChainAborted(e.what(), std::move(trace));
  }
  trace.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

namespace {

void appendDouble(std::string& buf, double v) {
  char tmp[32];
  auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
  buf.append(tmp, ptr);
}

std::vector<std::string> expectedHeader(std::size_t dim) {
  std::vector<std::string> cols{"iter", "accepted", "flipped", "resampled"};
  for (std::size_t i = 0; i < dim; ++i) cols.push_back("z_" + std::to_string(i));
  return cols;
}

std::vector<std::string_view> splitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string joinColumns(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s;
}

}  // namespace

void writeTraceCsv(std::ostream& out, const ChainTrace& trace) {
  std::string buf = joinColumns(expectedHeader(trace.dim()));
  buf += '\n';
  const auto d = trace.states.cols();
  for (std::size_t t = 0; t < trace.size(); ++t) {
    buf += std::to_string(trace.burn_in + t + 1);
    buf += trace.accepted[t] ? ",1" : ",0";
    buf += trace.flipped[t] ? ",1" : ",0";
    buf += trace.resampled[t] ? ",1" : ",0";
    for (Eigen::Index j = 0; j < d; ++j) {
      buf += ',';
      appendDouble(buf, trace.states(static_cast<Eigen::Index>(t), j));
    }
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void writeTraceCsv(const std::filesystem::path& path, const ChainTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  writeTraceCsv(out, trace);
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

ChainTrace readTraceCsv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> found;
  for (auto f : splitCommas(line)) found.emplace_back(f);
  std::size_t dim = 0;
  while (dim + 4 < found.size() && found[dim + 4] == "z_" + std::to_string(dim)) ++dim;
  const auto expected = expectedHeader(std::max<std::size_t>(dim, 1));
  if (found != expected) {
    std::string missing;
    std::string extra;
    for (const auto& c : expected)
      if (std::find(found.begin(), found.end(), c) == found.end()) missing += " " + c;
    for (const auto& c : found)
      if (std::find(expected.begin(), expected.end(), c) == expected.end()) extra += " " + c;
    std::string msg = source + ": trace header mismatch; expected '" + joinColumns(expected) +
                      "', found '" + line + "'";
    if (!missing.empty()) msg += "; missing:" + missing;
    if (!extra.empty()) msg += "; unexpected:" + extra;
    if (missing.empty() && extra.empty()) msg += "; columns out of order";
    throw ParseError(msg);
  }

  std::vector<double> values;
  std::vector<std::uint8_t> acc, flip, res;
  std::size_t first_iter = 0;
  std::size_t lineno = 1;
  std::string last_good = "none (no complete data rows)";
  const std::size_t width = 4 + dim;
  auto fail = [&](const std::string& why) {
    throw ParseError(source + ":" + std::to_string(lineno) + ": " + why + "; last good row: " + last_good);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = splitCommas(line);
    if (fields.size() != width)
      fail("expected " + std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    std::size_t iter = 0;
    {
      auto [p, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), iter);
      if (ec != std::errc{} || p != fields[0].data() + fields[0].size()) fail("bad iter field '" + std::string(fields[0]) + "'");
    }
    std::uint8_t flags[3];
    for (int k = 0; k < 3; ++k) {
      const auto f = fields[static_cast<std::size_t>(k) + 1];
      if (f != "0" && f != "1") fail("flag column must be 0 or 1, found '" + std::string(f) + "'");
      flags[k] = f == "1";
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const auto f = fields[4 + j];
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) fail("non-numeric value '" + std::string(f) + "' in column z_" + std::to_string(j));
      values.push_back(v);
    }
    if (acc.empty()) first_iter = iter;
    acc.push_back(flags[0]);
    flip.push_back(flags[1]);
    res.push_back(flags[2]);
    last_good = "iter " + std::to_string(iter) + " (line " + std::to_string(lineno) + ")";
  }
  if (acc.empty()) throw ParseError(source + ": trace has no data rows");

  ChainTrace trace;
  trace.burn_in = first_iter > 0 ? first_iter - 1 : 0;
  trace.states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(acc.size()), static_cast<Eigen::Index>(dim));
  trace.accepted = std::move(acc);
  trace.flipped = std::move(flip);
  trace.resampled = std::move(res);
  return trace;
}

ChainTrace readTraceCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open trace '" + path.string() + "'");
  return readTraceCsv(in, path.string());
}

}  // namespace irmc
