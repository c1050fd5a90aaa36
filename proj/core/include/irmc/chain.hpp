#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "irmc/dynamics.hpp"
#include "irmc/errors.hpp"
#include "irmc/targets.hpp"

namespace irmc {

enum class SamplerKind { MH, IJump, SDE, MALA, IMALA, HMC };

std::string toString(SamplerKind kind);
/// Accepts mh, ijump, sde, mala, imala, hmc; throws std::invalid_argument otherwise.
SamplerKind parseSamplerKind(const std::string& name);

/// Proposal families used by MH and I-Jump.
enum class ProposalFamily { Gaussian, SymmetrizedGamma, HalfSpaceGaussian, GammaDirectional, PlainGaussian };

std::string toString(ProposalFamily family);
ProposalFamily parseProposalFamily(const std::string& name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::MH;
  ProposalFamily proposal = ProposalFamily::Gaussian;
  double sigma = 1.0;  ///< Gaussian proposal standard deviation
  double shape = 1.1;  ///< gamma shape
  double beta = 1.0;   ///< gamma scale: the mean increment is shape * beta
  double eps = 0.1;    ///< step size for sde, mala, imala, hmc
  int leapfrog_steps = 10;
  /// Dynamics for sde/mala/imala; Langevin (D = I, Q = 0) when empty.
  std::optional<DynamicsSpec> dynamics;
  /// HMC inverse mass; identity when empty.
  Eigen::MatrixXd mass_inverse;
  /// Redraw the direction every this many iterations; 0 disables.
  std::size_t resample_period = 0;
};

/// Post-burn-in record of one chain. Row t of `states` is the state after
/// iteration burn_in + t + 1.
struct ChainTrace {
  Eigen::MatrixXd states;  ///< iterations x dim
  std::vector<std::uint8_t> accepted;
  std::vector<std::uint8_t> flipped;
  std::vector<std::uint8_t> resampled;
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;
  std::string sampler;
  double wall_time_seconds = 0.0;

  std::size_t size() const { return accepted.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(states.cols()); }
  double acceptanceRate() const;
  double flipRate() const;
};

/// Thrown when H is not finite at the initial state.
class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failure mid-run; carries the rows recorded before the failure.
class ChainAborted : public NumericError {
 public:
  ChainAborted(const std::string& what, ChainTrace partial)
      : NumericError(what), partial_(std::move(partial)) {}
  const ChainTrace& partial() const { return partial_; }

 private:
  ChainTrace partial_;
};

/// Runs `iterations` total steps and records the last iterations - burn_in.
/// Two streams are derived from `seed`: the main one drives proposals and
/// accept decisions, the auxiliary one (auxSeed(seed)) the direction
/// variable. Deterministic given the arguments.
ChainTrace runChain(const SamplerSpec& spec, const TargetDensity& target, std::size_t iterations,
                    std::size_t burn_in, std::uint64_t seed,
                    std::optional<Eigen::VectorXd> initial = std::nullopt);

/// CSV with header iter,accepted,flipped,resampled,z_0,...,z_{d-1}. Values are
/// written in shortest round-trip form.
void writeTraceCsv(std::ostream& out, const ChainTrace& trace);
void writeTraceCsv(const std::filesystem::path& path, const ChainTrace& trace);

/// Inverse of writeTraceCsv (seed and sampler metadata are not stored in the CSV).
/// Throws ParseError naming the column difference for a bad header and the
/// last good row for a malformed or truncated body.
ChainTrace readTraceCsv(std::istream& in, const std::string& source = "<stream>");
ChainTrace readTraceCsv(const std::filesystem::path& path);

}  // namespace irmc
