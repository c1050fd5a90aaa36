#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "irmc/chain.hpp"
#include "irmc/errors.hpp"
#include "irmc/targets.hpp"

namespace irmc {

/// A series or sample with zero variance where the estimator needs some.
class DegenerateSeriesError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Diagnostic is undefined for the given input (e.g. every sample off the histogram box).
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normalized autocorrelation gamma(0..max_lag) with the biased (divide by N)
/// autocovariance, computed by FFT.
Eigen::VectorXd acf(const Eigen::VectorXd& series, std::size_t max_lag);

/// min(3000, floor(N / 10)), at least 1.
std::size_t defaultBartlettWindow(std::size_t n);

/// N / (1 + 2 sum_{k=1}^{M} (1 - k/M) gamma(k)), denominator floored at 1e-8.
double essBartlettFromAcf(const Eigen::VectorXd& acf, std::size_t n, std::size_t window);
double essBartlett(const Eigen::VectorXd& series, std::optional<std::size_t> window = std::nullopt);

enum class MbmVariant {
  Printed,   ///< K (|Lambda| / |Sigma|)^D
  Standard,  ///< N (|Sigma| / |b Lambda|)^(1/D), b = N / K
};

std::string toString(MbmVariant v);
MbmVariant parseMbmVariant(const std::string& name);

struct MbmOptions {
  std::size_t batches = 0;  ///< 0 selects floor(sqrt(N))
  MbmVariant variant = MbmVariant::Printed;
  bool allow_fallback = true;
  /// Dimensions above this use the per-coordinate median directly.
  std::size_t fallback_dim = 50;
};

struct MbmResult {
  double ess = 0.0;
  MbmVariant variant = MbmVariant::Printed;
  bool fallback = false;  ///< median of per-coordinate estimates was used
  std::size_t batches = 0;
};

/// Determinant-based estimate from a sample covariance `sigma` and the
/// covariance `lambda` of `batches` batch means of a length-n chain.
double essMbmFromCovariances(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& sigma,
                             std::size_t batches, std::size_t n, MbmVariant variant);

/// Multivariate batch-means ESS of an N x D sample matrix. Falls back to the
/// median over coordinates of the one-dimensional estimate when D exceeds
/// fallback_dim, Sigma is rank deficient, or the determinant form leaves the
/// positive finite range; without allow_fallback those cases throw.
MbmResult essMbm(const Eigen::MatrixXd& samples, const MbmOptions& options = {});

/// Target mass per bin by composite midpoint quadrature (`sub` points per bin
/// per dimension), renormalized over the box. Bins are flattened with the
/// first coordinate varying slowest.
Eigen::VectorXd binnedTargetMass(const TargetDensity& target, const Box& box,
                                 std::size_t bins_per_dim, std::size_t sub = 8);

struct SampleHistogram {
  Eigen::VectorXd mass;  ///< count / N per bin
  double outside = 0.0;  ///< fraction of samples off the box
};

SampleHistogram sampleHistogram(const Eigen::MatrixXd& samples, const Box& box,
                                std::size_t bins_per_dim);

/// 1/2 sum |p - q|.
double totalVariation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Histogram TV between samples and target on a 1D or 2D box. Samples off the
/// box count as mismatched mass.
double tvHistogram(const Eigen::MatrixXd& samples, const TargetDensity& target, const Box& box,
                   std::size_t bins_per_dim = 100);

struct EscapeTimes {
  std::vector<std::size_t> gaps;  ///< iterations between consecutive label changes
  std::size_t switches = 0;
  std::size_t length = 0;
  /// Fewer than two switches: no complete inter-switch gap was observed.
  bool insufficient = true;

  double mean() const;
};

using ModeClassifier = std::function<int(const Eigen::VectorXd&)>;

/// sign(z_0) with sign(0) = +1.
int signOfFirstCoordinate(const Eigen::VectorXd& z);

EscapeTimes escapeTimes(const std::vector<int>& labels);
EscapeTimes escapeTimes(const ChainTrace& trace, const ModeClassifier& classifier);

/// Total iterations over total switches across runs; +infinity without switches.
double pooledEscapeTime(const std::vector<EscapeTimes>& runs);

struct DiagnosticsOptions {
  std::optional<std::size_t> ess_window;
  MbmOptions mbm;
  std::size_t acf_lags = 50;
  /// TV is computed when a box is available (here or on the target) and dim <= 2.
  std::optional<Box> tv_box;
  bool tv = true;
  std::size_t tv_bins = 100;
  bool escape_sign_z0 = false;
};

struct DiagnosticsReport {
  std::size_t iterations = 0;
  std::size_t dim = 0;
  std::vector<Eigen::VectorXd> acf;
  Eigen::VectorXd ess_bw;
  double ess_bw_min = 0.0;
  std::size_t ess_window = 0;
  std::vector<std::size_t> degenerate_dims;
  MbmResult ess_mbm;
  MbmResult ess_mbm_alt;  ///< the other variant, for cross-checking
  std::optional<double> tv;
  std::size_t tv_bins = 0;
  std::optional<EscapeTimes> escape;
  double acceptance_rate = 0.0;
  double flip_rate = 0.0;
  double wall_time_seconds = 0.0;

  /// Flat JSON object; `config_json` (JSON object text) is embedded as "config".
  std::string toJson(const std::string& config_json = "{}") const;
};

/// TV uses `target` when given; escape times use sign(z_0) when enabled.
DiagnosticsReport diagnose(const ChainTrace& trace, const DiagnosticsOptions& options,
                           const TargetDensity* target = nullptr);

}  // namespace irmc
