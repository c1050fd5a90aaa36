#include "irmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fftw3.h>
#include <json.hpp>

namespace irmc {
namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& plannerMutex() {
  static std::mutex m;
  return m;
}

class RealFftPair {
 public:
  explicit RealFftPair(std::size_t n) : n_(n), real_(n), spec_(n / 2 + 1) {
    std::lock_guard lock(plannerMutex());
    auto* c = reinterpret_cast<fftw_complex*>(spec_.data());
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.data(), c, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, real_.data(), FFTW_ESTIMATE);
    if (!fwd_ || !inv_) throw std::runtime_error("FFTW plan creation failed");
  }
  ~RealFftPair() {
    std::lock_guard lock(plannerMutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  RealFftPair(const RealFftPair&) = delete;
  RealFftPair& operator=(const RealFftPair&) = delete;

  std::vector<double>& real() { return real_; }
  std::vector<std::complex<double>>& spectrum() { return spec_; }
  void forward() { fftw_execute(fwd_); }
  void inverse() { fftw_execute(inv_); }
  std::size_t size() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> real_;
  std::vector<std::complex<double>> spec_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

std::size_t nextPow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// log|A| for a symmetric matrix; -inf when not positive definite.
double logDetSpd(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return -kInf;
  const Eigen::VectorXd d = Eigen::MatrixXd(llt.matrixL()).diagonal();
  if (!(d.array() > 0.0).all()) return -kInf;
  return 2.0 * d.array().log().sum();
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - mean;
  return (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

bool rankDeficient(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().maxCoeff();
  const double lo = es.eigenvalues().minCoeff();
  return !(hi > 0.0) || lo <= 1e-12 * hi;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

Eigen::VectorXd acf(const Eigen::VectorXd& series, std::size_t max_lag) {
  const auto n = static_cast<std::size_t>(series.size());
  if (max_lag < 1) throw std::invalid_argument("acf: max lag must be at least 1");
  if (n <= max_lag) throw std::invalid_argument("acf: series length must exceed the max lag");
  const double mean = series.mean();
  const double var = (series.array() - mean).square().sum() / static_cast<double>(n);
  if (!(var > 0.0) || !std::isfinite(var)) throw DegenerateSeriesError("acf: series has zero variance");

  RealFftPair fft(nextPow2(2 * n));
  auto& r = fft.real();
  std::fill(r.begin(), r.end(), 0.0);
  for (std::size_t t = 0; t < n; ++t) r[t] = series[static_cast<Eigen::Index>(t)] - mean;
  fft.forward();
  for (auto& c : fft.spectrum()) c = std::norm(c);
  fft.inverse();
  Eigen::VectorXd out(static_cast<Eigen::Index>(max_lag + 1));
  const double g0 = r[0];
  for (std::size_t k = 0; k <= max_lag; ++k) out[static_cast<Eigen::Index>(k)] = r[k] / g0;
  out[0] = 1.0;
  return out;
}

std::size_t defaultBartlettWindow(std::size_t n) { return std::max<std::size_t>(1, std::min<std::size_t>(3000, n / 10)); }

double essBartlettFromAcf(const Eigen::VectorXd& rho, std::size_t n, std::size_t window) {
  if (window < 1) throw std::invalid_argument("essBartlett: window must be at least 1");
  if (static_cast<std::size_t>(rho.size()) <= window)
    throw std::invalid_argument("essBartlett: autocorrelation shorter than the window");
  const double m = static_cast<double>(window);
  double s = 0.0;
  for (std::size_t k = 1; k <= window; ++k)
    s += (1.0 - static_cast<double>(k) / m) * rho[static_cast<Eigen::Index>(k)];
  return static_cast<double>(n) / std::max(1.0 + 2.0 * s, 1e-8);
}

double essBartlett(const Eigen::VectorXd& series, std::optional<std::size_t> window) {
  const auto n = static_cast<std::size_t>(series.size());
  const std::size_t m = window.value_or(defaultBartlettWindow(n));
  if (n <= m) throw std::invalid_argument("essBartlett: series length must exceed the window");
  return essBartlettFromAcf(acf(series, m), n, m);
}

std::string toString(MbmVariant v) { return v == MbmVariant::Printed ? "printed" : "standard"; }

MbmVariant parseMbmVariant(const std::string& name) {
  if (name == "printed") return MbmVariant::Printed;
  if (name == "standard") return MbmVariant::Standard;
  throw std::invalid_argument("unknown batch-means variant '" + name + "' (expected printed or standard)");
}

double essMbmFromCovariances(const Eigen::MatrixXd& lambda, const Eigen::MatrixXd& sigma,
                             std::size_t batches, std::size_t n, MbmVariant variant) {
  if (lambda.rows() != sigma.rows() || lambda.cols() != sigma.cols() || sigma.rows() != sigma.cols() || sigma.rows() == 0)
    throw std::invalid_argument("essMbm: covariance shapes differ or are not square");
  if (batches < 2) throw std::invalid_argument("essMbm: need at least 2 batches");
  const double d = static_cast<double>(sigma.rows());
  const double ld_sigma = logDetSpd(sigma);
  if (!std::isfinite(ld_sigma)) throw NumericError("essMbm: sample covariance is singular");
  const double ld_lambda = logDetSpd(lambda);
  if (variant == MbmVariant::Printed)
    return static_cast<double>(batches) * std::exp(d * (ld_lambda - ld_sigma));
  const double b = static_cast<double>(n) / static_cast<double>(batches);
  return std::exp(std::log(static_cast<double>(n)) + (ld_sigma - (ld_lambda + d * std::log(b))) / d);
}

MbmResult essMbm(const Eigen::MatrixXd& samples, const MbmOptions& opt) {
  const auto n = static_cast<std::size_t>(samples.rows());
  const auto dim = static_cast<std::size_t>(samples.cols());
  if (dim == 0 || n < 4) throw std::invalid_argument("essMbm: need a non-empty sample matrix with at least 4 rows");
  const std::size_t k = opt.batches ? opt.batches : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  if (k < 2 || n < 2 * k) throw std::invalid_argument("essMbm: need K >= 2 batches and N >= 2K");
  const std::size_t b = n / k;

  Eigen::MatrixXd means(static_cast<Eigen::Index>(k), samples.cols());
  for (std::size_t j = 0; j < k; ++j)
    means.row(static_cast<Eigen::Index>(j)) =
        samples.middleRows(static_cast<Eigen::Index>(j * b), static_cast<Eigen::Index>(b)).colwise().mean();
  const Eigen::MatrixXd sigma = covariance(samples);
  const Eigen::MatrixXd lambda = covariance(means);

  MbmResult res;
  res.variant = opt.variant;
  res.batches = k;
  const bool singular = rankDeficient(sigma);
  if (!singular && dim <= opt.fallback_dim) {
    res.ess = essMbmFromCovariances(lambda, sigma, k, k * b, opt.variant);
    if (res.ess > 0.0 && std::isfinite(res.ess)) return res;
  }
  if (!opt.allow_fallback) {
    if (singular) throw NumericError("essMbm: sample covariance is singular and fallback is disabled");
    if (dim > opt.fallback_dim) throw NumericError("essMbm: dimension exceeds the determinant limit and fallback is disabled");
    throw NumericError("essMbm: determinant estimate is outside the positive finite range and fallback is disabled");
  }

  std::vector<double> per_dim;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const double s = sigma(j, j);
    const double l = lambda(j, j);
    if (!(s > 0.0) || !(l > 0.0)) continue;
    per_dim.push_back(opt.variant == MbmVariant::Printed
                          ? static_cast<double>(k) * l / s
                          : static_cast<double>(k * b) * s / (static_cast<double>(b) * l));
  }
  if (per_dim.empty()) throw DegenerateSeriesError("essMbm: every coordinate has zero variance");
  res.ess = median(std::move(per_dim));
  res.fallback = true;
  return res;
}

Eigen::VectorXd binnedTargetMass(const TargetDensity& target, const Box& box,
                                 std::size_t bins_per_dim, std::size_t sub) {
  const std::size_t d = box.size();
  if (d != target.dim()) throw std::invalid_argument("histogram box dimension does not match the target");
  if (d < 1 || d > 2) throw DiagnosticError("histogram TV is only defined for 1D and 2D targets");
  if (bins_per_dim < 1 || sub < 1) throw std::invalid_argument("bins and quadrature points must be positive");
  for (const auto& iv : box)
    if (!(iv.hi > iv.lo)) throw std::invalid_argument("histogram box intervals must have positive width");

  const std::size_t g = bins_per_dim * sub;  // quadrature points per dimension
  const std::size_t total = d == 1 ? g : g * g;
  std::vector<double> h(total);
  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  double hmin = kInf;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::size_t i0 = d == 1 ? idx : idx / g;
    z[0] = box[0].lo + (static_cast<double>(i0) + 0.5) * box[0].width() / static_cast<double>(g);
    if (d == 2) z[1] = box[1].lo + (static_cast<double>(idx % g) + 0.5) * box[1].width() / static_cast<double>(g);
    h[idx] = target.potential(z);
    if (h[idx] < hmin) hmin = h[idx];
  }
  if (!std::isfinite(hmin)) throw DiagnosticError("target has no finite density on the histogram box");

  const std::size_t nbins = d == 1 ? bins_per_dim : bins_per_dim * bins_per_dim;
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nbins));
  for (std::size_t idx = 0; idx < total; ++idx) {
    if (!std::isfinite(h[idx])) continue;
    const std::size_t i0 = (d == 1 ? idx : idx / g) / sub;
    const std::size_t bin = d == 1 ? i0 : i0 * bins_per_dim + (idx % g) / sub;
    mass[static_cast<Eigen::Index>(bin)] += std::exp(hmin - h[idx]);
  }
  return mass / mass.sum();
}

SampleHistogram sampleHistogram(const Eigen::MatrixXd& samples, const Box& box, std::size_t bins_per_dim) {
  const std::size_t d = box.size();
  if (static_cast<std::size_t>(samples.cols()) != d) throw std::invalid_argument("samples and box dimension differ");
  if (d < 1 || d > 2) throw DiagnosticError("histogram TV is only defined for 1D and 2D samples");
  if (samples.rows() == 0) throw DiagnosticError("histogram of an empty sample");
  const std::size_t nbins = d == 1 ? bins_per_dim : bins_per_dim * bins_per_dim;
  SampleHistogram out;
  out.mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nbins));
  std::size_t off = 0;
  auto binOf = [&](std::size_t dim, double x) {
    const auto& iv = box[dim];
    auto i = static_cast<std::size_t>((x - iv.lo) / iv.width() * static_cast<double>(bins_per_dim));
    return std::min(i, bins_per_dim - 1);
  };
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    bool inside = true;
    for (std::size_t j = 0; j < d; ++j) inside = inside && box[j].contains(samples(r, static_cast<Eigen::Index>(j)));
    if (!inside) {
      ++off;
      continue;
    }
    std::size_t bin = binOf(0, samples(r, 0));
    if (d == 2) bin = bin * bins_per_dim + binOf(1, samples(r, 1));
    out.mass[static_cast<Eigen::Index>(bin)] += 1.0;
  }
  const double n = static_cast<double>(samples.rows());
  out.mass /= n;
  out.outside = static_cast<double>(off) / n;
  return out;
}

double totalVariation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("totalVariation: length mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

double tvHistogram(const Eigen::MatrixXd& samples, const TargetDensity& target, const Box& box,
                   std::size_t bins_per_dim) {
  const SampleHistogram hist = sampleHistogram(samples, box, bins_per_dim);
  if (hist.outside == 1.0) throw DiagnosticError("every sample lies outside the histogram box");
  const Eigen::VectorXd pi = binnedTargetMass(target, box, bins_per_dim);
  return std::min(1.0, totalVariation(hist.mass, pi) + 0.5 * hist.outside);
}

double EscapeTimes::mean() const {
  if (gaps.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (auto g : gaps) s += static_cast<double>(g);
  return s / static_cast<double>(gaps.size());
}

int signOfFirstCoordinate(const Eigen::VectorXd& z) { return z[0] >= 0.0 ? 1 : -1; }

EscapeTimes escapeTimes(const std::vector<int>& labels) {
  EscapeTimes out;
  out.length = labels.size();
  std::size_t last = 0;
  for (std::size_t t = 1; t < labels.size(); ++t) {
    if (labels[t] == labels[t - 1]) continue;
    if (out.switches > 0) out.gaps.push_back(t - last);
    last = t;
    ++out.switches;
  }
  out.insufficient = out.switches < 2;
  return out;
}

EscapeTimes escapeTimes(const ChainTrace& trace, const ModeClassifier& classifier) {
  std::vector<int> labels(trace.size());
  for (std::size_t t = 0; t < labels.size(); ++t)
    labels[t] = classifier(trace.states.row(static_cast<Eigen::Index>(t)).transpose());
  return escapeTimes(labels);
}

double pooledEscapeTime(const std::vector<EscapeTimes>& runs) {
  std::size_t len = 0;
  std::size_t sw = 0;
  for (const auto& r : runs) {
    len += r.length;
    sw += r.switches;
  }
  return sw ? static_cast<double>(len) / static_cast<double>(sw) : kInf;
}

DiagnosticsReport diagnose(const ChainTrace& trace, const DiagnosticsOptions& opt, const TargetDensity* target) {
  DiagnosticsReport rep;
  rep.iterations = trace.size();
  rep.dim = trace.dim();
  rep.acceptance_rate = trace.acceptanceRate();
  rep.flip_rate = trace.flipRate();
  rep.wall_time_seconds = trace.wall_time_seconds;
  if (rep.iterations < 20) throw DiagnosticError("trace too short for diagnostics (need at least 20 rows)");

  rep.ess_window = opt.ess_window.value_or(defaultBartlettWindow(rep.iterations));
  const std::size_t lags = std::max(rep.ess_window, opt.acf_lags);
  if (lags >= rep.iterations) throw std::invalid_argument("ESS window must be shorter than the trace");
  rep.ess_bw.resize(static_cast<Eigen::Index>(rep.dim));
  rep.ess_bw_min = kInf;
  for (std::size_t j = 0; j < rep.dim; ++j) {
    const Eigen::VectorXd col = trace.states.col(static_cast<Eigen::Index>(j));
    double e = 0.0;
    Eigen::VectorXd rho;
    try {
      rho = acf(col, lags);
      e = essBartlettFromAcf(rho, rep.iterations, rep.ess_window);
    } catch (const DegenerateSeriesError&) {
      rep.degenerate_dims.push_back(j);
      rho = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(opt.acf_lags + 1), std::numeric_limits<double>::quiet_NaN());
    }
    rep.ess_bw[static_cast<Eigen::Index>(j)] = e;
    rep.ess_bw_min = std::min(rep.ess_bw_min, e);
    rep.acf.push_back(rho.head(static_cast<Eigen::Index>(opt.acf_lags + 1)));
  }

  MbmOptions alt = opt.mbm;
  alt.variant = opt.mbm.variant == MbmVariant::Printed ? MbmVariant::Standard : MbmVariant::Printed;
  try {
    rep.ess_mbm = essMbm(trace.states, opt.mbm);
    rep.ess_mbm_alt = essMbm(trace.states, alt);
  } catch (const DegenerateSeriesError&) {
    rep.ess_mbm = rep.ess_mbm_alt = MbmResult{};
  }

  if (opt.tv && target && rep.dim <= 2) {
    const std::optional<Box> box = opt.tv_box ? opt.tv_box : target->supportBox();
    if (box) {
      rep.tv = tvHistogram(trace.states, *target, *box, opt.tv_bins);
      rep.tv_bins = opt.tv_bins;
    }
  }
  if (opt.escape_sign_z0) rep.escape = escapeTimes(trace, signOfFirstCoordinate);
  return rep;
}

std::string DiagnosticsReport::toJson(const std::string& config_json) const {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["iterations"] = iterations;
  j["dim"] = dim;
  j["acceptance_rate"] = acceptance_rate;
  j["flip_rate"] = flip_rate;
  j["ess_bw_min"] = num(ess_bw_min);
  j["ess_bw_per_dim"] = json::array();
  for (Eigen::Index i = 0; i < ess_bw.size(); ++i) j["ess_bw_per_dim"].push_back(num(ess_bw[i]));
  j["ess_window"] = ess_window;
  j["degenerate_dims"] = degenerate_dims;
  j["ess_mbm"] = num(ess_mbm.ess);
  j["ess_mbm_variant"] = toString(ess_mbm.variant);
  j["ess_mbm_fallback"] = ess_mbm.fallback;
  j["ess_mbm_batches"] = ess_mbm.batches;
  j["ess_mbm_alt"] = num(ess_mbm_alt.ess);
  j["ess_mbm_alt_variant"] = toString(ess_mbm_alt.variant);
  j["ess_mbm_alt_fallback"] = ess_mbm_alt.fallback;
  j["tv"] = tv ? json(*tv) : json(nullptr);
  j["tv_bins_per_dim"] = tv ? json(tv_bins) : json(nullptr);
  if (escape) {
    j["mean_escape_time"] = num(escape->mean());
    j["escape_switches"] = escape->switches;
    j["escape_gap_count"] = escape->gaps.size();
    j["escape_insufficient"] = escape->insufficient;
  } else {
    j["mean_escape_time"] = nullptr;
  }
  j["acf"] = json::array();
  for (const auto& a : acf) {
    json row = json::array();
    for (Eigen::Index k = 0; k < a.size(); ++k) row.push_back(num(a[k]));
    j["acf"].push_back(std::move(row));
  }
  j["wall_time_seconds"] = wall_time_seconds;
  j["config"] = json::parse(config_json);
  return j.dump(2);
}

}  // namespace irmc
