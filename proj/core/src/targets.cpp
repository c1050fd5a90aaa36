#include "irmc/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "irmc/errors.hpp"

namespace irmc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + exp(u)) without overflow.
double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

TargetDensity::TargetDensity(std::string name, std::size_t dim, Potential potential,
                             Gradient gradient, std::optional<Box> support_box,
                             Eigen::VectorXd initial_point)
    : name_(std::move(name)),
      dim_(dim),
      potential_(std::move(potential)),
      gradient_(std::move(gradient)),
      box_(std::move(support_box)),
      init_(std::move(initial_point)) {
  if (dim_ == 0) throw std::invalid_argument("target dimension must be positive");
  if (!potential_ || !gradient_) throw std::invalid_argument("target needs potential and gradient");
  if (box_ && box_->size() != dim_) throw std::invalid_argument("support box dimension mismatch");
  if (init_.size() == 0) init_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  if (static_cast<std::size_t>(init_.size()) != dim_)
    throw std::invalid_argument("initial point dimension mismatch");
}

void TargetDensity::checkDim(const Eigen::VectorXd& z) const {
  if (static_cast<std::size_t>(z.size()) != dim_)
    throw std::invalid_argument("target '" + name_ + "' expects dimension " +
                                std::to_string(dim_) + ", got " + std::to_string(z.size()));
}

double TargetDensity::potential(const Eigen::VectorXd& z) const {
  checkDim(z);
  return potential_(z);
}

Eigen::VectorXd TargetDensity::gradient(const Eigen::VectorXd& z) const {
  checkDim(z);
  return gradient_(z);
}

bool TargetDensity::inSupport(const Eigen::VectorXd& z) const { return std::isfinite(potential(z)); }

TargetDensity stdNormalTarget(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("stdNormalTarget: dim must be >= 1");
  return TargetDensity(
      "std-normal", dim, [](const Eigen::VectorXd& z) { return 0.5 * z.squaredNorm(); },
      [](const Eigen::VectorXd& z) -> Eigen::VectorXd { return z; },
      Box(dim, Interval{-5.0, 5.0}));
}

TargetDensity logNormalTarget() {
  auto potential = [](const Eigen::VectorXd& z) {
    const double x = z[0];
    if (!(x > 0.0)) return kInf;
    const double l = std::log(x);
    return l + 0.5 * l * l;
  };
  auto gradient = [](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const double x = z[0];
    Eigen::VectorXd g(1);
    g[0] = x > 0.0 ? (1.0 + std::log(x)) / x : std::numeric_limits<double>::quiet_NaN();
    return g;
  };
  return TargetDensity("log-normal", 1, potential, gradient, Box{Interval{0.0, 5.0}},
                       Eigen::VectorXd::Ones(1));
}

TargetDensity bimodalTarget(double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("bimodalTarget: tau must be positive");
  auto potential = [tau](const Eigen::VectorXd& z) {
    const double a = z[0] * z[0] - tau;
    return 2.0 * a * a - 0.2 * z[0] - 5.0 * z[0] * z[0] + 5.0 * z[1] * z[1];
  };
  auto gradient = [tau](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    Eigen::VectorXd g(2);
    g[0] = 8.0 * z[0] * (z[0] * z[0] - tau) - 0.2 - 10.0 * z[0];
    g[1] = 10.0 * z[1];
    return g;
  };
  const Eigen::VectorXd init = Eigen::Vector2d(-std::sqrt(tau + 1.25), 0.0);
  return TargetDensity("bimodal", 2, potential, gradient,
                       Box{Interval{-3.0, 3.0}, Interval{-1.5, 1.5}}, init);
}

TargetDensity moonTarget() {
  auto potential = [](const Eigen::VectorXd& z) {
    const double r = 4.0 * (z[1] + 1.2) - z[0] * z[0];
    return std::pow(z[0], 4) / 10.0 + 0.5 * r * r;
  };
  auto gradient = [](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const double r = 4.0 * (z[1] + 1.2) - z[0] * z[0];
    Eigen::VectorXd g(2);
    g[0] = 0.4 * std::pow(z[0], 3) - 2.0 * z[0] * r;
    g[1] = 4.0 * r;
    return g;
  };
  const Eigen::VectorXd init = Eigen::Vector2d(0.0, -1.2);
  return TargetDensity("moon", 2, potential, gradient,
                       Box{Interval{-2.5, 2.5}, Interval{-1.5, 0.5}}, init);
}

namespace {

struct Mixture {
  Eigen::MatrixXd means;  // dim x K
  Eigen::VectorXd log_coef;  // log w_k - (d/2) log(2 pi s_k^2)
  Eigen::VectorXd inv_var;

  // Per-component log densities at z.
  Eigen::VectorXd logTerms(const Eigen::VectorXd& z) const {
    const Eigen::Index k = means.cols();
    Eigen::VectorXd t(k);
    for (Eigen::Index j = 0; j < k; ++j)
      t[j] = log_coef[j] - 0.5 * inv_var[j] * (z - means.col(j)).squaredNorm();
    return t;
  }
};

double logSumExp(const Eigen::VectorXd& t) {
  const double m = t.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((t.array() - m).exp().sum());
}

}  // namespace

TargetDensity gaussianMixtureTarget(std::vector<MixtureComponent> components) {
  if (components.empty()) throw std::invalid_argument("gaussianMixtureTarget: no components");
  const Eigen::Index dim = components.front().mean.size();
  if (dim == 0) throw std::invalid_argument("gaussianMixtureTarget: empty mean");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.mean.size() != dim) throw std::invalid_argument("gaussianMixtureTarget: mixed dimensions");
    if (!(c.scale > 0.0)) throw std::invalid_argument("gaussianMixtureTarget: scales must be > 0");
    if (!(c.weight > 0.0)) throw std::invalid_argument("gaussianMixtureTarget: weights must be > 0");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("gaussianMixtureTarget: weights must sum to 1");

  auto mix = std::make_shared<Mixture>();
  const auto k = static_cast<Eigen::Index>(components.size());
  mix->means.resize(dim, k);
  mix->log_coef.resize(k);
  mix->inv_var.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& c = components[static_cast<std::size_t>(j)];
    const double var = c.scale * c.scale;
    mix->means.col(j) = c.mean;
    mix->inv_var[j] = 1.0 / var;
    mix->log_coef[j] =
        std::log(c.weight) - 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * var);
  }

  auto potential = [mix](const Eigen::VectorXd& z) { return -logSumExp(mix->logTerms(z)); };
  auto gradient = [mix](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const Eigen::VectorXd t = mix->logTerms(z);
    const Eigen::VectorXd resp = (t.array() - logSumExp(t)).exp();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
    for (Eigen::Index j = 0; j < t.size(); ++j)
      g += resp[j] * mix->inv_var[j] * (z - mix->means.col(j));
    return g;
  };

  // Start at the heaviest mode.
  std::size_t heaviest = 0;
  for (std::size_t j = 1; j < components.size(); ++j)
    if (components[j].weight > components[heaviest].weight) heaviest = j;

  std::optional<Box> box;
  if (dim == 2) box = Box{Interval{-7.0, 7.0}, Interval{-7.0, 7.0}};
  return TargetDensity("mixture", static_cast<std::size_t>(dim), potential, gradient, box,
                       components[heaviest].mean);
}

std::vector<MixtureComponent> multimodalPreset(bool concentrated) {
  struct Mode {
    double x, y;
    int tier;  // 0 heavy, 1 medium, 2 light
  };
  static constexpr Mode kModes[] = {
      {-5.4, -5.1, 2}, {-2.7, -4.6, 1}, {0.3, -5.5, 2},  {3.1, -4.9, 0},  {5.6, -5.3, 1},
      {-5.7, -1.6, 1}, {-2.9, -2.1, 0}, {0.2, -1.4, 2},  {2.6, -1.9, 1},  {5.4, -2.2, 2},
      {-5.2, 1.9, 2},  {-2.4, 1.3, 1},  {0.4, 2.1, 0},   {3.2, 1.6, 2},   {5.7, 1.2, 1},
      {-5.5, 5.2, 1},  {-2.6, 4.8, 2},  {0.1, 5.6, 1},   {2.8, 5.1, 2},   {5.3, 4.6, 0},
  };
  static constexpr double kWeight[] = {0.10, 0.05, 0.025};
  static constexpr double kScale[] = {0.30, 0.50, 0.80};
  static constexpr double kScaleConcentrated[] = {0.10, 0.15, 0.25};

  std::vector<MixtureComponent> out;
  for (const auto& m : kModes) {
    MixtureComponent c;
    c.mean = Eigen::Vector2d(m.x, m.y);
    c.weight = kWeight[m.tier];
    c.scale = concentrated ? kScaleConcentrated[m.tier] : kScale[m.tier];
    out.push_back(std::move(c));
  }
  return out;
}

TargetDensity uniformBoxTarget(Box box) {
  if (box.empty()) throw std::invalid_argument("uniformBoxTarget: empty box");
  const std::size_t dim = box.size();
  Eigen::VectorXd centre(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) centre[static_cast<Eigen::Index>(i)] = 0.5 * (box[i].lo + box[i].hi);
  auto potential = [box](const Eigen::VectorXd& z) {
    for (std::size_t i = 0; i < box.size(); ++i)
      if (!box[i].contains(z[static_cast<Eigen::Index>(i)])) return kInf;
    return 0.0;
  };
  auto gradient = [](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return Eigen::VectorXd::Zero(z.size());
  };
  return TargetDensity("uniform-box", dim, potential, gradient, box, centre);
}

TargetDensity logisticRegressionTarget(const LabeledDataset& data, double alpha) {
  validate(data);
  if (!(alpha > 0.0)) throw std::invalid_argument("logisticRegressionTarget: alpha must be > 0");
  auto shared = std::make_shared<const LabeledDataset>(data);
  const double inv_alpha = std::isinf(alpha) ? 0.0 : 1.0 / alpha;

  auto potential = [shared, inv_alpha](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd u = shared->design * beta;
    double h = 0.0;
    // -[y log s(u) + (1 - y) log(1 - s(u))] = softplus(u) - y u
    for (Eigen::Index i = 0; i < u.size(); ++i) h += softplus(u[i]) - shared->labels[i] * u[i];
    return h + 0.5 * inv_alpha * beta.squaredNorm();
  };
  auto gradient = [shared, inv_alpha](const Eigen::VectorXd& beta) -> Eigen::VectorXd {
    const Eigen::VectorXd u = shared->design * beta;
    Eigen::VectorXd resid(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) resid[i] = shared->labels[i] - sigmoid(u[i]);
    return -(shared->design.transpose() * resid) + inv_alpha * beta;
  };
  return TargetDensity("logistic", static_cast<std::size_t>(data.cols()), potential, gradient);
}

}  // namespace irmc
