#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "irmc/dataset.hpp"

namespace irmc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x < hi; }
};

using Box = std::vector<Interval>;

/// Target distribution pi(z) given by its potential H(z) = -log pi(z) + const.
///
/// Potentials return +infinity outside the support; samplers treat such
/// proposals as rejected. Instances are immutable and safe to share across
/// threads.
class TargetDensity {
 public:
  using Potential = std::function<double(const Eigen::VectorXd&)>;
  using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  TargetDensity(std::string name, std::size_t dim, Potential potential, Gradient gradient,
                std::optional<Box> support_box = std::nullopt,
                Eigen::VectorXd initial_point = {});

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }

  double potential(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
  bool inSupport(const Eigen::VectorXd& z) const;

  /// Region used for histogram diagnostics, when the target has a natural one.
  const std::optional<Box>& supportBox() const { return box_; }
  /// A point with finite potential, used as the default chain start.
  const Eigen::VectorXd& initialPoint() const { return init_; }

 private:
  void checkDim(const Eigen::VectorXd& z) const;

  std::string name_;
  std::size_t dim_;
  Potential potential_;
  Gradient gradient_;
  std::optional<Box> box_;
  Eigen::VectorXd init_;
};

/// H(z) = |z|^2 / 2.
TargetDensity stdNormalTarget(std::size_t dim);

/// Standard log-normal (mu = 0, sigma = 1) on z > 0.
TargetDensity logNormalTarget();

/// H = 2 (z1^2 - tau)^2 - 0.2 z1 - 5 z1^2 + 5 z2^2. Modes near z1 = +-sqrt(tau + 1.25).
TargetDensity bimodalTarget(double tau);

/// H = z1^4 / 10 + (4 (z2 + 1.2) - z1^2)^2 / 2.
TargetDensity moonTarget();

struct MixtureComponent {
  Eigen::VectorXd mean;
  double weight = 1.0;
  double scale = 1.0;  ///< isotropic standard deviation
};

/// H(z) = -log sum_k w_k N(z; m_k, s_k^2 I), normalizing constants included.
TargetDensity gaussianMixtureTarget(std::vector<MixtureComponent> components);

/// 20 unevenly weighted modes on a 14 x 14 region; heavier modes are narrower.
/// `concentrated` shrinks every mode radius for the well-separated variant.
std::vector<MixtureComponent> multimodalPreset(bool concentrated);

/// Flat potential on a box, +infinity outside.
TargetDensity uniformBoxTarget(Box box);

/// Bayesian logistic regression posterior with a N(0, alpha I) prior.
/// alpha = +infinity disables the prior.
TargetDensity logisticRegressionTarget(const LabeledDataset& data, double alpha = 100.0);

}  // namespace irmc
