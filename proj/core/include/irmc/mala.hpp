#pragma once

#include <Eigen/Core>

#include "irmc/dynamics.hpp"
#include "irmc/jump.hpp"
#include "irmc/rng.hpp"
#include "irmc/targets.hpp"

namespace irmc {

/// A point with its potential and gradient, so chains evaluate each state once.
struct EvaluatedPoint {
  Eigen::VectorXd z;
  double potential = 0.0;
  Eigen::VectorXd gradient;
};

/// Evaluates H and, when H is finite, grad H.
EvaluatedPoint evaluate(const TargetDensity& target, Eigen::VectorXd z);

/// One Euler-Maruyama step viewed as a Gaussian transition density
///   P(z | y) = N(z; mu(y), 2 eps D(y)),
/// mu(y) = y + eps [-(D(y) + Q(y)) grad H(y) + Gamma(y)] for the forward
/// direction and the same with -Q, Gamma-tilde for the adjoint.
class OneStepKernel {
 public:
  OneStepKernel(DynamicsSpec dyn, double eps, Direction dir);

  Direction direction() const { return dir_; }
  double epsilon() const { return eps_; }

  Eigen::VectorXd mean(const EvaluatedPoint& y) const;
  double logDensity(const Eigen::VectorXd& z, const EvaluatedPoint& y) const;
  Eigen::VectorXd sample(const EvaluatedPoint& y, Rng& rng) const;

 private:
  struct Factor {
    Eigen::MatrixXd lower;
    double log_det_half = 0.0;  // sum log L_ii
  };
  Factor factorAt(const Eigen::VectorXd& y) const;

  DynamicsSpec dyn_;
  double eps_;
  Direction dir_;
  Factor cached_;  // used when D is constant
};

struct GradientStepResult {
  EvaluatedPoint point;
  double alpha = 0.0;
  bool accepted = false;
};

struct LiftedGradientStepResult {
  EvaluatedPoint point;
  double zp = 1.0;
  double alpha = 0.0;
  bool accepted = false;
  bool flipped = false;
};

/// MALA with the kernel pair built once; `forward` must come from a Q = 0 spec.
GradientStepResult malaStep(const EvaluatedPoint& y, const TargetDensity& target,
                            const OneStepKernel& forward, Rng& rng);
/// Throws std::invalid_argument when dyn carries a skew part.
GradientStepResult malaStep(const Eigen::VectorXd& y, const TargetDensity& target,
                            const DynamicsSpec& dyn, double eps, Rng& rng);

/// Acceptance probability of the I-MALA move y -> z for direction zp.
double imalaAlpha(const EvaluatedPoint& y, const EvaluatedPoint& z, double zp,
                  const OneStepKernel& forward, const OneStepKernel& adjoint);

/// zp > 0 proposes with the forward kernel, zp < 0 with the adjoint one;
/// rejection negates zp.
LiftedGradientStepResult imalaStep(const EvaluatedPoint& y, double zp, const TargetDensity& target,
                                   const OneStepKernel& forward, const OneStepKernel& adjoint,
                                   Rng& rng);
LiftedGradientStepResult imalaStep(const Eigen::VectorXd& y, double zp,
                                   const TargetDensity& target, const DynamicsSpec& dyn,
                                   double eps, Rng& rng);

/// Plain MH acceptance using the forward kernel in both directions:
/// min(1, pi(z) P(y | z) / (pi(y) P(z | y))).
double naiveMhAlphaWithForwardKernel(const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                                     const TargetDensity& target, const DynamicsSpec& dyn,
                                     double eps);
double naiveMhAlphaWithForwardKernel(const EvaluatedPoint& y, const EvaluatedPoint& z,
                                     const OneStepKernel& forward);

/// HMC with mass matrix M = mass_inverse^{-1}, `steps` leapfrog steps of size eps.
class HamiltonianKernel {
 public:
  HamiltonianKernel(Eigen::MatrixXd mass_inverse, double eps, int steps);

  GradientStepResult step(const EvaluatedPoint& theta, const TargetDensity& target, Rng& rng) const;

 private:
  Eigen::MatrixXd mass_inverse_;
  Eigen::MatrixXd mass_lower_;  // Cholesky factor of M for momentum draws
  double eps_;
  int steps_;
};

GradientStepResult hmcStep(const Eigen::VectorXd& theta, const TargetDensity& target,
                           const Eigen::MatrixXd& mass_inverse, double eps, int steps, Rng& rng);

}  // namespace irmc
