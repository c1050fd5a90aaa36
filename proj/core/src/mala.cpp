#include "irmc/mala.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "irmc/errors.hpp"

namespace irmc {
namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

double alphaFromLog(double log_alpha) {
  if (std::isnan(log_alpha)) throw NumericError("acceptance ratio is NaN");
  return log_alpha >= 0.0 ? 1.0 : std::exp(log_alpha);
}

bool skewIsZeroAt(const DynamicsSpec& dyn, const Eigen::VectorXd& y) {
  if (dyn.isConstant()) return !dyn.hasSkew();
  return (dyn.skew(y).array() == 0.0).all();
}

}  // namespace

EvaluatedPoint evaluate(const TargetDensity& target, Eigen::VectorXd z) {
  EvaluatedPoint p;
  p.potential = target.potential(z);
  if (std::isnan(p.potential)) throw NumericError("potential evaluated to NaN");
  if (std::isfinite(p.potential)) {
    p.gradient = target.gradient(z);
    if (!p.gradient.allFinite()) throw NumericError("gradient is not finite where the potential is");
  }
  p.z = std::move(z);
  return p;
}

OneStepKernel::OneStepKernel(DynamicsSpec dyn, double eps, Direction dir)
    : dyn_(std::move(dyn)), eps_(StepSchedule(eps).epsilon), dir_(dir) {
  if (dyn_.isConstant()) cached_ = factorAt(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dyn_.dim())));
}

OneStepKernel::Factor OneStepKernel::factorAt(const Eigen::VectorXd& y) const {
  Factor f;
  f.lower = noiseFactor(dyn_.diffusion(y), eps_);
  const Eigen::VectorXd diag = f.lower.diagonal();
  if (!(diag.array() > 0.0).all()) throw NumericError("proposal covariance 2 eps D is singular");
  f.log_det_half = diag.array().log().sum();
  return f;
}

Eigen::VectorXd OneStepKernel::mean(const EvaluatedPoint& y) const {
  return y.z + eps_ * dyn_.drift(y.z, y.gradient, dir_);
}

double OneStepKernel::logDensity(const Eigen::VectorXd& z, const EvaluatedPoint& y) const {
  const Factor local = dyn_.isConstant() ? Factor{} : factorAt(y.z);
  const Factor& f = dyn_.isConstant() ? cached_ : local;
  const Eigen::VectorXd r = f.lower.triangularView<Eigen::Lower>().solve(z - mean(y));
  return -0.5 * r.squaredNorm() - f.log_det_half - 0.5 * static_cast<double>(z.size()) * kLogTwoPi;
}

Eigen::VectorXd OneStepKernel::sample(const EvaluatedPoint& y, Rng& rng) const {
  const Eigen::VectorXd xi = rng.normalVector(y.z.size());
  if (dyn_.isConstant()) return mean(y) + cached_.lower * xi;
  return mean(y) + factorAt(y.z).lower * xi;
}

GradientStepResult malaStep(const EvaluatedPoint& y, const TargetDensity& target,
                            const OneStepKernel& forward, Rng& rng) {
  EvaluatedPoint star = evaluate(target, forward.sample(y, rng));
  double alpha = 0.0;
  if (std::isfinite(star.potential)) {
    const double fwd = forward.logDensity(star.z, y);
    const double rev = forward.logDensity(y.z, star);
    alpha = alphaFromLog(y.potential - star.potential + rev - fwd);
  }
  const double u = rng.uniform();
  GradientStepResult out;
  out.alpha = alpha;
  out.accepted = u < alpha;
  out.point = out.accepted ? std::move(star) : y;
  return out;
}

GradientStepResult malaStep(const Eigen::VectorXd& y, const TargetDensity& target,
                            const DynamicsSpec& dyn, double eps, Rng& rng) {
  if (!skewIsZeroAt(dyn, y)) throw std::invalid_argument("dynamics has a skew part; use imalaStep");
  const EvaluatedPoint start = evaluate(target, y);
  if (!std::isfinite(start.potential)) throw std::invalid_argument("malaStep needs a finite potential at y");
  return malaStep(start, target, OneStepKernel(dyn, eps, Direction::Forward), rng);
}

double imalaAlpha(const EvaluatedPoint& y, const EvaluatedPoint& z, double zp,
                  const OneStepKernel& forward, const OneStepKernel& adjoint) {
  if (!std::isfinite(z.potential)) return 0.0;
  const OneStepKernel& propose = zp > 0.0 ? forward : adjoint;
  const OneStepKernel& reverse = zp > 0.0 ? adjoint : forward;
  const double fwd = propose.logDensity(z.z, y);
  const double rev = reverse.logDensity(y.z, z);
  return alphaFromLog(y.potential - z.potential + rev - fwd);
}

LiftedGradientStepResult imalaStep(const EvaluatedPoint& y, double zp, const TargetDensity& target,
                                   const OneStepKernel& forward, const OneStepKernel& adjoint,
                                   Rng& rng) {
  const OneStepKernel& propose = zp > 0.0 ? forward : adjoint;
  EvaluatedPoint star = evaluate(target, propose.sample(y, rng));
  const double alpha = imalaAlpha(y, star, zp, forward, adjoint);
  const double u = rng.uniform();
  LiftedGradientStepResult out;
  out.alpha = alpha;
  out.accepted = u < alpha;
  out.flipped = !out.accepted;
  out.zp = out.accepted ? zp : -zp;
  out.point = out.accepted ? std::move(star) : y;
  return out;
}

LiftedGradientStepResult imalaStep(const Eigen::VectorXd& y, double zp,
                                   const TargetDensity& target, const DynamicsSpec& dyn,
                                   double eps, Rng& rng) {
  if (zp != 1.0 && zp != -1.0) throw std::invalid_argument("imalaStep direction must be +1 or -1");
  const EvaluatedPoint start = evaluate(target, y);
  if (!std::isfinite(start.potential)) throw std::invalid_argument("imalaStep needs a finite potential at y");
  return imalaStep(start, zp, target, OneStepKernel(dyn, eps, Direction::Forward),
                   OneStepKernel(dyn, eps, Direction::Adjoint), rng);
}

double naiveMhAlphaWithForwardKernel(const EvaluatedPoint& y, const EvaluatedPoint& z,
                                     const OneStepKernel& forward) {
  if (!std::isfinite(z.potential)) return 0.0;
  const double fwd = forward.logDensity(z.z, y);
  const double rev = forward.logDensity(y.z, z);
  return alphaFromLog(y.potential - z.potential + rev - fwd);
}

double naiveMhAlphaWithForwardKernel(const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                                     const TargetDensity& target, const DynamicsSpec& dyn,
                                     double eps) {
  const EvaluatedPoint py = evaluate(target, y);
  if (!std::isfinite(py.potential)) throw std::invalid_argument("potential at y must be finite");
  return naiveMhAlphaWithForwardKernel(py, evaluate(target, z),
                                       OneStepKernel(dyn, eps, Direction::Forward));
}

HamiltonianKernel::HamiltonianKernel(Eigen::MatrixXd mass_inverse, double eps, int steps)
    : mass_inverse_(std::move(mass_inverse)), eps_(StepSchedule(eps).epsilon), steps_(steps) {
  if (steps_ < 1) throw std::invalid_argument("leapfrog step count must be at least 1");
  if (mass_inverse_.rows() != mass_inverse_.cols() || mass_inverse_.rows() == 0)
    throw std::invalid_argument("inverse mass matrix must be square and non-empty");
  Eigen::LLT<Eigen::MatrixXd> inv_llt(mass_inverse_);
  if (inv_llt.info() != Eigen::Success) throw ValidationError("inverse mass matrix is not positive definite");
  const Eigen::MatrixXd mass = inv_llt.solve(Eigen::MatrixXd::Identity(mass_inverse_.rows(), mass_inverse_.cols()));
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (mass + mass.transpose()));
  if (llt.info() != Eigen::Success) throw ValidationError("mass matrix is not positive definite");
  mass_lower_ = llt.matrixL();
}

GradientStepResult HamiltonianKernel::step(const EvaluatedPoint& theta, const TargetDensity& target,
                                           Rng& rng) const {
  const Eigen::VectorXd r0 = mass_lower_ * rng.normalVector(theta.z.size());
  const double k0 = 0.5 * r0.dot(mass_inverse_ * r0);

  Eigen::VectorXd pos = theta.z;
  Eigen::VectorXd mom = r0;
  Eigen::VectorXd grad = theta.gradient;
  bool finite = true;
  for (int s = 0; s < steps_ && finite; ++s) {
    mom -= 0.5 * eps_ * grad;
    pos += eps_ * (mass_inverse_ * mom);
    grad = target.gradient(pos);
    finite = grad.allFinite();
    mom -= 0.5 * eps_ * grad;
  }

  GradientStepResult out;
  if (finite) {
    const double h1 = target.potential(pos);
    const double k1 = 0.5 * mom.dot(mass_inverse_ * mom);
    const double log_alpha = theta.potential + k0 - h1 - k1;
    if (std::isfinite(h1) && !std::isnan(log_alpha)) out.alpha = log_alpha >= 0.0 ? 1.0 : std::exp(log_alpha);
    const double u = rng.uniform();
    out.accepted = u < out.alpha;
    if (out.accepted) {
      out.point.z = std::move(pos);
      out.point.potential = h1;
      out.point.gradient = std::move(grad);
      return out;
    }
  } else {
    rng.uniform();  // keep the stream aligned with finite trajectories
  }
  out.point = theta;
  return out;
}

GradientStepResult hmcStep(const Eigen::VectorXd& theta, const TargetDensity& target,
                           const Eigen::MatrixXd& mass_inverse, double eps, int steps, Rng& rng) {
  const EvaluatedPoint start = evaluate(target, theta);
  if (!std::isfinite(start.potential)) throw std::invalid_argument("hmcStep needs a finite potential at theta");
  return HamiltonianKernel(mass_inverse, eps, steps).step(start, target, rng);
}

}  // namespace irmc
