#include "irmc/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "irmc/errors.hpp"

namespace irmc {
namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

void checkSquare(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + " must be square");
}

// Central-difference row divergence of M(z): sum_j d M_ij / d z_j.
Eigen::VectorXd fdDivergence(const MatrixField& m, const Eigen::VectorXd& z, double sign) {
  const Eigen::Index d = z.size();
  Eigen::VectorXd div = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd zp = z;
  Eigen::VectorXd zm = z;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(z[j]));
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    const Eigen::MatrixXd up = m(zp);
    const Eigen::MatrixXd dn = m(zm);
    zp[j] = z[j];
    zm[j] = z[j];
    div += sign * (up.col(j) - dn.col(j)) / (2.0 * h);
    if (!div.allFinite())
      throw NumericError("divergence is not finite at coordinate " + std::to_string(j));
  }
  return div;
}

}  // namespace

void validatePsd(const Eigen::MatrixXd& D, double tol) {
  checkSquare(D, "D");
  const double asym = (D - D.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) throw ValidationError("D not symmetric (max |D - D^T| = " + fmt(asym) + ")");
  if (D.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -tol) throw ValidationError("D not positive semidefinite (min eigenvalue = " + fmt(lo) + ")");
}

void validateSkew(const Eigen::MatrixXd& Q, double tol) {
  checkSquare(Q, "Q");
  if (Q.size() == 0) return;
  const double sym = (Q + Q.transpose()).cwiseAbs().maxCoeff();
  if (sym > tol) throw ValidationError("Q not skew-symmetric (max |Q + Q^T| = " + fmt(sym) + ")");
}

Eigen::MatrixXd DynamicsSpec::diffusion(const Eigen::VectorXd& z) const {
  return constant_ ? d_const_ : d_fn_(z);
}

Eigen::MatrixXd DynamicsSpec::skew(const Eigen::VectorXd& z) const {
  return constant_ ? q_const_ : q_fn_(z);
}

Eigen::VectorXd DynamicsSpec::gammaForward(const Eigen::VectorXd& z) const {
  if (constant_) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  return gamma_fwd_(z);
}

Eigen::VectorXd DynamicsSpec::gammaAdjoint(const Eigen::VectorXd& z) const {
  if (constant_) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  return gamma_adj_(z);
}

Eigen::VectorXd DynamicsSpec::drift(const Eigen::VectorXd& z, const Eigen::VectorXd& grad,
                                    Direction dir) const {
  if (constant_) {
    Eigen::VectorXd v = -(d_const_ * grad);
    if (has_skew_) {
      if (dir == Direction::Forward)
        v.noalias() -= q_const_ * grad;
      else
        v.noalias() += q_const_ * grad;
    }
    return v;
  }
  const double s = dir == Direction::Forward ? 1.0 : -1.0;
  return -(d_fn_(z) + s * q_fn_(z)) * grad + gamma(z, dir);
}

DynamicsSpec constantDynamics(Eigen::MatrixXd D, Eigen::MatrixXd Q) {
  checkSquare(D, "D");
  checkSquare(Q, "Q");
  if (D.rows() != Q.rows()) throw std::invalid_argument("D and Q dimensions differ");
  if (D.rows() == 0) throw std::invalid_argument("dynamics dimension must be positive");
  validatePsd(D);
  validateSkew(Q);
  DynamicsSpec spec;
  spec.dim_ = static_cast<std::size_t>(D.rows());
  spec.constant_ = true;
  spec.has_skew_ = (Q.array() != 0.0).any();
  spec.d_const_ = std::move(D);
  spec.q_const_ = std::move(Q);
  return spec;
}

DynamicsSpec stateDependentDynamics(std::size_t dim, MatrixField D, MatrixField Q,
                                    DivergenceMode mode, VectorField gamma_forward,
                                    VectorField gamma_adjoint) {
  if (dim == 0) throw std::invalid_argument("dynamics dimension must be positive");
  if (!D || !Q) throw std::invalid_argument("stateDependentDynamics needs D and Q callables");
  DynamicsSpec spec;
  spec.dim_ = dim;
  spec.constant_ = false;
  spec.has_skew_ = true;
  spec.d_fn_ = D;
  spec.q_fn_ = Q;
  if (mode == DivergenceMode::Analytic) {
    if (!gamma_forward || !gamma_adjoint)
      throw std::invalid_argument("analytic divergence mode needs both divergence callables");
    spec.gamma_fwd_ = std::move(gamma_forward);
    spec.gamma_adj_ = std::move(gamma_adjoint);
  } else {
    spec.gamma_fwd_ = [D, Q](const Eigen::VectorXd& z) {
      return Eigen::VectorXd(fdDivergence(D, z, 1.0) + fdDivergence(Q, z, 1.0));
    };
    spec.gamma_adj_ = [D, Q](const Eigen::VectorXd& z) {
      return Eigen::VectorXd(fdDivergence(D, z, 1.0) - fdDivergence(Q, z, 1.0));
    };
  }
  return spec;
}

DynamicsSpec langevinDynamics(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return constantDynamics(Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, n));
}

Eigen::MatrixXd blockRotationSkew(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  const Eigen::Index m = (n + 1) / 2;
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  full.topRightCorner(m, m) = -Eigen::MatrixXd::Identity(m, m);
  full.bottomLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
  return full.topLeftCorner(n, n);
}

StepSchedule::StepSchedule(double eps) : epsilon(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("step size must be positive");
}

Eigen::MatrixXd noiseFactor(const Eigen::MatrixXd& D, double eps) {
  const Eigen::Index n = D.rows();
  if ((D.array() == 0.0).all()) return Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd cov = 2.0 * eps * D;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  double jitter = 1e-12 * cov.trace() / static_cast<double>(n);
  for (int attempt = 0; attempt < 3; ++attempt, jitter *= 10.0) {
    llt.compute(cov + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw NumericError("Cholesky factorization of 2 eps D failed after jitter escalation");
}

Eigen::VectorXd sdeStep(const Eigen::VectorXd& z, const TargetDensity& target,
                        const DynamicsSpec& dyn, const StepSchedule& sched,
                        const Eigen::VectorXd& xi) {
  const Eigen::VectorXd grad = target.gradient(z);
  if (!grad.allFinite()) throw NumericError("non-finite gradient in sdeStep");
  Eigen::VectorXd next = z + sched.epsilon * dyn.drift(z, grad, Direction::Forward);
  next.noalias() += noiseFactor(dyn.diffusion(z), sched.epsilon) * xi;
  return next;
}

Eigen::VectorXd sdeStep(const Eigen::VectorXd& z, const TargetDensity& target,
                        const DynamicsSpec& dyn, const StepSchedule& sched, Rng& rng) {
  return sdeStep(z, target, dyn, sched, rng.normalVector(z.size()));
}

PhasePoint leapfrogStep(const Eigen::VectorXd& theta, const Eigen::VectorXd& momentum,
                        const TargetDensity& target, const Eigen::MatrixXd& mass_inverse,
                        double eps) {
  const Eigen::VectorXd g0 = target.gradient(theta);
  if (!g0.allFinite()) throw NumericError("non-finite gradient in leapfrogStep");
  const Eigen::VectorXd r_half = momentum - 0.5 * eps * g0;
  PhasePoint out;
  out.theta = theta + eps * (mass_inverse * r_half);
  const Eigen::VectorXd g1 = target.gradient(out.theta);
  if (!g1.allFinite()) throw NumericError("non-finite gradient in leapfrogStep");
  out.momentum = r_half - 0.5 * eps * g1;
  return out;
}

}  // namespace irmc
