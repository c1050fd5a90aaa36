#pragma once

#include <cstddef>
#include <functional>
#include <memory>

#include <Eigen/Core>

#include "irmc/rng.hpp"
#include "irmc/targets.hpp"

namespace irmc {

using MatrixField = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

enum class DivergenceMode { Analytic, FiniteDifference };

/// Forward dynamics use D + Q; the adjoint process flips Q to -Q.
enum class Direction { Forward, Adjoint };

/// Continuous dynamics
///   dz = [-(D(z) + Q(z)) grad H(z) + Gamma(z)] dt + sqrt(2 D(z)) dW
/// with D positive semidefinite, Q skew-symmetric and
/// Gamma_i = sum_j d/dz_j (D_ij + Q_ij). The adjoint correction uses D - Q.
class DynamicsSpec {
 public:
  std::size_t dim() const { return dim_; }
  bool isConstant() const { return constant_; }
  /// False when Q is identically zero (constant specs only; state-dependent specs report true).
  bool hasSkew() const { return has_skew_; }

  Eigen::MatrixXd diffusion(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd skew(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gammaForward(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gammaAdjoint(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gamma(const Eigen::VectorXd& z, Direction dir) const {
    return dir == Direction::Forward ? gammaForward(z) : gammaAdjoint(z);
  }

  /// -(D(z) +- Q(z)) grad + Gamma(z) (Gamma-tilde for the adjoint).
  Eigen::VectorXd drift(const Eigen::VectorXd& z, const Eigen::VectorXd& grad, Direction dir) const;

 private:
  friend DynamicsSpec constantDynamics(Eigen::MatrixXd D, Eigen::MatrixXd Q);
  friend DynamicsSpec stateDependentDynamics(std::size_t, MatrixField, MatrixField, DivergenceMode,
                                             VectorField, VectorField);
  DynamicsSpec() = default;

  std::size_t dim_ = 0;
  bool constant_ = true;
  bool has_skew_ = false;
  Eigen::MatrixXd d_const_;
  Eigen::MatrixXd q_const_;
  MatrixField d_fn_;
  MatrixField q_fn_;
  VectorField gamma_fwd_;
  VectorField gamma_adj_;
};

/// Throws ValidationError when D is asymmetric or has an eigenvalue below -tol.
void validatePsd(const Eigen::MatrixXd& D, double tol = 1e-10);
/// Throws ValidationError when max |Q + Q^T| exceeds tol.
void validateSkew(const Eigen::MatrixXd& Q, double tol = 1e-10);

/// Constant D and Q, with Gamma = Gamma-tilde = 0.
DynamicsSpec constantDynamics(Eigen::MatrixXd D, Eigen::MatrixXd Q);

/// State-dependent D(z), Q(z). In FiniteDifference mode the divergence terms are
/// central differences with step 1e-5 (1 + |z_j|); in Analytic mode both
/// divergence callables must be supplied.
DynamicsSpec stateDependentDynamics(std::size_t dim, MatrixField D, MatrixField Q,
                                    DivergenceMode mode, VectorField gamma_forward = {},
                                    VectorField gamma_adjoint = {});

/// Langevin dynamics: D = I, Q = 0.
DynamicsSpec langevinDynamics(std::size_t dim);

/// Skew matrix [[0, -I_m], [I_m, 0]] with m = floor((dim + 1) / 2), truncated
/// to dim x dim (odd dims leave a zero row and column). For dim = 2 this is the
/// 90 degree rotation generator [[0, -1], [1, 0]].
Eigen::MatrixXd blockRotationSkew(std::size_t dim);

struct StepSchedule {
  double epsilon;
  explicit StepSchedule(double eps);
};

/// Lower factor L with L L^T = 2 eps D. A zero D gives a zero factor;
/// indefinite-by-roundoff D gets jitter 1e-12 tr(D)/d, escalated tenfold up
/// to three times before NumericError.
Eigen::MatrixXd noiseFactor(const Eigen::MatrixXd& D, double eps);

/// One Euler-Maruyama step with supplied standard-normal innovations `xi`
/// (eta = L xi).
Eigen::VectorXd sdeStep(const Eigen::VectorXd& z, const TargetDensity& target,
                        const DynamicsSpec& dyn, const StepSchedule& sched,
                        const Eigen::VectorXd& xi);
Eigen::VectorXd sdeStep(const Eigen::VectorXd& z, const TargetDensity& target,
                        const DynamicsSpec& dyn, const StepSchedule& sched, Rng& rng);

struct PhasePoint {
  Eigen::VectorXd theta;
  Eigen::VectorXd momentum;
};

/// Leapfrog step for U(theta) = H(theta) and kinetic energy r^T M^{-1} r / 2.
PhasePoint leapfrogStep(const Eigen::VectorXd& theta, const Eigen::VectorXd& momentum,
                        const TargetDensity& target, const Eigen::MatrixXd& mass_inverse,
                        double eps);

}  // namespace irmc
