#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "irmc/rng.hpp"
#include "irmc/targets.hpp"

namespace irmc {

/// Proposal q(z | y) for plain Metropolis-Hastings.
class Proposal {
 public:
  virtual ~Proposal() = default;
  virtual std::string family() const = 0;
  virtual std::size_t dim() const = 0;
  virtual Eigen::VectorXd sample(const Eigen::VectorXd& y, Rng& rng) const = 0;
  /// log q(z | y)
  virtual double logDensity(const Eigen::VectorXd& z, const Eigen::VectorXd& y) const = 0;
};

/// z = y + sigma * xi, xi ~ N(0, I).
std::shared_ptr<const Proposal> gaussianRandomWalk(double sigma, std::size_t dim);

/// z_i = y_i + s_i gamma_i with gamma_i ~ Gamma(shape, scale = beta) and
/// independent uniform signs s_i. Symmetric: q(z | y) = q(2y - z | y).
std::shared_ptr<const Proposal> symmetrizedGammaProposal(double shape, double beta, std::size_t dim);

/// Proposal pair (f~, g~) over the lifted space (z, z^p): f~ moves along the
/// direction z^p, g~ against it, and f~(z | y, -y^p) = g~(z | y, y^p).
class DirectionalProposal {
 public:
  virtual ~DirectionalProposal() = default;
  virtual std::string family() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t auxDim() const = 0;

  /// Draw z ~ f~(. | y, y^p).
  virtual Eigen::VectorXd sample(const Eigen::VectorXd& y, const Eigen::VectorXd& yp,
                                 Rng& rng) const = 0;
  /// log f~(z | y, y^p)
  virtual double forwardLogDensity(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& yp) const = 0;
  /// log g~(x | z, z^p)
  virtual double reverseLogDensity(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                                   const Eigen::VectorXd& zp) const = 0;

  /// Draw y^p from the symmetric auxiliary prior.
  virtual Eigen::VectorXd sampleAux(Rng& rng) const = 0;
  /// log pi^p(y^p) (constant on the prior's support, -inf off it).
  virtual double auxLogDensity(const Eigen::VectorXd& yp) const = 0;
};

/// f~(z | y, y^p) = 2 N(z; y, sigma^2 I) on the half-space <y^p, z - y> >= 0,
/// g~ the same on the closed opposite half-space. The direction is uniform on
/// the unit L2 sphere (the binary {-1, +1} case in one dimension).
std::shared_ptr<const DirectionalProposal> halfSpaceGaussianProposal(double sigma, std::size_t dim);

/// z_i = y_i + gamma_i y^p_i with independent gamma_i ~ Gamma(shape, scale = beta);
/// the reverse move subtracts. y^p is uniform on {(1/d) |y^p|_1 = 1}.
/// Coordinates with y^p_i = 0 stay fixed.
std::shared_ptr<const DirectionalProposal> gammaDirectionalProposal(double shape, double beta,
                                                                    std::size_t dim);

/// f~ = g~ = N(y, sigma^2 I) with a binary direction that the kernels ignore.
/// I-Jump with this family is Metropolis-Hastings plus a redundant flip.
std::shared_ptr<const DirectionalProposal> plainGaussianDirectional(double sigma, std::size_t dim);

struct LiftedState {
  Eigen::VectorXd z;
  Eigen::VectorXd zp;
};

struct MhResult {
  Eigen::VectorXd z;
  double potential = 0.0;  ///< H at the returned state
  double alpha = 0.0;
  bool accepted = false;
};

struct IJumpResult {
  LiftedState state;
  double potential = 0.0;
  double alpha = 0.0;
  bool accepted = false;
  bool flipped = false;
};

/// Acceptance probability of a given MH proposal z_star from y.
double mhAlpha(const Eigen::VectorXd& y, double h_y, const Eigen::VectorXd& z_star, double h_star,
               const Proposal& proposal);

MhResult mhStep(const Eigen::VectorXd& y, double h_y, const TargetDensity& target,
                const Proposal& proposal, Rng& rng);
MhResult mhStep(const Eigen::VectorXd& y, const TargetDensity& target, const Proposal& proposal,
                Rng& rng);

/// Acceptance probability of a given lifted proposal z_star from (z, z^p); z^p is kept.
double iJumpAlpha(const LiftedState& state, double h_z, const Eigen::VectorXd& z_star,
                  double h_star, const DirectionalProposal& proposal);

/// One lifted jump: accept keeps z^p, reject keeps z and negates z^p.
IJumpResult iJumpStep(const LiftedState& state, double h_z, const TargetDensity& target,
                      const DirectionalProposal& proposal, Rng& rng);
IJumpResult iJumpStep(const LiftedState& state, const TargetDensity& target,
                      const DirectionalProposal& proposal, Rng& rng);

/// Redraw z^p from the auxiliary prior.
LiftedState resampleAux(const LiftedState& state, const DirectionalProposal& proposal, Rng& rng);

/// Uniform draw from {-1, +1} as a length-1 vector.
Eigen::VectorXd binaryDirection(Rng& rng);

}  // namespace irmc
