#include "irmc/jump.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "irmc/errors.hpp"

namespace irmc {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

void requirePositive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void requireDim(std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("proposal dimension must be positive");
}

double gaussianLogPdf(const Eigen::VectorXd& z, const Eigen::VectorXd& mean, double sigma) {
  const double d = static_cast<double>(z.size());
  return -0.5 * (z - mean).squaredNorm() / (sigma * sigma) - d * std::log(sigma) - 0.5 * d * kLogTwoPi;
}

class GammaLogPdf {
 public:
  GammaLogPdf(double shape, double scale)
      : shape_(shape), scale_(scale), norm_(std::lgamma(shape) + shape * std::log(scale)) {}
  double operator()(double x) const {
    if (!(x > 0.0)) return kNegInf;
    return (shape_ - 1.0) * std::log(x) - x / scale_ - norm_;
  }
  double shape() const { return shape_; }
  double scale() const { return scale_; }

 private:
  double shape_;
  double scale_;
  double norm_;
};

// Support check tolerance for auxiliary priors.
constexpr double kAuxTol = 1e-9;

class GaussianRandomWalk final : public Proposal {
 public:
  GaussianRandomWalk(double sigma, std::size_t dim) : sigma_(sigma), dim_(dim) {}
  std::string family() const override { return "gaussian"; }
  std::size_t dim() const override { return dim_; }
  Eigen::VectorXd sample(const Eigen::VectorXd& y, Rng& rng) const override {
    return y + sigma_ * rng.normalVector(y.size());
  }
  double logDensity(const Eigen::VectorXd& z, const Eigen::VectorXd& y) const override {
    return gaussianLogPdf(z, y, sigma_);
  }

 private:
  double sigma_;
  std::size_t dim_;
};

class SymmetrizedGamma final : public Proposal {
 public:
  SymmetrizedGamma(double shape, double beta, std::size_t dim) : pdf_(shape, beta), dim_(dim) {}
  std::string family() const override { return "symmetrized-gamma"; }
  std::size_t dim() const override { return dim_; }
  Eigen::VectorXd sample(const Eigen::VectorXd& y, Rng& rng) const override {
    Eigen::VectorXd z = y;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double g = rng.gamma(pdf_.shape(), pdf_.scale());
      z[i] += rng.sign() * g;
    }
    return z;
  }
  double logDensity(const Eigen::VectorXd& z, const Eigen::VectorXd& y) const override {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) lp += std::log(0.5) + pdf_(std::abs(z[i] - y[i]));
    return lp;
  }

 private:
  GammaLogPdf pdf_;
  std::size_t dim_;
};

class HalfSpaceGaussian final : public DirectionalProposal {
 public:
  HalfSpaceGaussian(double sigma, std::size_t dim)
      : sigma_(sigma),
        dim_(dim),
        aux_log_(-(std::log(2.0) + 0.5 * static_cast<double>(dim) * std::log(std::numbers::pi) -
                   std::lgamma(0.5 * static_cast<double>(dim)))) {}

  std::string family() const override { return "half-space-gaussian"; }
  std::size_t dim() const override { return dim_; }
  std::size_t auxDim() const override { return dim_; }

  Eigen::VectorXd sample(const Eigen::VectorXd& y, const Eigen::VectorXd& yp, Rng& rng) const override {
    const Eigen::VectorXd eta = sigma_ * rng.normalVector(y.size());
    return eta.dot(yp) >= 0.0 ? Eigen::VectorXd(y + eta) : Eigen::VectorXd(y - eta);
  }
  double forwardLogDensity(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& yp) const override {
    const Eigen::VectorXd diff = z - y;
    if (!(yp.dot(diff) >= 0.0)) return kNegInf;
    return std::log(2.0) + gaussianLogPdf(z, y, sigma_);
  }
  double reverseLogDensity(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& zp) const override {
    const Eigen::VectorXd diff = x - z;
    if (!(zp.dot(diff) <= 0.0)) return kNegInf;
    return std::log(2.0) + gaussianLogPdf(x, z, sigma_);
  }
  Eigen::VectorXd sampleAux(Rng& rng) const override {
    Eigen::VectorXd v;
    double n = 0.0;
    do {
      v = rng.normalVector(static_cast<Eigen::Index>(dim_));
      n = v.norm();
    } while (n == 0.0);
    return v / n;
  }
  double auxLogDensity(const Eigen::VectorXd& yp) const override {
    return std::abs(yp.norm() - 1.0) <= kAuxTol ? aux_log_ : kNegInf;
  }

 private:
  double sigma_;
  std::size_t dim_;
  double aux_log_;  // minus log surface area of the unit sphere
};

class GammaDirectional final : public DirectionalProposal {
 public:
  GammaDirectional(double shape, double beta, std::size_t dim) : pdf_(shape, beta), dim_(dim) {
    // Surface of {|x|_1 = d}: 2^d faces, each a simplex of area sqrt(d) d^(d-1) / (d-1)!.
    const double d = static_cast<double>(dim);
    aux_log_ = -(d * std::log(2.0) + 0.5 * std::log(d) + (d - 1.0) * std::log(d) - std::lgamma(d));
  }

  std::string family() const override { return "gamma-directional"; }
  std::size_t dim() const override { return dim_; }
  std::size_t auxDim() const override { return dim_; }

  Eigen::VectorXd sample(const Eigen::VectorXd& y, const Eigen::VectorXd& yp, Rng& rng) const override {
    Eigen::VectorXd z = y;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double g = rng.gamma(pdf_.shape(), pdf_.scale());
      if (yp[i] != 0.0) z[i] += g * yp[i];
    }
    return z;
  }
  double forwardLogDensity(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& yp) const override {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (yp[i] == 0.0) {
        if (z[i] != y[i]) return kNegInf;
        continue;
      }
      lp += pdf_((z[i] - y[i]) / yp[i]) - std::log(std::abs(yp[i]));
    }
    return lp;
  }
  double reverseLogDensity(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& zp) const override {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (zp[i] == 0.0) {
        if (x[i] != z[i]) return kNegInf;
        continue;
      }
      lp += pdf_((z[i] - x[i]) / zp[i]) - std::log(std::abs(zp[i]));
    }
    return lp;
  }
  Eigen::VectorXd sampleAux(Rng& rng) const override {
    const auto n = static_cast<Eigen::Index>(dim_);
    Eigen::VectorXd e(n);
    double total = 0.0;
    do {
      for (Eigen::Index i = 0; i < n; ++i) e[i] = rng.exponential();
      total = e.sum();
    } while (total == 0.0);
    for (Eigen::Index i = 0; i < n; ++i) e[i] = rng.sign() * e[i] * static_cast<double>(n) / total;
    return e;
  }
  double auxLogDensity(const Eigen::VectorXd& yp) const override {
    const double m = yp.cwiseAbs().sum() / static_cast<double>(yp.size());
    return std::abs(m - 1.0) <= kAuxTol ? aux_log_ : kNegInf;
  }

 private:
  GammaLogPdf pdf_;
  std::size_t dim_;
  double aux_log_ = 0.0;
};

class PlainGaussianDirectional final : public DirectionalProposal {
 public:
  PlainGaussianDirectional(double sigma, std::size_t dim) : sigma_(sigma), dim_(dim) {}
  std::string family() const override { return "plain-gaussian"; }
  std::size_t dim() const override { return dim_; }
  std::size_t auxDim() const override { return 1; }
  Eigen::VectorXd sample(const Eigen::VectorXd& y, const Eigen::VectorXd&, Rng& rng) const override {
    return y + sigma_ * rng.normalVector(y.size());
  }
  double forwardLogDensity(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                           const Eigen::VectorXd&) const override {
    return gaussianLogPdf(z, y, sigma_);
  }
  double reverseLogDensity(const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                           const Eigen::VectorXd&) const override {
    return gaussianLogPdf(x, z, sigma_);
  }
  Eigen::VectorXd sampleAux(Rng& rng) const override { return binaryDirection(rng); }
  double auxLogDensity(const Eigen::VectorXd& yp) const override {
    return yp.size() == 1 && std::abs(yp[0]) == 1.0 ? std::log(0.5) : kNegInf;
  }

 private:
  double sigma_;
  std::size_t dim_;
};

double alphaFromLog(double log_alpha) {
  if (std::isnan(log_alpha)) throw NumericError("acceptance ratio is NaN");
  return log_alpha >= 0.0 ? 1.0 : std::exp(log_alpha);
}

void checkPotential(double h) {
  if (std::isnan(h)) throw NumericError("potential evaluated to NaN");
}

}  // namespace

std::shared_ptr<const Proposal> gaussianRandomWalk(double sigma, std::size_t dim) {
  requirePositive(sigma, "sigma");
  requireDim(dim);
  return std::make_shared<GaussianRandomWalk>(sigma, dim);
}

std::shared_ptr<const Proposal> symmetrizedGammaProposal(double shape, double beta, std::size_t dim) {
  requirePositive(shape, "gamma shape");
  requirePositive(beta, "gamma beta");
  requireDim(dim);
  return std::make_shared<SymmetrizedGamma>(shape, beta, dim);
}

std::shared_ptr<const DirectionalProposal> halfSpaceGaussianProposal(double sigma, std::size_t dim) {
  requirePositive(sigma, "sigma");
  requireDim(dim);
  return std::make_shared<HalfSpaceGaussian>(sigma, dim);
}

std::shared_ptr<const DirectionalProposal> gammaDirectionalProposal(double shape, double beta,
                                                                    std::size_t dim) {
  requirePositive(shape, "gamma shape");
  requirePositive(beta, "gamma beta");
  requireDim(dim);
  return std::make_shared<GammaDirectional>(shape, beta, dim);
}

std::shared_ptr<const DirectionalProposal> plainGaussianDirectional(double sigma, std::size_t dim) {
  requirePositive(sigma, "sigma");
  requireDim(dim);
  return std::make_shared<PlainGaussianDirectional>(sigma, dim);
}

Eigen::VectorXd binaryDirection(Rng& rng) { return Eigen::VectorXd::Constant(1, rng.sign()); }

double mhAlpha(const Eigen::VectorXd& y, double h_y, const Eigen::VectorXd& z_star, double h_star,
               const Proposal& proposal) {
  checkPotential(h_star);
  if (std::isinf(h_star)) return 0.0;
  const double fwd = proposal.logDensity(z_star, y);
  if (fwd == kNegInf) throw NumericError("proposal density is zero at its own draw");
  return alphaFromLog(h_y - h_star + proposal.logDensity(y, z_star) - fwd);
}

MhResult mhStep(const Eigen::VectorXd& y, double h_y, const TargetDensity& target,
                const Proposal& proposal, Rng& rng) {
  Eigen::VectorXd z_star = proposal.sample(y, rng);
  const double h_star = target.potential(z_star);
  const double alpha = mhAlpha(y, h_y, z_star, h_star, proposal);
  const double u = rng.uniform();
  MhResult out;
  out.alpha = alpha;
  out.accepted = u < alpha;
  if (out.accepted) {
    out.z = std::move(z_star);
    out.potential = h_star;
  } else {
    out.z = y;
    out.potential = h_y;
  }
  return out;
}

MhResult mhStep(const Eigen::VectorXd& y, const TargetDensity& target, const Proposal& proposal,
                Rng& rng) {
  return mhStep(y, target.potential(y), target, proposal, rng);
}

double iJumpAlpha(const LiftedState& state, double h_z, const Eigen::VectorXd& z_star,
                  double h_star, const DirectionalProposal& proposal) {
  checkPotential(h_star);
  const double fwd = proposal.forwardLogDensity(z_star, state.z, state.zp);
  if (fwd == kNegInf) throw NumericError("forward proposal density is zero at its own draw");
  if (std::isinf(h_star)) return 0.0;
  // z^p is carried over unchanged, so the auxiliary prior ratio is exactly one.
  const double aux = proposal.auxLogDensity(state.zp);
  const double rev = proposal.reverseLogDensity(state.z, z_star, state.zp);
  return alphaFromLog(h_z - h_star + (aux - aux) + rev - fwd);
}

IJumpResult iJumpStep(const LiftedState& state, double h_z, const TargetDensity& target,
                      const DirectionalProposal& proposal, Rng& rng) {
  Eigen::VectorXd z_star = proposal.sample(state.z, state.zp, rng);
  const double h_star = target.potential(z_star);
  const double alpha = iJumpAlpha(state, h_z, z_star, h_star, proposal);
  const double u = rng.uniform();
  IJumpResult out;
  out.alpha = alpha;
  out.accepted = u < alpha;
  out.flipped = !out.accepted;
  if (out.accepted) {
    out.state.z = std::move(z_star);
    out.state.zp = state.zp;
    out.potential = h_star;
  } else {
    out.state.z = state.z;
    out.state.zp = -state.zp;
    out.potential = h_z;
  }
  return out;
}

IJumpResult iJumpStep(const LiftedState& state, const TargetDensity& target,
                      const DirectionalProposal& proposal, Rng& rng) {
  return iJumpStep(state, target.potential(state.z), target, proposal, rng);
}

LiftedState resampleAux(const LiftedState& state, const DirectionalProposal& proposal, Rng& rng) {
  return LiftedState{state.z, proposal.sampleAux(rng)};
}

}  // namespace irmc
