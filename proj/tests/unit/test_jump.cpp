#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "irmc/errors.hpp"
#include "irmc/jump.hpp"
#include "irmc/rng.hpp"
#include "irmc/targets.hpp"

using namespace irmc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Independent Gamma(shape, scale) log-density.
double gammaLogPdf(double x, double shape, double scale) {
  return (shape - 1) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

class ZeroDensityProposal final : public Proposal {
 public:
  std::string family() const override { return "broken"; }
  std::size_t dim() const override { return 1; }
  Eigen::VectorXd sample(const Eigen::VectorXd& y, Rng&) const override { return y + vec({0.1}); }
  double logDensity(const Eigen::VectorXd&, const Eigen::VectorXd&) const override { return kNegInf; }
};

// Every point other than the origin has infinite potential.
TargetDensity pinnedTarget(std::size_t d) {
  return TargetDensity(
      "pinned", d, [](const Eigen::VectorXd& z) { return z.isZero(0.0) ? 0.0 : std::numeric_limits<double>::infinity(); },
      [d](const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)); });
}

}  // namespace

TEST(MhAlpha, GaussianRatio) {
  const auto t = stdNormalTarget(1);
  const auto q = gaussianRandomWalk(1.0, 1);
  EXPECT_NEAR(mhAlpha(vec({0}), 0.0, vec({1}), t.potential(vec({1})), *q), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(std::exp(-0.5), 0.60653, 1e-5);
  EXPECT_EQ(mhAlpha(vec({0.3}), t.potential(vec({0.3})), vec({0.3}), t.potential(vec({0.3})), *q), 1.0);
  EXPECT_EQ(mhAlpha(vec({2}), t.potential(vec({2})), vec({1}), t.potential(vec({1})), *q), 1.0);
  EXPECT_EQ(mhAlpha(vec({0}), 0.0, vec({1}), std::numeric_limits<double>::infinity(), *q), 0.0);
}

TEST(MhStep, ZeroForwardDensityIsAnError) {
  Rng rng(1);
  ZeroDensityProposal q;
  EXPECT_THROW(mhStep(vec({0}), stdNormalTarget(1), q, rng), NumericError);
}

TEST(MhStep, RejectionReturnsCurrentState) {
  Rng rng(3);
  const auto q = gaussianRandomWalk(0.5, 2);
  const auto r = mhStep(Eigen::VectorXd::Zero(2), pinnedTarget(2), *q, rng);
  EXPECT_FALSE(r.accepted);
  EXPECT_TRUE(r.z.isZero(0.0));
  EXPECT_EQ(r.alpha, 0.0);
}

TEST(HalfSpaceGaussian, SamplesLieInForwardHalfSpace) {
  const auto p = halfSpaceGaussianProposal(0.8, 2);
  Rng rng(5);
  const Eigen::VectorXd y = vec({0.2, -0.4});
  const Eigen::VectorXd yp = vec({1, 0});
  int reflected = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto z = p->sample(y, yp, rng);
    EXPECT_GE(yp.dot(z - y), 0.0);
    EXPECT_TRUE(std::isfinite(p->forwardLogDensity(z, y, yp)));
    reflected += (z - y)[1] < 0.0;
  }
  // The orthogonal coordinate is untouched by the reflection, so it stays symmetric.
  EXPECT_NEAR(reflected / 10000.0, 0.5, 0.02);
}

TEST(HalfSpaceGaussian, ForwardDensityHandComputed) {
  const auto p = halfSpaceGaussianProposal(0.8, 2);
  const auto y = vec({0, 0});
  const auto yp = vec({1, 0});
  const auto z = vec({0.3, -0.4});  // reflection of eta = (-0.3, 0.4)
  const double expected = std::log(2.0) - 0.25 / (2 * 0.64) - std::log(2 * std::numbers::pi * 0.64);
  EXPECT_NEAR(p->forwardLogDensity(z, y, yp), expected, 1e-14);
  EXPECT_EQ(p->forwardLogDensity(vec({-0.3, 0.4}), y, yp), kNegInf);
}

TEST(HalfSpaceGaussian, OneDimensionalAlphaIsTargetRatio) {
  const auto t = stdNormalTarget(1);
  const auto p = halfSpaceGaussianProposal(1.0, 1);
  const LiftedState s{vec({0}), vec({1})};
  const double a = iJumpAlpha(s, 0.0, vec({0.5}), t.potential(vec({0.5})), *p);
  EXPECT_NEAR(a, std::exp(-0.125), 1e-15);
  EXPECT_NEAR(a, 0.8825, 1e-4);
}

TEST(HalfSpaceGaussian, AlphaIsTargetRatioForEveryDraw) {
  const auto t = moonTarget();
  const auto p = halfSpaceGaussianProposal(0.5, 2);
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const LiftedState s{vec({rng.normal(), rng.normal() - 1.0}), p->sampleAux(rng)};
    const auto z = p->sample(s.z, s.zp, rng);
    const double hz = t.potential(s.z), hs = t.potential(z);
    EXPECT_NEAR(iJumpAlpha(s, hz, z, hs, *p), std::min(1.0, std::exp(hz - hs)), 1e-12);
  }
}

TEST(HalfSpaceGaussian, ForwardDensityIntegratesToOne) {
  const double sigma = 0.7;
  const auto p = halfSpaceGaussianProposal(sigma, 2);
  const auto y = vec({0.3, -0.2});
  const auto yp = vec({0.6, 0.8});
  const int n = 800;
  const double half = 6 * sigma, h = 2 * half / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto z = vec({y[0] - half + (i + 0.5) * h, y[1] - half + (j + 0.5) * h});
      total += std::exp(p->forwardLogDensity(z, y, yp)) * h * h;
    }
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(GammaDirectional, OneDimensionalFactorsCancel) {
  const auto p = gammaDirectionalProposal(1.1, 0.4, 1);
  const auto y = vec({0});
  const auto yp = vec({1});
  const auto z = vec({0.5});
  EXPECT_NEAR(p->forwardLogDensity(z, y, yp), gammaLogPdf(0.5, 1.1, 0.4), 1e-14);
  EXPECT_NEAR(p->reverseLogDensity(y, z, yp), gammaLogPdf(0.5, 1.1, 0.4), 1e-14);
  const auto t = stdNormalTarget(1);
  EXPECT_NEAR(iJumpAlpha({y, yp}, 0.0, z, t.potential(z), *p), std::exp(-0.125), 1e-15);
}

TEST(GammaDirectional, AuxiliaryPriorSupport) {
  const auto p = gammaDirectionalProposal(1.1, 0.4, 2);
  EXPECT_TRUE(std::isfinite(p->auxLogDensity(vec({1, -1}))));
  EXPECT_TRUE(std::isfinite(p->auxLogDensity(vec({0.5, 1.5}))));
  EXPECT_EQ(p->auxLogDensity(vec({1, 0})), kNegInf);
  Rng rng(4);
  for (std::size_t d : {1u, 2u, 5u, 40u}) {
    const auto q = gammaDirectionalProposal(1.1, 1.0, d);
    for (int i = 0; i < 200; ++i) {
      const auto yp = q->sampleAux(rng);
      EXPECT_NEAR(yp.cwiseAbs().sum() / static_cast<double>(d), 1.0, 1e-12);
      EXPECT_EQ(q->auxLogDensity(yp), q->auxLogDensity(-yp));
    }
  }
}

TEST(GammaDirectional, NonUnitDirectionJacobian) {
  const auto p = gammaDirectionalProposal(2.0, 0.5, 2);
  const auto y = vec({1, 1});
  const auto yp = vec({0.5, -1.5});
  const auto z = vec({1.2, 0.1});
  const double expected = gammaLogPdf(0.2 / 0.5, 2.0, 0.5) - std::log(0.5) + gammaLogPdf(0.9 / 1.5, 2.0, 0.5) -
                          std::log(1.5);
  EXPECT_NEAR(p->forwardLogDensity(z, y, yp), expected, 1e-13);
  // Wrong direction on either coordinate has zero density.
  EXPECT_EQ(p->forwardLogDensity(vec({0.8, 0.1}), y, yp), kNegInf);
}

TEST(GammaDirectional, ZeroDirectionCoordinateIsFrozen) {
  const auto p = gammaDirectionalProposal(1.1, 1.0, 2);
  Rng rng(8);
  const auto y = vec({0.5, -0.5});
  const auto yp = vec({2, 0});
  for (int i = 0; i < 100; ++i) {
    const auto z = p->sample(y, yp, rng);
    EXPECT_EQ(z[1], y[1]);
    EXPECT_TRUE(std::isfinite(p->forwardLogDensity(z, y, yp)));
  }
}

TEST(GammaDirectional, ForwardDensityIntegratesToOne) {
  const auto p = gammaDirectionalProposal(1.1, 0.4, 1);
  const auto y = vec({0.3});
  const auto yp = vec({-1});
  // Substituting x = u^2 resolves the x^(shape - 1) behaviour at the origin.
  const int n = 400000;
  const double umax = 5.0, h = umax / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) * h;
    total += std::exp(p->forwardLogDensity(vec({y[0] - u * u}), y, yp)) * 2 * u * h;
  }
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(SwapIdentity, HoldsForRandomTuples) {
  Rng rng(12);
  for (std::size_t d : {1u, 2u, 3u, 10u}) {
    const std::vector<std::shared_ptr<const DirectionalProposal>> families = {
        halfSpaceGaussianProposal(0.9, d), gammaDirectionalProposal(1.1, 0.4, d)};
    for (const auto& p : families) {
      for (int i = 0; i < 1000; ++i) {
        const auto y = rng.normalVector(static_cast<Eigen::Index>(d));
        const auto yp = p->sampleAux(rng);
        // Draw z from either branch so both finite and -inf cases occur.
        const auto z = p->sample(y, rng.sign() > 0 ? yp : Eigen::VectorXd(-yp), rng);
        const double a = p->forwardLogDensity(z, y, -yp);
        const double b = p->reverseLogDensity(z, y, yp);
        if (std::isinf(a) || std::isinf(b)) {
          EXPECT_EQ(a, b) << p->family();
        } else {
          EXPECT_LE(std::abs(a - b), 1e-12) << p->family();
        }
      }
    }
  }
}

TEST(SymmetrizedGamma, DensityIsSymmetric) {
  const auto q = symmetrizedGammaProposal(1.1, 0.4, 3);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto y = rng.normalVector(3);
    const auto z = q->sample(y, rng);
    EXPECT_NEAR(q->logDensity(z, y), q->logDensity(2 * y - z, y), 1e-12);
    EXPECT_NEAR(q->logDensity(z, y), q->logDensity(y, z), 1e-12);
  }
}

TEST(SymmetrizedGamma, MeanDisplacementIsZero) {
  const auto q = symmetrizedGammaProposal(1.1, 1.0, 1);
  Rng rng(6);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += q->sample(vec({0}), rng)[0];
  // Var of the increment is shape (shape + 1) scale^2 = 2.31.
  EXPECT_LE(std::abs(sum / n), 4.0 * std::sqrt(2.31 / n));
}

TEST(SymmetrizedGamma, MhAlphaIsTargetRatio) {
  const auto q = symmetrizedGammaProposal(1.1, 0.4, 2);
  const auto t = bimodalTarget(1.0);
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const auto y = rng.normalVector(2);
    const auto z = q->sample(y, rng);
    const double hy = t.potential(y), hz = t.potential(z);
    EXPECT_NEAR(mhAlpha(y, hy, z, hz, *q), std::min(1.0, std::exp(hy - hz)), 1e-12);
  }
}

TEST(IJumpStep, RejectionFlipsDirection) {
  const auto p = halfSpaceGaussianProposal(0.5, 2);
  Rng rng(1);
  const LiftedState s{Eigen::VectorXd::Zero(2), vec({0.6, -0.8})};
  const auto r = iJumpStep(s, pinnedTarget(2), *p, rng);
  EXPECT_FALSE(r.accepted);
  EXPECT_TRUE(r.flipped);
  EXPECT_TRUE(r.state.z.isZero(0.0));
  EXPECT_EQ(r.state.zp, -s.zp);
}

TEST(IJumpStep, AcceptanceKeepsDirectionAndFlagsAreExclusive) {
  const auto t = stdNormalTarget(2);
  const auto p = gammaDirectionalProposal(1.1, 0.5, 2);
  Rng rng(2);
  LiftedState s{Eigen::VectorXd::Zero(2), p->sampleAux(rng)};
  double h = t.potential(s.z);
  for (int i = 0; i < 5000; ++i) {
    const auto r = iJumpStep(s, h, t, *p, rng);
    EXPECT_NE(r.accepted, r.flipped);
    if (r.accepted) EXPECT_EQ(r.state.zp, s.zp);
    else EXPECT_EQ(r.state.zp, -s.zp);
    s = r.state;
    h = r.potential;
  }
}

TEST(IJumpStep, UniformTargetAlwaysAccepts) {
  const auto t = uniformBoxTarget({{-100, 100}, {-100, 100}});
  for (const auto& p : {halfSpaceGaussianProposal(0.3, 2), gammaDirectionalProposal(1.1, 0.2, 2)}) {
    Rng rng(3);
    LiftedState s{Eigen::VectorXd::Zero(2), p->sampleAux(rng)};
    for (int i = 0; i < 1000; ++i) {
      const auto r = iJumpStep(s, t, *p, rng);
      // The persistent direction carries the walk to the wall, where a proposal
      // off the box is the only possible rejection.
      if (s.z.cwiseAbs().maxCoeff() < 95.0) EXPECT_EQ(r.alpha, 1.0);
      else EXPECT_TRUE(r.alpha == 0.0 || r.alpha == 1.0);
      EXPECT_EQ(r.accepted, r.alpha == 1.0);
      s = r.state;
    }
  }
}

TEST(IJumpStep, PlainGaussianFamilyReproducesMhAlpha) {
  const auto t = bimodalTarget(1.0);
  const auto lifted = plainGaussianDirectional(0.6, 2);
  const auto mh = gaussianRandomWalk(0.6, 2);
  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    const LiftedState s{rng.normalVector(2), binaryDirection(rng)};
    const auto z = lifted->sample(s.z, s.zp, rng);
    const double hz = t.potential(s.z), hs = t.potential(z);
    EXPECT_NEAR(iJumpAlpha(s, hz, z, hs, *lifted), mhAlpha(s.z, hz, z, hs, *mh), 1e-12);
  }
}

TEST(IJumpStep, BinaryDirectionMarginalIsUniform) {
  const auto t = stdNormalTarget(1);
  const auto p = halfSpaceGaussianProposal(1.0, 1);
  Rng rng(21);
  LiftedState s{vec({0}), binaryDirection(rng)};
  double h = 0.0;
  long positive = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const auto r = iJumpStep(s, h, t, *p, rng);
    s = r.state;
    h = r.potential;
    positive += s.zp[0] > 0;
  }
  EXPECT_NEAR(static_cast<double>(positive) / n, 0.5, 0.01);
}

TEST(ResampleAux, PriorSupports) {
  Rng rng(30);
  const auto binary = plainGaussianDirectional(1.0, 3);
  int plus = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto s = resampleAux({vec({1, 2, 3}), vec({1})}, *binary, rng);
    EXPECT_EQ(s.z, vec({1, 2, 3}));
    ASSERT_EQ(s.zp.size(), 1);
    EXPECT_EQ(std::abs(s.zp[0]), 1.0);
    plus += s.zp[0] > 0;
  }
  EXPECT_NEAR(static_cast<double>(plus) / n, 0.5, 0.015);
  const auto sphere = halfSpaceGaussianProposal(1.0, 4);
  const auto l1 = gammaDirectionalProposal(1.1, 1.0, 4);
  for (int i = 0; i < 1000; ++i) {
    const auto a = resampleAux({Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)}, *sphere, rng);
    EXPECT_NEAR(a.zp.norm(), 1.0, 1e-12);
    EXPECT_EQ(sphere->auxLogDensity(a.zp), sphere->auxLogDensity(-a.zp));
    const auto b = resampleAux({Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)}, *l1, rng);
    EXPECT_NEAR(b.zp.cwiseAbs().sum() / 4.0, 1.0, 1e-12);
  }
}

TEST(Proposals, InvalidParametersThrow) {
  EXPECT_THROW(gaussianRandomWalk(0.0, 1), std::invalid_argument);
  EXPECT_THROW(halfSpaceGaussianProposal(-1.0, 1), std::invalid_argument);
  EXPECT_THROW(gammaDirectionalProposal(1.1, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(symmetrizedGammaProposal(0.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(gammaDirectionalProposal(1.1, 1.0, 0), std::invalid_argument);
}
