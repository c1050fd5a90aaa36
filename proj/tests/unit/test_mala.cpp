#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "irmc/chain.hpp"
#include "irmc/dataset.hpp"
#include "irmc/errors.hpp"
#include "irmc/mala.hpp"
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

Eigen::MatrixXd rotation(double c = 1.0) {
  Eigen::Matrix2d q;
  q << 0, -c, c, 0;
  return q;
}

// Independent isotropic one-step kernel log-density for constant D = I and a standard normal
// target: N(z; y - eps (I + sQ) y, 2 eps I).
double kernelLogPdf(const Eigen::VectorXd& z, const Eigen::VectorXd& y, double eps, const Eigen::MatrixXd& q) {
  const Eigen::VectorXd mu = y - eps * (Eigen::MatrixXd::Identity(y.size(), y.size()) + q) * y;
  const double var = 2 * eps;
  return -0.5 * (z - mu).squaredNorm() / var - 0.5 * static_cast<double>(y.size()) * std::log(2 * std::numbers::pi * var);
}

}  // namespace

TEST(OneStepKernel, MeanAtStationaryPointIsTheState) {
  const auto t = stdNormalTarget(2);
  const OneStepKernel k(langevinDynamics(2), 0.1, Direction::Forward);
  const auto y = evaluate(t, Eigen::VectorXd::Zero(2));
  EXPECT_TRUE(k.mean(y).isZero(0.0));
  EXPECT_EQ(naiveMhAlphaWithForwardKernel(y, y, k), 1.0);
}

TEST(OneStepKernel, LangevinMeanHandArithmetic) {
  const auto t = stdNormalTarget(1);
  const OneStepKernel k(langevinDynamics(1), 0.1, Direction::Forward);
  EXPECT_NEAR(k.mean(evaluate(t, vec({1})))[0], 0.9, 1e-15);
}

TEST(OneStepKernel, ForwardAndAdjointMeans) {
  const auto t = stdNormalTarget(2);
  const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation());
  const auto y = evaluate(t, vec({1, 0}));
  const auto mu = OneStepKernel(dyn, 0.01, Direction::Forward).mean(y);
  const auto mu_adj = OneStepKernel(dyn, 0.01, Direction::Adjoint).mean(y);
  EXPECT_NEAR(mu[0], 0.99, 1e-15);
  EXPECT_NEAR(mu[1], -0.01, 1e-15);
  EXPECT_NEAR(mu_adj[0], 0.99, 1e-15);
  EXPECT_NEAR(mu_adj[1], 0.01, 1e-15);
}

TEST(OneStepKernel, LogDensityMatchesIndependentFormula) {
  const auto t = stdNormalTarget(2);
  const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation());
  const OneStepKernel fwd(dyn, 0.05, Direction::Forward), adj(dyn, 0.05, Direction::Adjoint);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto y = evaluate(t, rng.normalVector(2));
    const auto z = rng.normalVector(2);
    EXPECT_NEAR(fwd.logDensity(z, y), kernelLogPdf(z, y.z, 0.05, rotation()), 1e-12);
    EXPECT_NEAR(adj.logDensity(z, y), kernelLogPdf(z, y.z, 0.05, -rotation()), 1e-12);
  }
}

TEST(OneStepKernel, ZeroSkewMakesDirectionsIdentical) {
  const auto t = moonTarget();
  const auto dyn = langevinDynamics(2);
  const OneStepKernel fwd(dyn, 0.02, Direction::Forward), adj(dyn, 0.02, Direction::Adjoint);
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto y = evaluate(t, rng.normalVector(2));
    const auto z = rng.normalVector(2);
    EXPECT_EQ(fwd.mean(y), adj.mean(y));
    EXPECT_EQ(fwd.logDensity(z, y), adj.logDensity(z, y));
  }
}

TEST(OneStepKernel, SingularCovarianceIsNumericError) {
  const auto dyn = constantDynamics(Eigen::Matrix2d::Zero(), rotation());
  EXPECT_THROW(OneStepKernel(dyn, 0.1, Direction::Forward), NumericError);
}

TEST(MalaStep, RejectsSkewDynamics) {
  Rng rng(1);
  const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation());
  try {
    malaStep(vec({0, 0}), stdNormalTarget(2), dyn, 0.1, rng);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("imalaStep"), std::string::npos);
  }
}

TEST(MalaStep, AlphaMatchesIndependentOracle) {
  const auto t = stdNormalTarget(2);
  const double eps = 0.3;
  Rng a(5), b(5);
  const OneStepKernel k(langevinDynamics(2), eps, Direction::Forward);
  EvaluatedPoint y = evaluate(t, vec({0.5, -1.0}));
  for (int i = 0; i < 200; ++i) {
    const auto r = malaStep(y, t, k, a);
    // Replay the draw on a twin stream.
    const Eigen::VectorXd z = k.mean(y) + std::sqrt(2 * eps) * b.normalVector(2);
    b.uniform();
    const Eigen::MatrixXd zero = Eigen::Matrix2d::Zero();
    const double log_ratio = t.potential(y.z) - t.potential(z) + kernelLogPdf(y.z, z, eps, zero) -
                             kernelLogPdf(z, y.z, eps, zero);
    EXPECT_NEAR(r.alpha, std::min(1.0, std::exp(log_ratio)), 1e-12);
    y = r.point;
  }
}

TEST(MalaStep, TunedAcceptanceOnTwoDimensionalGaussian) {
  SamplerSpec s;
  s.kind = SamplerKind::MALA;
  s.eps = 1.4;
  const auto trace = runChain(s, stdNormalTarget(2), 60000, 10000, 3);
  EXPECT_GE(trace.acceptanceRate(), 0.4);
  EXPECT_LE(trace.acceptanceRate(), 0.6);
}

TEST(ImalaStep, ZeroSkewAlphaEqualsMala) {
  const auto t = bimodalTarget(1.0);
  const auto dyn = langevinDynamics(2);
  const OneStepKernel fwd(dyn, 0.01, Direction::Forward), adj(dyn, 0.01, Direction::Adjoint);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto y = evaluate(t, rng.normalVector(2));
    const auto z = evaluate(t, fwd.sample(y, rng));
    const double mala = naiveMhAlphaWithForwardKernel(y, z, fwd);
    EXPECT_EQ(imalaAlpha(y, z, 1.0, fwd, adj), mala);
    EXPECT_EQ(imalaAlpha(y, z, -1.0, fwd, adj), mala);
  }
}

TEST(ImalaStep, AlphaMatchesIndependentOracle) {
  const auto t = stdNormalTarget(2);
  const double eps = 0.05;
  const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation());
  const OneStepKernel fwd(dyn, eps, Direction::Forward), adj(dyn, eps, Direction::Adjoint);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto y = evaluate(t, rng.normalVector(2));
    const auto z = evaluate(t, rng.normalVector(2));
    const double hy = t.potential(y.z), hz = t.potential(z.z);
    const double plus = hy - hz + kernelLogPdf(y.z, z.z, eps, -rotation()) - kernelLogPdf(z.z, y.z, eps, rotation());
    const double minus = hy - hz + kernelLogPdf(y.z, z.z, eps, rotation()) - kernelLogPdf(z.z, y.z, eps, -rotation());
    EXPECT_NEAR(imalaAlpha(y, z, 1.0, fwd, adj), std::min(1.0, std::exp(plus)), 1e-12);
    EXPECT_NEAR(imalaAlpha(y, z, -1.0, fwd, adj), std::min(1.0, std::exp(minus)), 1e-12);
  }
}

TEST(ImalaStep, FlipBookkeeping) {
  const auto t = moonTarget();
  const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation());
  const OneStepKernel fwd(dyn, 0.05, Direction::Forward), adj(dyn, 0.05, Direction::Adjoint);
  Rng rng(6);
  EvaluatedPoint y = evaluate(t, vec({0, -1.2}));
  double zp = 1.0;
  int rejections = 0;
  for (int i = 0; i < 5000; ++i) {
    const auto r = imalaStep(y, zp, t, fwd, adj, rng);
    EXPECT_NE(r.accepted, r.flipped);
    EXPECT_EQ(r.zp, r.accepted ? zp : -zp);
    if (!r.accepted) {
      EXPECT_EQ(r.point.z, y.z);
      ++rejections;
    }
    y = r.point;
    zp = r.zp;
  }
  EXPECT_GT(rejections, 0);
  Rng other(1);
  EXPECT_THROW(imalaStep(y.z, 0.5, t, dyn, 0.05, other), std::invalid_argument);
}

TEST(ImalaStep, AcceptanceApproachesOneAsStepShrinks) {
  const auto t = stdNormalTarget(2);
  const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation());
  const OneStepKernel fwd(dyn, 1e-4, Direction::Forward), adj(dyn, 1e-4, Direction::Adjoint);
  Rng rng(7);
  EvaluatedPoint y = evaluate(t, rng.normalVector(2));
  double zp = 1.0, total = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto r = imalaStep(y, zp, t, fwd, adj, rng);
    total += r.alpha;
    y = r.point;
    zp = r.zp;
  }
  EXPECT_GE(total / 10000, 0.995);
}

TEST(ImalaStep, ForwardAdjointDiscrepancyVanishesToFirstOrder) {
  const auto t = stdNormalTarget(2);
  const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation());
  auto discrepancy = [&](double eps) {
    const OneStepKernel fwd(dyn, eps, Direction::Forward), adj(dyn, eps, Direction::Adjoint);
    Rng rng(8);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto y = evaluate(t, rng.normalVector(2));
      const auto z = evaluate(t, fwd.sample(y, rng));
      sum += std::abs((-y.potential + fwd.logDensity(z.z, y)) - (-z.potential + adj.logDensity(y.z, z)));
    }
    return sum / n;
  };
  for (double eps : {0.1, 0.01, 0.001}) EXPECT_LE(discrepancy(eps / 2), 0.6 * discrepancy(eps)) << eps;
}

TEST(NaiveMhAlpha, ZeroSkewEqualsMala) {
  const auto t = stdNormalTarget(2);
  const auto dyn = langevinDynamics(2);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto y = rng.normalVector(2);
    const auto z = rng.normalVector(2);
    const Eigen::MatrixXd zero = Eigen::Matrix2d::Zero();
    const double oracle = t.potential(y) - t.potential(z) + kernelLogPdf(y, z, 0.1, zero) - kernelLogPdf(z, y, 0.1, zero);
    EXPECT_NEAR(naiveMhAlphaWithForwardKernel(y, z, t, dyn, 0.1), std::min(1.0, std::exp(oracle)), 1e-12);
  }
}

TEST(NaiveMhAlpha, DegradesWithSkewStrengthAndTrailsImala) {
  const auto t = stdNormalTarget(2);
  const double eps = 1e-3;
  std::vector<double> naive_means;
  for (double c : {0.0, 1.0, 2.0}) {
    const auto dyn = constantDynamics(Eigen::Matrix2d::Identity(), rotation(c));
    const OneStepKernel fwd(dyn, eps, Direction::Forward), adj(dyn, eps, Direction::Adjoint);
    Rng rng(10);
    double naive = 0.0, lifted = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const auto y = evaluate(t, rng.normalVector(2));
      const auto z = evaluate(t, fwd.sample(y, rng));
      naive += naiveMhAlphaWithForwardKernel(y, z, fwd);
      lifted += imalaAlpha(y, z, 1.0, fwd, adj);
    }
    naive_means.push_back(naive / n);
    if (c > 0.0) EXPECT_LT(naive / n, lifted / n) << "c = " << c;
  }
  EXPECT_GE(naive_means[0], naive_means[1]);
  EXPECT_GE(naive_means[1], naive_means[2]);
}

TEST(HmcStep, AcceptanceTendsToOneAsStepShrinks) {
  const auto t = stdNormalTarget(3);
  const Eigen::MatrixXd minv = Eigen::MatrixXd::Identity(3, 3);
  double previous = 0.0;
  for (double eps : {0.5, 0.1, 0.01}) {
    Rng rng(11);
    const HamiltonianKernel k(minv, eps, 10);
    EvaluatedPoint p = evaluate(t, rng.normalVector(3));
    double total = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const auto r = k.step(p, t, rng);
      total += r.alpha;
      p = r.point;
    }
    EXPECT_GT(total / 2000, previous);
    previous = total / 2000;
  }
  EXPECT_GE(previous, 0.999);
}

TEST(HmcStep, DefaultAndTunedAcceptance) {
  SamplerSpec s;
  s.kind = SamplerKind::HMC;
  EXPECT_EQ(s.leapfrog_steps, 10);
  s.eps = 0.15;
  const auto trace = runChain(s, logisticRegressionTarget(loadStatlogCsv(IRMC_TEST_DATA_DIR "/heart.dat", -1, true)),
                              6000, 1000, 12);
  EXPECT_GE(trace.acceptanceRate(), 0.8);
  EXPECT_LE(trace.acceptanceRate(), 0.9);
}

TEST(HmcStep, NonFiniteTrajectoryIsRejected) {
  const TargetDensity cliff(
      "cliff", 1, [](const Eigen::VectorXd& z) { return z[0] > 0.5 ? std::numeric_limits<double>::infinity() : 0.5 * z[0] * z[0]; },
      [](const Eigen::VectorXd& z) -> Eigen::VectorXd {
        return Eigen::VectorXd::Constant(1, z[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : z[0]);
      });
  Rng rng(13);
  const HamiltonianKernel k(Eigen::MatrixXd::Identity(1, 1), 0.5, 10);
  EvaluatedPoint p = evaluate(cliff, vec({0.4}));
  int rejected = 0;
  for (int i = 0; i < 200; ++i) {
    const auto r = k.step(p, cliff, rng);
    EXPECT_TRUE(std::isfinite(r.point.potential));
    rejected += !r.accepted;
    p = r.point;
  }
  EXPECT_GT(rejected, 0);
}

TEST(ImalaChain, ZeroSkewReproducesMalaTraceBitwise) {
  const auto t = moonTarget();
  SamplerSpec mala, imala;
  mala.kind = SamplerKind::MALA;
  imala.kind = SamplerKind::IMALA;
  mala.eps = imala.eps = 0.02;
  mala.dynamics = imala.dynamics = langevinDynamics(2);
  const auto a = runChain(mala, t, 20000, 0, 77);
  const auto b = runChain(imala, t, 20000, 0, 77);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.accepted, b.accepted);
}
