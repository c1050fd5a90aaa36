#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "irmc/dataset.hpp"
#include "irmc/errors.hpp"
#include "irmc/targets.hpp"
#include "support.hpp"

using namespace irmc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

LabeledDataset heart() { return loadStatlogCsv(test::dataDir() / "heart.dat", -1, true); }

}  // namespace

TEST(StdNormal, ValuesAndGradient) {
  const auto t = stdNormalTarget(2);
  EXPECT_EQ(t.potential(vec({0, 0})), 0.0);
  EXPECT_TRUE(t.gradient(vec({0, 0})).isZero());
  EXPECT_DOUBLE_EQ(t.potential(vec({1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(stdNormalTarget(1).gradient(vec({3}))[0], 3.0);
  EXPECT_THROW(stdNormalTarget(0), std::invalid_argument);
  EXPECT_THROW(t.potential(vec({1})), std::invalid_argument);
}

TEST(LogNormal, ValuesAndSupport) {
  const auto t = logNormalTarget();
  EXPECT_DOUBLE_EQ(t.potential(vec({1})), 0.0);
  EXPECT_NEAR(t.potential(vec({std::numbers::e})), 1.5, 1e-14);
  EXPECT_TRUE(std::isinf(t.potential(vec({-1}))));
  EXPECT_TRUE(std::isinf(t.potential(vec({0}))));
  EXPECT_FALSE(t.inSupport(vec({-1})));
}

TEST(Bimodal, Values) {
  EXPECT_DOUBLE_EQ(bimodalTarget(1.0).potential(vec({0, 0})), 2.0);
  EXPECT_DOUBLE_EQ(bimodalTarget(0.5).potential(vec({0, 0})), 0.5);
  for (double tau : {0.5, 1.0, 1.5}) EXPECT_DOUBLE_EQ(bimodalTarget(tau).gradient(vec({0, 1}))[1], 10.0);
  EXPECT_THROW(bimodalTarget(0.0), std::invalid_argument);
}

TEST(Bimodal, ExactlyTwoLocalMinimaAlongFirstAxis) {
  for (double tau : {0.5, 1.0, 1.5, 3.0}) {
    const auto t = bimodalTarget(tau);
    const int n = 20001;
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = t.potential(vec({-4.0 + 8.0 * i / (n - 1), 0.0}));
    int minima = 0;
    for (int i = 1; i + 1 < n; ++i) minima += h[i] < h[i - 1] && h[i] < h[i + 1];
    EXPECT_EQ(minima, 2) << "tau = " << tau;
  }
}

TEST(Moon, Values) {
  const auto t = moonTarget();
  EXPECT_NEAR(t.potential(vec({0, 0})), 11.52, 1e-12);
  EXPECT_DOUBLE_EQ(t.potential(vec({0, -1.2})), 0.0);
  EXPECT_DOUBLE_EQ(t.gradient(vec({0, 0}))[0], 0.0);
}

TEST(GaussianMixture, SingleUnitComponentIsStandardNormalPlusConstant) {
  const auto mix = gaussianMixtureTarget({MixtureComponent{vec({0, 0}), 1.0, 1.0}});
  const auto ref = stdNormalTarget(2);
  const double c = mix.potential(vec({0, 0})) - ref.potential(vec({0, 0}));
  EXPECT_NEAR(c, std::log(2.0 * std::numbers::pi), 1e-12);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const auto z = vec({nd(gen), nd(gen)});
    EXPECT_NEAR(mix.potential(z) - ref.potential(z), c, 1e-12);
  }
  EXPECT_TRUE(mix.gradient(vec({0, 0})).isZero(1e-15));
}

TEST(GaussianMixture, GradientTowardHeavierMode) {
  const auto sym = gaussianMixtureTarget({{vec({1, 0}), 0.5, 1.0}, {vec({-1, 0}), 0.5, 1.0}});
  EXPECT_TRUE(sym.gradient(vec({0, 0})).isZero(1e-15));
  const auto skewed = gaussianMixtureTarget({{vec({1, 0}), 0.9, 1.0}, {vec({-1, 0}), 0.1, 1.0}});
  const auto g = skewed.gradient(vec({0, 0}));
  // Independent evaluation: grad H = -sum_k r_k (m_k - z) / s^2 with responsibilities r.
  EXPECT_NEAR(g[0], -(0.9 * 1.0 + 0.1 * -1.0), 1e-12);
  EXPECT_NEAR(g[1], 0.0, 1e-15);
  EXPECT_LT(g[0], 0.0);  // descent direction -g points to +x, the heavier mode
  EXPECT_THROW(gaussianMixtureTarget({}), std::invalid_argument);
}

TEST(GaussianMixture, MultimodalPresetsAreValid) {
  for (bool c : {false, true}) {
    const auto comps = multimodalPreset(c);
    ASSERT_EQ(comps.size(), 20u);
    double w = 0.0;
    for (const auto& k : comps) w += k.weight;
    EXPECT_NEAR(w, 1.0, 1e-12);
    EXPECT_NO_THROW(gaussianMixtureTarget(comps));
  }
}

TEST(UniformBox, FlatInsideInfiniteOutside) {
  const auto t = uniformBoxTarget({{0, 1}, {-2, 2}});
  EXPECT_EQ(t.potential(vec({0.5, 0})), t.potential(vec({0.1, 1.9})));
  EXPECT_TRUE(std::isinf(t.potential(vec({1.5, 0}))));
  EXPECT_TRUE(t.gradient(vec({0.5, 0})).isZero());
}

TEST(Logistic, ScoreAtZeroWithoutPrior) {
  LabeledDataset d;
  d.design = Eigen::MatrixXd::Ones(1, 1);
  d.labels = vec({1});
  d.feature_names = {"intercept"};
  const auto t = logisticRegressionTarget(d, std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(t.gradient(vec({0}))[0], -0.5);
  EXPECT_NEAR(t.potential(vec({0})), std::log(2.0), 1e-15);
}

TEST(Logistic, PriorVanishesAtZero) {
  const auto data = heart();
  const auto with = logisticRegressionTarget(data, 100.0);
  const auto without = logisticRegressionTarget(data, std::numeric_limits<double>::infinity());
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(data.cols());
  EXPECT_DOUBLE_EQ(with.potential(zero), without.potential(zero));
  EXPECT_TRUE(with.gradient(zero).isApprox(without.gradient(zero)));
  EXPECT_THROW(logisticRegressionTarget(data, 0.0), std::invalid_argument);
  EXPECT_THROW(with.potential(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Logistic, PotentialIsConvex) {
  const auto t = logisticRegressionTarget(heart(), 100.0);
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd a(14), b(14);
    for (int j = 0; j < 14; ++j) a[j] = nd(gen), b[j] = nd(gen);
    EXPECT_LE(t.potential(0.5 * (a + b)), 0.5 * (t.potential(a) + t.potential(b)) + 1e-9);
  }
}

TEST(Gradients, MatchFiniteDifferencesOnEveryTarget) {
  std::vector<std::pair<TargetDensity, std::function<Eigen::VectorXd(std::mt19937_64&)>>> cases;
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  auto gauss = [nd](std::size_t d, double s) mutable {
    return [nd, d, s](std::mt19937_64& g) mutable {
      Eigen::VectorXd z(static_cast<Eigen::Index>(d));
      for (auto& x : z) x = s * nd(g);
      return z;
    };
  };
  cases.emplace_back(stdNormalTarget(3), gauss(3, 2.0));
  cases.emplace_back(logNormalTarget(), [ud](std::mt19937_64& g) mutable {
    Eigen::VectorXd z(1);
    z[0] = 0.05 + 5.0 * ud(g);
    return z;
  });
  cases.emplace_back(bimodalTarget(1.0), gauss(2, 1.5));
  cases.emplace_back(moonTarget(), gauss(2, 1.5));
  cases.emplace_back(gaussianMixtureTarget(multimodalPreset(false)), gauss(2, 4.0));
  cases.emplace_back(gaussianMixtureTarget(multimodalPreset(true)), gauss(2, 4.0));
  cases.emplace_back(uniformBoxTarget({{-1, 1}, {-1, 1}}), gauss(2, 0.3));
  cases.emplace_back(logisticRegressionTarget(heart(), 100.0), gauss(14, 0.3));
  cases.emplace_back(logisticRegressionTarget(loadStatlogCsv(test::dataDir() / "australian.dat", -1, true), 100.0),
                     gauss(15, 0.3));
  std::mt19937_64 gen(5);
  for (auto& [target, draw] : cases) {
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd z = draw(gen);
      if (!std::isfinite(target.potential(z))) continue;
      EXPECT_LE(test::gradientError(target, z), 1e-5) << target.name();
    }
  }
}

TEST(Dataset, ShapeAndIntercept) {
  std::istringstream in("1.0,2.0,0\n3.0,5.0,1\n4.0,1.0,1\n");
  const auto d = parseLabeledTable(in, -1, false);
  EXPECT_EQ(d.rows(), 3);
  EXPECT_EQ(d.cols(), 3);
  EXPECT_TRUE(d.design.col(0).isOnes());
  EXPECT_EQ(d.labels, vec({0, 1, 1}));
  EXPECT_DOUBLE_EQ(d.design(1, 2), 5.0);
}

TEST(Dataset, StandardizedColumnsHaveZeroMeanUnitVariance) {
  std::istringstream in("1 2 0\n3 5 1\n4 1 1\n7 0 0\n");
  const auto d = parseLabeledTable(in, 2, true);
  for (Eigen::Index j = 1; j < d.cols(); ++j) {
    const double m = d.design.col(j).mean();
    const double v = (d.design.col(j).array() - m).square().sum() / static_cast<double>(d.rows() - 1);
    EXPECT_NEAR(m, 0.0, 1e-14);
    EXPECT_NEAR(v, 1.0, 1e-12);
  }
}

TEST(Dataset, ConstantColumnWithStandardizeIsRejected) {
  std::istringstream in("1,2,0\n1,5,1\n1,1,1\n");
  EXPECT_THROW(parseLabeledTable(in, -1, true), ValidationError);
  std::istringstream raw("1,2,0\n1,5,1\n1,1,1\n");
  EXPECT_NO_THROW(parseLabeledTable(raw, -1, false));
}

TEST(Dataset, MalformedRowNamesLine) {
  std::istringstream in("1,2,0\n3,x,1\n");
  try {
    parseLabeledTable(in, -1, false, "t.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Dataset, NonBinaryLabelIsRejected) {
  std::istringstream in("1,2,0\n3,4,5\n");
  EXPECT_THROW(parseLabeledTable(in, -1, false), ValidationError);
}

TEST(Dataset, BundledStatlogDimensions) {
  EXPECT_EQ(heart().cols(), 14);
  EXPECT_EQ(heart().rows(), 270);
  const auto aus = loadStatlogCsv(test::dataDir() / "australian.dat", -1, true);
  EXPECT_EQ(aus.cols(), 15);
  EXPECT_EQ(aus.rows(), 690);
}
