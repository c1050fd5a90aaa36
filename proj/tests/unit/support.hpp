#pragma once

#include <cmath>
#include <filesystem>

#include <Eigen/Core>

#include "irmc/targets.hpp"

namespace irmc::test {

inline std::filesystem::path dataDir() { return IRMC_TEST_DATA_DIR; }

/// Central-difference gradient with step 1e-6 (1 + |z_i|).
inline Eigen::VectorXd finiteDifferenceGradient(const TargetDensity& t, const Eigen::VectorXd& z) {
  Eigen::VectorXd g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(z[i]));
    Eigen::VectorXd a = z, b = z;
    a[i] += h;
    b[i] -= h;
    g[i] = (t.potential(a) - t.potential(b)) / (2.0 * h);
  }
  return g;
}

inline double gradientError(const TargetDensity& t, const Eigen::VectorXd& z) {
  const Eigen::VectorXd g = t.gradient(z);
  return (g - finiteDifferenceGradient(t, z)).norm() / (1.0 + g.norm());
}

}  // namespace irmc::test
