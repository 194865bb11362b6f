#include <gtest/gtest.h>

#include "mwlab/oracle.hpp"
#include "support.hpp"

namespace mwlab {
namespace {

TEST(Enumerate, IidPlusMinusOneThreeSteps) {
  const auto chain = validate_chain(testing::iid_transition(Eigen::Vector2d(0.5, 0.5)));
  const auto g = make_observable(testing::plus_minus_one(), chain);
  const auto kernel = limit_kernel(chain, g);
  const auto dist = enumerate_paths(chain, g, kernel, 0, 3);
  EXPECT_EQ(dist.paths_enumerated, 8);
  // S_3 = 1 + g(X_1) + g(X_2) and R_3 = 1 - g(X_3), independent.
  ASSERT_EQ(dist.atoms.size(), 6u);
  EXPECT_NEAR(dist.total_probability(), 1.0, 1e-15);
  for (const auto& atom : dist.atoms) {
    const double s = atom.S(0);
    const double expected = (std::abs(s - 1) < 1e-9 ? 0.5 : 0.25) * 0.5;
    EXPECT_NEAR(atom.probability, expected, 1e-15) << s;
    EXPECT_NEAR(atom.R(0), atom.S(0) - atom.M(0), 1e-12);
  }
  const auto mom = exact_moments(dist);
  EXPECT_NEAR(mom.mean_S(0), 1.0, 1e-15);
  EXPECT_NEAR(mom.mean_M(0), 0.0, 1e-15);
  EXPECT_NEAR(mom.cov_S(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(mom.mean_R_squared, 2.0, 1e-14);
}

TEST(Enumerate, RespectsBudget) {
  const auto chain = validate_chain(testing::reference_transition());
  const auto g = center_observable(testing::reference_values(), chain);
  const auto kernel = poisson_kernel(chain, g);
  try {
    enumerate_paths(chain, g, kernel, 0, 10, 1000);
    FAIL() << "expected TooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
  }
  EXPECT_THROW(enumerate_paths(chain, g, kernel, 3, 2), Error);
}

TEST(Enumerate, SkipsZeroProbabilityPaths) {
  const auto chain = validate_chain(testing::alternating_transition());
  const auto g = make_observable(testing::plus_minus_one(), chain);
  const auto dist = enumerate_paths(chain, g, limit_kernel(chain, g), 1, 5);
  EXPECT_EQ(dist.paths_enumerated, 1);
  ASSERT_EQ(dist.atoms.size(), 1u);
  EXPECT_EQ(dist.atoms[0].probability, 1.0);
  EXPECT_EQ(dist.atoms[0].S(0), -1.0);
}

TEST(Oracle, MomentsAgreeWithMatrixFormulas) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    const auto chain = validate_chain(testing::random_transition(rng, 3));
    const auto g = center_observable(testing::random_values(rng, 3, 2), chain);
    const auto kernel = limit_kernel(chain, g);
    const auto D = diffusion_matrix(chain, kernel);
    const Index n = 5;
    double r2 = 0;
    MatrixXd second_S = MatrixXd::Zero(2, 2);
    MatrixXd mm = MatrixXd::Zero(2, 2);
    for (Index x = 0; x < 3; ++x) {
      const double w = chain.stationary()(x);
      const auto mom = exact_moments(enumerate_paths(chain, g, kernel, x, n));
      r2 += w * mom.mean_R_squared;
      second_S += w * (mom.cov_S + mom.mean_S.transpose() * mom.mean_S);
      EXPECT_LE(mom.mean_M.cwiseAbs().maxCoeff(), 1e-12);
      mm += w * exact_moments(enumerate_paths(chain, g, kernel, x, 1)).second_M;
    }
    EXPECT_NEAR(r2, remainder_second_moment(chain, g, n), 1e-10);
    EXPECT_LE((second_S - exact_Sn_covariance(chain, g, n)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((mm - D.D).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Oracle, CovarianceRateOfIidChainIsExact) {
  const Eigen::Vector3d pi(0.2, 0.3, 0.5);
  const auto chain = validate_chain(testing::iid_transition(pi));
  const auto g = center_observable(MatrixXd(Eigen::Vector3d(1, 2, -1)), chain);
  const MatrixXd cov = g.values.transpose() * pi.asDiagonal() * g.values;
  EXPECT_NEAR(exact_Sn_covariance(chain, g, 50)(0, 0) / 50, cov(0, 0), 1e-12);
}

TEST(Oracle, EnumerationIsDeterministic) {
  const auto chain = validate_chain(testing::reference_transition());
  const auto g = center_observable(testing::reference_values(), chain);
  const auto kernel = poisson_kernel(chain, g);
  const auto a = enumerate_paths(chain, g, kernel, 2, 6);
  const auto b = enumerate_paths(chain, g, kernel, 2, 6);
  ASSERT_EQ(a.atoms.size(), b.atoms.size());
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    EXPECT_EQ(a.atoms[i].probability, b.atoms[i].probability);
    EXPECT_EQ(a.atoms[i].S, b.atoms[i].S);
  }
}

}  // namespace
}  // namespace mwlab
