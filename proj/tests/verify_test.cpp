#include <gtest/gtest.h>

#include "mwlab/verify.hpp"
#include "support.hpp"

namespace mwlab {
namespace {

struct Fixture {
  ChainXd chain;
  ObservableXd g;
  KernelXd kernel;
  DiffusionXd D;

  explicit Fixture(const MatrixXd& q, const MatrixXd& raw)
      : chain(validate_chain(q)),
        g(center_observable(raw, chain)),
        kernel(limit_kernel(chain, g)),
        D(diffusion_matrix(chain, kernel)) {}
};

Fixture iid() { return Fixture(testing::iid_transition(Eigen::Vector2d(0.5, 0.5)), testing::plus_minus_one()); }

TEST(MarginalGof, IidChainPassesWithExpectedRows) {
  const auto s = iid();
  const std::vector<double> t_grid{0.25, 0.5, 1.0};
  const auto r = marginal_gof(s.chain, s.g, s.kernel, s.D, 0, 1024, 1000, t_grid, 17);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.seed, 17u);
  EXPECT_EQ(r.n_paths, 1000);
  EXPECT_GE(r.value("t=0.25;component=0", "p_value"), 0.01 / 3);
  EXPECT_NEAR(r.value("i=0;j=0", "D"), 1.0, 1e-12);
  EXPECT_NEAR(r.value("i=0;j=0", "sample_cov"), 1.0, 3 * r.value("i=0;j=0", "std_error"));
}

TEST(MarginalGof, DetectsWrongDiffusionMatrix) {
  auto s = iid();
  s.D.D *= 4;
  s.D.Lambda *= 2;
  const std::vector<double> t_grid{0.5, 1.0};
  const auto r = marginal_gof(s.chain, s.g, s.kernel, s.D, 0, 256, 2000, t_grid, 3);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.value("i=0;j=0", "pass"), 0.0);
  EXPECT_LT(r.value("t=1;component=0", "p_value"), 1e-6);
}

TEST(MarginalGof, ReferenceChainCenteredVariant) {
  const Fixture s(testing::reference_transition(), testing::reference_values());
  const auto T = partial_sums(s.chain, s.g, 512);
  const std::vector<double> t_grid{0.5, 1.0};
  GofOptions options;
  options.variant = PathVariant::Centered;
  options.workers = 3;
  const auto r = marginal_gof(s.chain, s.g, s.kernel, s.D, 1, 512, 800, t_grid, 99, options, &T);
  EXPECT_TRUE(r.passed);
  EXPECT_THROW(marginal_gof(s.chain, s.g, s.kernel, s.D, 1, 512, 800, t_grid, 99, options), Error);
}

TEST(MarginalGof, RankZeroIsRejected) {
  const Fixture s(testing::alternating_transition(), testing::plus_minus_one());
  const std::vector<double> t_grid{1.0};
  try {
    marginal_gof(s.chain, s.g, s.kernel, s.D, 0, 64, 10, t_grid, 1);
    FAIL() << "expected DegenerateD";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateD);
  }
}

PathSummary summary_with(std::vector<double> max_r) {
  PathSummary s;
  s.max_R = max_r;
  s.max_S = max_r;
  return s;
}

TEST(SupDecay, PassesOnBoundedRemainder) {
  // max|R| bounded by 1 for every n gives quantiles 1/sqrt(n).
  const std::vector<Index> n_list{100, 10000};
  std::vector<PathSummary> summaries;
  for (int i = 0; i < 20; ++i) summaries.push_back(summary_with({0.5 + i / 40.0, 0.5 + i / 40.0}));
  DecayOptions options;
  options.pathwise_bound = 1.0;
  const auto r = sup_decay_check(summaries, n_list, DecayQuantity::Remainder, options);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.test, "sup_decay_R");
  EXPECT_NEAR(r.value("n=100", "quantile"), (0.5 + 18 / 40.0) / 10, 1e-15);
  EXPECT_NEAR(r.value("n=10000", "pathwise_bound"), 0.01, 1e-15);
}

TEST(SupDecay, FailsOnGrowthOrBoundViolation) {
  const std::vector<Index> n_list{100, 10000};
  std::vector<PathSummary> growing{summary_with({0.1, 100.0})};
  EXPECT_FALSE(sup_decay_check(growing, n_list, DecayQuantity::Remainder).passed);
  std::vector<PathSummary> high{summary_with({1.0, 1.5})};
  DecayOptions options;
  options.pathwise_bound = 1.2;
  const auto r = sup_decay_check(high, n_list, DecayQuantity::Path, options);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.test, "sup_decay_S");
}

TEST(SupDecay, ZeroStatisticPasses) {
  const std::vector<Index> n_list{10, 100, 1000};
  std::vector<PathSummary> zeros{summary_with({0, 0, 0})};
  EXPECT_TRUE(sup_decay_check(zeros, n_list, DecayQuantity::Remainder).passed);
}

TEST(SupDecay, CenteredGapNeedsTable) {
  const std::vector<Index> n_list{10};
  std::vector<PathSummary> s{summary_with({1})};
  EXPECT_THROW(sup_decay_check(s, n_list, DecayQuantity::CenteredGap), Error);
}

TEST(MaximalInequality, NoViolationsOnRandomChains) {
  std::mt19937_64 rng(21);
  std::vector<Index> n_list;
  for (Index n = 1; n <= 256; n *= 2) n_list.push_back(n);
  const std::vector<int> ks{0, 1, 2, 3};
  for (int trial = 0; trial < 5; ++trial) {
    const auto chain = validate_chain(testing::random_transition(rng, 4));
    const auto g = center_observable(testing::random_values(rng, 4, 2), chain);
    const auto T = partial_sums(chain, g, 256);
    const auto lambdas = default_lambda_grid(T, 256);
    ASSERT_EQ(lambdas.size(), 20u);
    const auto r = maximal_inequality_check(chain, T, growth_constant(T), n_list, lambdas, ks);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.rows.size(), n_list.size() * 20 * (2 * ks.size() + 2));
  }
}

TEST(MaximalInequality, ExactLeftSideOnAlternatingChain) {
  const auto chain = validate_chain(testing::alternating_transition());
  const auto g = make_observable(testing::plus_minus_one(), chain);
  const auto T = partial_sums(chain, g, 4);
  const std::vector<Index> n_list{1, 4};
  const std::vector<double> lambdas{0.5, 2.0};
  const std::vector<int> ks{0};
  const auto r = maximal_inequality_check(chain, T, 1.0, n_list, lambdas, ks);
  // |T_1(x)| = 1 for both states, so pi(max > 0.5) = 1 and pi(max > 2) = 0.
  EXPECT_EQ(r.value("n=1;lambda=0.5;k=0", "lhs"), 1.0);
  EXPECT_EQ(r.value("n=4;lambda=2;k=0", "lhs"), 0.0);
  EXPECT_NEAR(r.value("n=4;lambda=2;k=0", "rhs"), 1.0 * 16 / 4, 1e-15);
  EXPECT_NEAR(r.value("n=1;lambda=0.5", "corollary_beta"), 2.0, 1e-15);
}

TEST(MaximalInequality, RecomputesConstantWhenHypothesisFails) {
  const auto chain = validate_chain(testing::reference_transition());
  const auto g = center_observable(testing::reference_values(), chain);
  const auto T = partial_sums(chain, g, 64);
  const std::vector<Index> n_list{1, 64};
  const std::vector<double> lambdas{1.0};
  const std::vector<int> ks{0};
  const auto r = maximal_inequality_check(chain, T, 1e-6, n_list, lambdas, ks);
  bool noted = false;
  for (const auto& [key, value] : r.notes) noted = noted || (key == "hypothesis_unmet" && value == "true");
  EXPECT_TRUE(noted);
  EXPECT_TRUE(r.passed);
}

TEST(CenteredDrift, IidChainStatisticIsAbsG) {
  const auto chain = validate_chain(testing::iid_transition(Eigen::Vector3d(0.2, 0.3, 0.5)));
  const auto g = center_observable(MatrixXd(Eigen::Vector3d(1, -2, 0.5)), chain);
  const auto T = partial_sums(chain, g, 10000);
  const std::vector<Index> n_list{100, 10000};
  const MatrixXd stats = centered_drift_statistics(T, n_list);
  for (Index x = 0; x < 3; ++x) {
    EXPECT_NEAR(stats(x, 0), std::abs(g.values(x, 0)) / 10, 1e-12);
    EXPECT_NEAR(stats(x, 1), std::abs(g.values(x, 0)) / 100, 1e-12);
  }
  EXPECT_TRUE(centered_drift_check(chain, T, n_list).passed);
}

TEST(CenteredDrift, BurnInExemptsEarlyIncrease) {
  // Synthetic table with T_1 = 0 and T_k = 1/2 afterwards: the statistic rises
  // from n = 1 to n = 2, then decays.
  const auto chain = validate_chain(testing::iid_transition(Eigen::Vector2d(0.5, 0.5)));
  PartialSumTable<double> T;
  T.n_max = 10000;
  for (Index n = 0; n <= T.n_max; ++n) {
    T.sums.push_back(MatrixXd::Constant(2, 1, n >= 2 ? 0.5 : 0.0));
    T.norms.push_back(n >= 2 ? 0.5 : 0.0);
  }
  const std::vector<Index> n_list{1, 2, 10000};
  DriftOptions options;
  EXPECT_FALSE(centered_drift_check(chain, T, n_list, options).passed);
  options.burn_in = 1;
  const auto r = centered_drift_check(chain, T, n_list, options);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.value("state=1;n=2", "statistic"), 0.5 / std::sqrt(2.0), 1e-15);
}

TEST(Schedule, CeilSnapped) {
  EXPECT_EQ(ceil_snapped(std::pow(9.0, 0.5)), 3);
  EXPECT_EQ(ceil_snapped(3.0000000000001), 3);
  EXPECT_EQ(ceil_snapped(3.01), 4);
  EXPECT_EQ(ceil_snapped(std::pow(1000.0, 1.0 / 3.0)), 10);
}

TEST(Schedule, ExponentsFromWorkedExample) {
  const auto s = make_schedule(8, 0.1, 1.05, 2, 0.25, 4);
  EXPECT_EQ(s.n_j, 256);
  EXPECT_NEAR(s.endpoint_exponent, 0.04, 1e-12);
  EXPECT_NEAR(s.increment_exponent, 4.8, 1e-12);
  EXPECT_FALSE(s.endpoint_summable);
  EXPECT_TRUE(s.increment_summable);
  EXPECT_THROW(make_schedule(2, 1.0, 1.05, 2, 0.25, 4), Error);
  EXPECT_THROW(make_schedule(2, 0.5, 1.0, 2, 0.25, 4), Error);
}

TEST(Schedule, BlockDiagnosticOnAlternatingChain) {
  const auto chain = validate_chain(testing::alternating_transition());
  const auto g = make_observable(testing::plus_minus_one(), chain);
  const auto kernel = limit_kernel(chain, g);
  const auto T = partial_sums(chain, g, 9);
  const auto trace = path_functionals(sample_path(chain, 0, 9, 1), g, kernel, T);
  const auto s = make_schedule(2, 0.5, 1.05, 3, 0.25, 4);
  EXPECT_EQ(s.n_j, 9);
  EXPECT_EQ(s.m_j, 3);
  EXPECT_EQ(s.ell_j, 3);
  const auto d = block_decomposition_diagnostic(trace, s);
  EXPECT_NEAR(d.lhs, 1.0 / 3, 1e-15);
  EXPECT_NEAR(d.endpoint, 1.0 / 3, 1e-15);
  EXPECT_EQ(d.martingale, 0.0);
  EXPECT_NEAR(d.sum, 1.0 / 3, 1e-15);
  EXPECT_TRUE(d.holds);
}

TEST(Schedule, BlockBoundHoldsOnRandomPaths) {
  const auto chain = validate_chain(testing::reference_transition());
  const auto g = center_observable(testing::reference_values(), chain);
  const auto kernel = limit_kernel(chain, g);
  const auto T = partial_sums(chain, g, 2000);
  for (Index j = 2; j <= 6; ++j) {
    const auto s = make_schedule(3, 0.4, 1.05, j, 0.1, 4);
    const Index len = std::max(s.n_j, s.m_j * s.ell_j);
    for (std::uint32_t path = 0; path < 20; ++path) {
      const auto trace = path_functionals(sample_path(chain, 0, len, 4, path), g, kernel, T);
      EXPECT_TRUE(block_decomposition_diagnostic(trace, s).holds);
    }
  }
}

TEST(Schedule, DiagnosticNeedsLongEnoughTrace) {
  const auto chain = validate_chain(testing::alternating_transition());
  const auto g = make_observable(testing::plus_minus_one(), chain);
  const auto T = partial_sums(chain, g, 9);
  const auto trace = path_functionals(sample_path(chain, 0, 5, 1), g, limit_kernel(chain, g), T);
  EXPECT_THROW(block_decomposition_diagnostic(trace, make_schedule(2, 0.5, 1.05, 3, 0.25, 4)), Error);
}

}  // namespace
}  // namespace mwlab
