#pragma once

#include <vector>

#include "mwlab/types.hpp"

namespace mwlab {

double normal_cdf(double x);

/// P(sqrt(n) D_n > observed) for the one-sample Kolmogorov statistic, using
/// the asymptotic series with Stephens' finite-n correction.
double kolmogorov_pvalue(double statistic, Index n);

struct KsResult {
  double statistic = 0;
  double p_value = 1;
  Index n = 0;
  /// Number of distinct values after 1e-9 quantization.
  Index distinct = 0;
};

/// One-sample KS test against N(0, 1). Values equal on the 1e-9 grid are
/// treated as ties: the empirical CDF is compared with Phi at the midpoint of
/// each jump, so lattice-valued samples are not penalized for atom mass that
/// vanishes in the continuum limit. Without ties this is the usual
/// statistic less at most 1/(2n).
KsResult ks_test_normal(std::vector<double> sample);

/// Nearest-rank empirical quantile: the ceil(q n)-th order statistic.
double nearest_rank_quantile(std::vector<double> values, double q);

}  // namespace mwlab
