#include "mwlab/ks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mwlab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_pvalue(double statistic, Index n) {
  require(n >= 1, ErrorKind::InvalidArgument, "KS p-value needs n >= 1");
  const double root_n = std::sqrt(static_cast<double>(n));
  const double lambda = (root_n + 0.12 + 0.11 / root_n) * statistic;
  if (lambda < 1e-3) return 1.0;
  double sum = 0;
  double sign = 1;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::vector<double> sample) {
  require(!sample.empty(), ErrorKind::InvalidArgument, "KS test on empty sample");
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<Index>(sample.size());
  const double inv_n = 1.0 / static_cast<double>(n);
  KsResult result;
  result.n = n;
  Index i = 0;
  while (i < n) {
    const long long key = std::llround(sample[static_cast<std::size_t>(i)] * 1e9);
    Index j = i;
    while (j < n && std::llround(sample[static_cast<std::size_t>(j)] * 1e9) == key) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) * inv_n;
    const double cdf = normal_cdf(static_cast<double>(key) * 1e-9);
    result.statistic = std::max(result.statistic, std::abs(mid - cdf));
    ++result.distinct;
    i = j;
  }
  result.p_value = kolmogorov_pvalue(result.statistic, n);
  return result;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  require(!values.empty(), ErrorKind::InvalidArgument, "quantile of empty sample");
  require(q > 0 && q <= 1, ErrorKind::InvalidArgument, "quantile level must lie in (0, 1]");
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  const std::size_t index = std::max<std::size_t>(rank, 1) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(index), values.end());
  return values[index];
}

}  // namespace mwlab
