#include "mwlab/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "mwlab/ks.hpp"

namespace mwlab {

namespace {

std::string fmt_param(std::initializer_list<std::pair<const char*, double>> parts) {
  std::ostringstream os;
  os.precision(12);
  bool first = true;
  for (const auto& [name, value] : parts) {
    os << (first ? "" : ";") << name << '=' << value;
    first = false;
  }
  return os.str();
}

std::string yes_no(bool v) { return v ? "true" : "false"; }

}  // namespace

double VerificationReport::value(const std::string& parameter, const std::string& statistic) const {
  for (const auto& row : rows)
    if (row.parameter == parameter && row.statistic == statistic) return row.value;
  throw Error(ErrorKind::InvalidArgument, "no report row " + parameter + "/" + statistic);
}

VerificationReport marginal_gof(const ChainXd& chain, const ObservableXd& g, const KernelXd& kernel,
                                const DiffusionXd& D, Index start, Index n, Index n_paths,
                                std::span<const double> t_grid, std::uint64_t seed,
                                const GofOptions& options, const PartialSumTable<double>* T) {
  if (D.rank_m == 0)
    throw Error(ErrorKind::DegenerateD, "diffusion matrix has rank 0; use sup_decay_check");
  require(!t_grid.empty(), ErrorKind::InvalidArgument, "empty time grid");
  require(n >= 1 && n_paths >= 2, ErrorKind::InvalidArgument, "need n >= 1 and at least two paths");
  require(options.variant == PathVariant::Plain || T != nullptr, ErrorKind::InvalidArgument,
          "centered variant needs the partial sum table");

  ScaledPath grid_only;
  grid_only.n = n;
  std::vector<Index> checkpoints;
  std::vector<Index> index_of_t;
  for (double t : t_grid) {
    require(t > 0 && t <= 1, ErrorKind::InvalidArgument, "time grid must lie in (0, 1]");
    const Index k = grid_only.floor_index(t);
    require(k >= 1, ErrorKind::InvalidArgument, "time grid point below 1/n");
    index_of_t.push_back(k);
    checkpoints.push_back(k);
  }
  checkpoints.push_back(n);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  auto slot = [&](Index k) {
    return static_cast<std::size_t>(std::lower_bound(checkpoints.begin(), checkpoints.end(), k) -
                                    checkpoints.begin());
  };

  const auto summaries = summarize_paths(chain, g, kernel, nullptr, start, checkpoints, n_paths, seed,
                                         options.workers);

  const Index d = g.dim();
  const Index m = D.rank_m;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const MatrixXd whitener = (D.Lambda.transpose() * D.Lambda).ldlt().solve(D.Lambda.transpose());

  auto scaled_value = [&](const PathSummary& s, Index k) -> Eigen::RowVectorXd {
    Eigen::RowVectorXd v = s.S_at[slot(k)];
    if (options.variant == PathVariant::Centered) v -= (*T)[k].row(start);
    return v * scale;
  };

  VerificationReport report;
  report.test = "marginal_gof";
  report.seed = seed;
  report.n_paths = n_paths;
  report.starts = {start};
  report.note("variant", options.variant == PathVariant::Plain ? "plain" : "centered");
  report.note("surrogate", "finite-dimensional marginals; not the Prohorov distance");

  const double level = options.significance / static_cast<double>(m * static_cast<Index>(t_grid.size()));
  report.note("bonferroni_level", std::to_string(level));
  bool all_pass = true;
  double min_p = 1.0;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    const Index k = index_of_t[ti];
    MatrixXd z(n_paths, m);
    for (Index p = 0; p < n_paths; ++p)
      z.row(p) = (whitener * scaled_value(summaries[static_cast<std::size_t>(p)], k).transpose()).transpose() /
                 std::sqrt(t);
    for (Index c = 0; c < m; ++c) {
      std::vector<double> column(z.col(c).data(), z.col(c).data() + n_paths);
      const auto ks = ks_test_normal(std::move(column));
      const auto param = fmt_param({{"t", t}, {"component", static_cast<double>(c)}});
      report.add(param, "ks_statistic", ks.statistic);
      report.add(param, "p_value", ks.p_value);
      report.add(param, "pass", ks.p_value > level ? 1.0 : 0.0);
      all_pass = all_pass && ks.p_value > level;
      min_p = std::min(min_p, ks.p_value);
    }
  }
  report.note("min_p_value", std::to_string(min_p));

  MatrixXd endpoints(n_paths, d);
  for (Index p = 0; p < n_paths; ++p) endpoints.row(p) = scaled_value(summaries[static_cast<std::size_t>(p)], n);
  const Eigen::RowVectorXd mean = endpoints.colwise().mean();
  const MatrixXd centered = endpoints.rowwise() - mean;
  const auto N = static_cast<double>(n_paths);
  bool cov_pass = true;
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) {
      const VectorXd products = centered.col(i).cwiseProduct(centered.col(j));
      const double cov = products.sum() / (N - 1);
      const double var = (products.array() - products.mean()).square().sum() / (N - 1);
      const double se = std::sqrt(var / N);
      const bool ok = std::abs(cov - D.D(i, j)) <= options.covariance_bands * se;
      const auto param = fmt_param({{"i", static_cast<double>(i)}, {"j", static_cast<double>(j)}});
      report.add(param, "sample_cov", cov);
      report.add(param, "D", D.D(i, j));
      report.add(param, "std_error", se);
      report.add(param, "pass", ok ? 1.0 : 0.0);
      cov_pass = cov_pass && ok;
    }
  report.note("ks_pass", yes_no(all_pass));
  report.note("covariance_pass", yes_no(cov_pass));
  report.passed = all_pass && cov_pass;
  return report;
}

const char* to_string(DecayQuantity quantity) {
  switch (quantity) {
    case DecayQuantity::Remainder: return "R";
    case DecayQuantity::CenteredGap: return "centered_gap";
    case DecayQuantity::Path: return "S";
  }
  return "unknown";
}

VerificationReport sup_decay_check(std::span<const PathSummary> summaries, std::span<const Index> n_list,
                                   DecayQuantity quantity, const DecayOptions& options) {
  require(!summaries.empty() && !n_list.empty(), ErrorKind::InvalidArgument, "empty decay input");
  VerificationReport report;
  report.test = std::string("sup_decay_") + to_string(quantity);
  report.n_paths = static_cast<Index>(summaries.size());
  report.note("threshold_policy", "convergence thresholds are configuration, not derived");

  const double threshold = options.threshold;
  std::vector<double> quantiles;
  Index bound_violations = 0;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_list[i]));
    std::vector<double> stats;
    stats.reserve(summaries.size());
    for (const auto& s : summaries) {
      const std::vector<double>* source = nullptr;
      switch (quantity) {
        case DecayQuantity::Remainder: source = &s.max_R; break;
        case DecayQuantity::CenteredGap: source = &s.max_centered_gap; break;
        case DecayQuantity::Path: source = &s.max_S; break;
      }
      require(source->size() == n_list.size(), ErrorKind::InvalidArgument,
              "summaries do not match n_list (centered gap needs T)");
      const double stat = (*source)[i] * scale;
      stats.push_back(stat);
      if (options.pathwise_bound && stat > *options.pathwise_bound * scale * (1 + 1e-12)) ++bound_violations;
    }
    const double max_stat = *std::max_element(stats.begin(), stats.end());
    const double q = nearest_rank_quantile(stats, options.quantile);
    quantiles.push_back(q);
    const auto param = fmt_param({{"n", static_cast<double>(n_list[i])}});
    report.add(param, "quantile", q);
    report.add(param, "max", max_stat);
    if (options.pathwise_bound) report.add(param, "pathwise_bound", *options.pathwise_bound * scale);
  }
  bool decreasing = true;
  // An identically zero statistic (g = 0, or H = 0 with R = 0) counts as decreasing.
  for (std::size_t i = 1; i < quantiles.size(); ++i)
    decreasing = decreasing && (quantiles[i] < quantiles[i - 1] || (quantiles[i] == 0 && quantiles[i - 1] == 0));
  const bool below = quantiles.back() <= threshold;
  report.note("quantile_level", std::to_string(options.quantile));
  report.note("threshold", std::to_string(threshold));
  report.note("decreasing", yes_no(decreasing));
  report.note("below_threshold", yes_no(below));
  report.note("pathwise_bound_violations", std::to_string(bound_violations));
  report.passed = decreasing && below && bound_violations == 0;
  return report;
}

MatrixXd running_max_partial_sums(const PartialSumTable<double>& T, std::span<const Index> n_list) {
  require(!n_list.empty(), ErrorKind::InvalidArgument, "empty n_list");
  const Index states = T[0].rows();
  std::vector<Index> order(n_list.begin(), n_list.end());
  for (Index n : order)
    require(n >= 1 && n <= T.n_max, ErrorKind::InvalidArgument, "n outside partial sum table");
  const Index top = *std::max_element(order.begin(), order.end());
  // running[j] = max_{i<=j} |T_i(x)|
  MatrixXd running(states, top + 1);
  running.col(0).setZero();
  for (Index j = 1; j <= top; ++j) running.col(j) = running.col(j - 1).cwiseMax(T[j].rowwise().norm());
  MatrixXd out(states, static_cast<Index>(n_list.size()));
  for (std::size_t i = 0; i < n_list.size(); ++i) out.col(static_cast<Index>(i)) = running.col(n_list[i]);
  return out;
}

std::vector<double> default_lambda_grid(const PartialSumTable<double>& T, Index n_max, Index points) {
  require(points >= 2, ErrorKind::InvalidArgument, "lambda grid needs at least two points");
  const std::array<Index, 1> top{std::min(n_max, T.n_max)};
  double peak = running_max_partial_sums(T, top).maxCoeff();
  if (peak <= 0) peak = 1.0;
  const double lo = 0.01 * peak;
  const double hi = 2.0 * peak;
  std::vector<double> grid;
  for (Index i = 0; i < points; ++i)
    grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1)));
  return grid;
}

double growth_constant(const PartialSumTable<double>& T) {
  double c = 0;
  for (Index n = 1; n <= T.n_max; ++n) c = std::max(c, T.norm(n) * T.norm(n) / static_cast<double>(n));
  return c;
}

VerificationReport maximal_inequality_check(const ChainXd& chain, const PartialSumTable<double>& T,
                                            double C_hat, std::span<const Index> n_list,
                                            std::span<const double> lambda_grid,
                                            std::span<const int> k_list) {
  require(!lambda_grid.empty() && !k_list.empty(), ErrorKind::InvalidArgument, "empty sweep");
  VerificationReport report;
  report.test = "maximal_inequality";

  double C = C_hat;
  bool unmet = false;
  for (Index n = 1; n <= T.n_max; ++n)
    if (T.norm(n) * T.norm(n) > C * static_cast<double>(n) * (1 + 1e-12)) unmet = true;
  if (unmet) C = growth_constant(T);
  report.note("C_supplied", std::to_string(C_hat));
  report.note("C_used", std::to_string(C));
  report.note("hypothesis_unmet", yes_no(unmet));

  const MatrixXd maxima = running_max_partial_sums(T, n_list);
  const VectorXd& pi = chain.stationary();
  Index violations = 0;
  Index checked = 0;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const auto n = static_cast<double>(n_list[ni]);
    for (double lambda : lambda_grid) {
      require(lambda > 0, ErrorKind::InvalidArgument, "lambda must be positive");
      double lhs = 0;
      for (Index x = 0; x < pi.size(); ++x)
        if (maxima(x, static_cast<Index>(ni)) > lambda) lhs += pi(x);
      double best = std::numeric_limits<double>::infinity();
      int best_k = -1;
      for (int k : k_list) {
        require(k >= 0, ErrorKind::InvalidArgument, "k must be non-negative");
        const double rhs = std::ldexp(1.0, 6 * k) * C * std::pow(n, 1.0 + std::ldexp(1.0, -k)) / (lambda * lambda);
        const auto param = fmt_param({{"n", n}, {"lambda", lambda}, {"k", static_cast<double>(k)}});
        report.add(param, "lhs", lhs);
        report.add(param, "rhs", rhs);
        ++checked;
        if (lhs > rhs) ++violations;
        if (rhs < best) {
          best = rhs;
          best_k = k;
        }
      }
      const auto param = fmt_param({{"n", n}, {"lambda", lambda}});
      report.add(param, "corollary_bound", best);
      report.add(param, "corollary_beta", 1.0 + std::ldexp(1.0, -best_k));
    }
  }
  report.note("triples_checked", std::to_string(checked));
  report.note("violations", std::to_string(violations));
  report.passed = violations == 0;
  return report;
}

MatrixXd centered_drift_statistics(const PartialSumTable<double>& T, std::span<const Index> n_list) {
  MatrixXd stats = running_max_partial_sums(T, n_list);
  for (std::size_t i = 0; i < n_list.size(); ++i)
    stats.col(static_cast<Index>(i)) /= std::sqrt(static_cast<double>(n_list[i]));
  return stats;
}

VerificationReport centered_drift_check(const ChainXd& chain, const PartialSumTable<double>& T,
                                        std::span<const Index> n_list, const DriftOptions& options) {
  require(T[0].rows() == chain.n_states(), ErrorKind::InvalidArgument, "table does not match chain");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    require(n_list[i] > n_list[i - 1], ErrorKind::InvalidArgument, "n_list must be increasing");
  const MatrixXd stats = centered_drift_statistics(T, n_list);
  VerificationReport report;
  report.test = "centered_drift";
  report.note("threshold_policy", "convergence thresholds are configuration, not derived");
  bool pass = true;
  const Index last = static_cast<Index>(n_list.size()) - 1;
  for (Index x = 0; x < stats.rows(); ++x) {
    bool monotone = true;
    for (Index i = 0; i <= last; ++i) {
      report.add(fmt_param({{"state", static_cast<double>(x)}, {"n", static_cast<double>(n_list[static_cast<std::size_t>(i)])}}),
                 "statistic", stats(x, i));
      if (i > options.burn_in && stats(x, i) > stats(x, i - 1)) monotone = false;
    }
    const bool below = stats(x, last) <= options.threshold;
    report.add(fmt_param({{"state", static_cast<double>(x)}}), "pass", monotone && below ? 1.0 : 0.0);
    pass = pass && monotone && below;
  }
  report.note("threshold", std::to_string(options.threshold));
  report.passed = pass;
  return report;
}

Index ceil_snapped(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, std::abs(x))) return static_cast<Index>(nearest);
  return static_cast<Index>(std::ceil(x));
}

BlockSchedule make_schedule(Index r, double gamma, double beta, Index j, double alpha, double p) {
  require(r >= 1, ErrorKind::InvalidArgument, "r must be a positive integer");
  require(gamma > 0 && gamma < 1, ErrorKind::InvalidArgument, "gamma must lie in (0, 1)");
  require(beta > 1, ErrorKind::InvalidArgument, "beta must exceed 1");
  require(j >= 1, ErrorKind::InvalidArgument, "j must be positive");
  BlockSchedule s;
  s.r = r;
  s.gamma = gamma;
  s.beta = beta;
  s.j = j;
  Index n_j = 1;
  for (Index i = 0; i < r; ++i) n_j *= j;
  s.n_j = n_j;
  const auto nd = static_cast<double>(n_j);
  s.m_j = ceil_snapped(std::pow(nd, 1.0 - gamma));
  s.ell_j = ceil_snapped(std::pow(nd, gamma));
  const auto rd = static_cast<double>(r);
  s.endpoint_exponent = rd * (1.0 - 2.0 * gamma * alpha - (1.0 - gamma) * beta);
  s.increment_exponent = rd * (p / 2.0 - 1.0 - gamma * p);
  s.endpoint_summable = s.endpoint_exponent > 1.0;
  s.increment_summable = s.increment_exponent > 1.0;
  return s;
}

BlockDiagnostic block_decomposition_diagnostic(const PathTrace& trace, const BlockSchedule& schedule) {
  const Index n_j = schedule.n_j;
  const Index m = schedule.m_j;
  const Index ell = schedule.ell_j;
  require(trace.n >= m * ell && trace.n >= n_j, ErrorKind::InvalidArgument,
          "trace shorter than m_j * l_j");
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_j));
  BlockDiagnostic out;
  for (Index i = 0; i <= n_j; ++i) out.lhs = std::max(out.lhs, trace.R.row(i).norm());
  for (Index k = 0; k <= m; ++k) out.endpoint = std::max(out.endpoint, trace.R.row(k * ell).norm());
  for (Index k = 0; k < m; ++k)
    for (Index i = k * ell; i <= (k + 1) * ell; ++i) {
      out.martingale = std::max(out.martingale, (trace.M.row(i) - trace.M.row(k * ell)).norm());
      out.sum = std::max(out.sum, (trace.S.row(i) - trace.S.row(k * ell)).norm());
    }
  out.lhs *= scale;
  out.endpoint *= scale;
  out.martingale *= scale;
  out.sum *= scale;
  out.holds = out.lhs <= (out.endpoint + out.martingale + out.sum) * (1 + 1e-12);
  return out;
}

}  // namespace mwlab
