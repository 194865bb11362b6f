#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mwlab/chain.hpp"
#include "mwlab/decomposition.hpp"
#include "mwlab/resolvent.hpp"
#include "mwlab/simulate.hpp"

namespace mwlab {

/// One row of a flat numeric table: (test, parameter, statistic, value).
struct ReportRow {
  std::string parameter;
  std::string statistic;
  double value = 0;
};

struct VerificationReport {
  std::string test;
  bool passed = false;
  /// Master seed of the Monte Carlo run; absent for exact checks.
  std::optional<std::uint64_t> seed;
  Index n_paths = 0;
  std::vector<Index> starts;
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, std::string>> notes;

  void add(std::string parameter, std::string statistic, double value) {
    rows.push_back({std::move(parameter), std::move(statistic), value});
  }
  void note(std::string key, std::string value) { notes.emplace_back(std::move(key), std::move(value)); }
  /// First row matching (parameter, statistic); throws if absent.
  double value(const std::string& parameter, const std::string& statistic) const;
};

// --- invariance principle surrogate -------------------------------------

struct GofOptions {
  double significance = 0.01;
  /// Half-width of the endpoint covariance band in standard errors.
  double covariance_bands = 3.0;
  PathVariant variant = PathVariant::Plain;
  Index workers = 1;
};

/// Finite-dimensional surrogate for weak convergence of the scaled path:
/// for each t in `t_grid` the whitened vector Lambda^+ B_n(t) / sqrt(t) is
/// KS-tested per component against N(0, 1) at Bonferroni level
/// significance / (rank * |t_grid|), and the sample covariance of B_n(1) is
/// compared with D entrywise. The centered variant needs `T`.
VerificationReport marginal_gof(const ChainXd& chain, const ObservableXd& g, const KernelXd& kernel,
                                const DiffusionXd& D, Index start, Index n, Index n_paths,
                                std::span<const double> t_grid, std::uint64_t seed,
                                const GofOptions& options = {},
                                const PartialSumTable<double>* T = nullptr);

// --- sup-norm decay ---------------------------------------------------------

enum class DecayQuantity {
  Remainder,    // max_{k<=n} |R_k|
  CenteredGap,  // max_{k<=n} |S_k - S~_k|
  Path,         // max_{k<=n} |S_k|, used when D has rank 0
};

const char* to_string(DecayQuantity quantity);

struct DecayOptions {
  double threshold = 0.05;
  double quantile = 0.95;
  /// When set, every path must satisfy statistic <= bound / sqrt(n).
  std::optional<double> pathwise_bound;
};

/// Empirical quantile of n^{-1/2} max_{k<=n} |quantity_k| across paths for
/// each n in `n_list` (the summaries' checkpoints). Passes iff the quantile is
/// strictly decreasing in n, is below the threshold at the largest n, and no
/// path exceeds the optional pathwise bound.
VerificationReport sup_decay_check(std::span<const PathSummary> summaries, std::span<const Index> n_list,
                                   DecayQuantity quantity, const DecayOptions& options = {});

// --- maximal inequality -----------------------------------------------------

/// max_{j<=n} |T_j(x)| per state; column i corresponds to n_list[i].
MatrixXd running_max_partial_sums(const PartialSumTable<double>& T, std::span<const Index> n_list);

/// 20-point (by default) geometric grid of thresholds spanning the range of
/// running maxima up to n_max.
std::vector<double> default_lambda_grid(const PartialSumTable<double>& T, Index n_max, Index points = 20);

/// Smallest C with ||T_n||_2^2 <= C n for all 1 <= n <= table.n_max.
double growth_constant(const PartialSumTable<double>& T);

/// Exact check of pi(max_{j<=n} |T_j| > lambda) <= 2^{6k} C n^{1+2^{-k}} / lambda^2
/// for every (n, lambda, k). If the supplied C fails ||T_n||^2 <= C n on the
/// table, it is replaced by growth_constant(T) and the report notes it.
/// Also reports, per (n, lambda), the tightest bound over the k sweep with
/// its exponent beta = 1 + 2^{-k}.
VerificationReport maximal_inequality_check(const ChainXd& chain, const PartialSumTable<double>& T,
                                            double C_hat, std::span<const Index> n_list,
                                            std::span<const double> lambda_grid,
                                            std::span<const int> k_list);

// --- centered functional ------------------------------------------------------

/// n^{-1/2} max_{k<=n} |T_k(x)| per state (rows) and n (columns).
MatrixXd centered_drift_statistics(const PartialSumTable<double>& T, std::span<const Index> n_list);

struct DriftOptions {
  double threshold = 0.05;
  /// Leading entries of n_list exempt from the monotonicity requirement.
  Index burn_in = 0;
};

VerificationReport centered_drift_check(const ChainXd& chain, const PartialSumTable<double>& T,
                                        std::span<const Index> n_list, const DriftOptions& options = {});

// --- block schedule -----------------------------------------------------------

struct BlockSchedule {
  Index r = 1;
  double gamma = 0.5;
  double beta = 1.0;
  Index j = 1;
  Index n_j = 1;
  Index m_j = 1;
  Index ell_j = 1;
  /// r (1 - 2 gamma alpha - (1 - gamma) beta) and r (p/2 - 1 - gamma p);
  /// each term of the block bound is summable in j when its exponent exceeds 1.
  double endpoint_exponent = 0;
  double increment_exponent = 0;
  bool endpoint_summable = false;
  bool increment_summable = false;
};

/// Smallest integer not below x; values within 1e-12 relative of an integer
/// snap to it so that e.g. 9^{1/2} gives 3.
Index ceil_snapped(double x);

BlockSchedule make_schedule(Index r, double gamma, double beta, Index j, double alpha, double p);

struct BlockDiagnostic {
  double lhs = 0;        // n_j^{-1/2} max_{i<=n_j} |R_i|
  double endpoint = 0;   // n_j^{-1/2} max_{0<=k<=m_j} |R_{k l_j}|
  double martingale = 0; // n_j^{-1/2} max_k max_{k l_j<=i<=(k+1) l_j} |M_i - M_{k l_j}|
  double sum = 0;        // same for S
  bool holds = false;
};

/// Evaluates the three-term block bound on an actual path. Needs the trace to
/// reach index m_j l_j.
BlockDiagnostic block_decomposition_diagnostic(const PathTrace& trace, const BlockSchedule& schedule);

}  // namespace mwlab
