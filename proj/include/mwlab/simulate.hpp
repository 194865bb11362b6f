#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mwlab/chain.hpp"
#include "mwlab/decomposition.hpp"
#include "mwlab/random.hpp"
#include "mwlab/resolvent.hpp"

namespace mwlab {

/// Inverse-CDF transition sampler with cumulative rows precomputed.
class PathSampler {
 public:
  explicit PathSampler(const ChainXd& chain);

  Index n_states() const { return static_cast<Index>(cdf_.size()); }
  /// Smallest y with u < F(x, y), restricted to positive-probability moves.
  Index step(Index state, double u) const;
  /// X_0 = start; X_{k+1} drawn with the uniform addressed by (path_id, k).
  std::vector<Index> sample(Index start, Index n, const CounterRng& rng, std::uint32_t path_id) const;

 private:
  std::vector<std::vector<double>> cdf_;
  std::vector<std::vector<Index>> targets_;
};

std::vector<Index> sample_path(const ChainXd& chain, Index start, Index n, std::uint64_t seed,
                               std::uint32_t path_id = 0);

/// Cumulative functionals along one path, each (n + 1) x d with row k the
/// value after k steps: S_k = sum_{j<k} g(X_j), M_k = sum_{j<k} H(X_j, X_{j+1}),
/// R_k = S_k - M_k and S~_k = S_k - T_k(start).
struct PathTrace {
  Index start = 0;
  Index n = 0;
  std::vector<Index> states;
  MatrixXd S, M, R, S_tilde;
};

PathTrace path_functionals(std::span<const Index> states, const ObservableXd& g, const KernelXd& kernel,
                           const PartialSumTable<double>& T);

enum class PathVariant { Plain, Centered };

/// Right-continuous step function t -> n^{-1/2} S_{[nt]} on [0, 1].
struct ScaledPath {
  Index n = 0;
  MatrixXd values;  // row k = n^{-1/2} S_k

  /// [n t] for t in [0, 1], treating t as the exact value of the double.
  Index floor_index(double t) const;
  Eigen::RowVectorXd at(double t) const { return values.row(floor_index(t)); }
  VectorXd grid() const { return VectorXd::LinSpaced(n + 1, 0.0, 1.0); }
};

ScaledPath scaled_path(const PathTrace& trace, PathVariant variant);

/// W(t) = Lambda B(t) on a time grid; times[0] = 0 and values.row(0) = 0.
struct BrownianPath {
  std::vector<double> times;
  MatrixXd values;
};

BrownianPath sample_brownian(const MatrixXd& Lambda, std::span<const double> grid, std::uint64_t seed,
                             std::uint32_t path_id = 0);

/// Streaming per-path summary for long paths: values at checkpoints without
/// storing the trace.
struct PathSummary {
  std::vector<Eigen::RowVectorXd> S_at;  // S_n at each checkpoint
  std::vector<Eigen::RowVectorXd> M_at;
  std::vector<double> max_R;            // max_{k<=n} |R_k|
  std::vector<double> max_S;            // max_{k<=n} |S_k|
  std::vector<double> max_centered_gap;  // max_{k<=n} |S_k - S~_k|, when T is supplied
};

/// Simulates a path of length checkpoints.back() from `start`. Checkpoints
/// must be strictly increasing and positive.
PathSummary summarize_path(const PathSampler& sampler, const ObservableXd& g, const KernelXd& kernel,
                           const PartialSumTable<double>* T, Index start,
                           std::span<const Index> checkpoints, const CounterRng& rng,
                           std::uint32_t path_id);

/// Summaries for path ids 0..n_paths-1, computed on `workers` threads and
/// returned in path-id order.
std::vector<PathSummary> summarize_paths(const ChainXd& chain, const ObservableXd& g,
                                         const KernelXd& kernel, const PartialSumTable<double>* T,
                                         Index start, std::span<const Index> checkpoints,
                                         Index n_paths, std::uint64_t seed, Index workers);

}  // namespace mwlab
