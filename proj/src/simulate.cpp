#include "mwlab/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "mwlab/parallel.hpp"

namespace mwlab {

PathSampler::PathSampler(const ChainXd& chain) {
  const Index n = chain.n_states();
  cdf_.resize(static_cast<std::size_t>(n));
  targets_.resize(static_cast<std::size_t>(n));
  for (Index x = 0; x < n; ++x) {
    double running = 0;
    for (Index y = 0; y < n; ++y) {
      const double q = chain.transition()(x, y);
      if (q <= 0) continue;
      running += q;
      cdf_[static_cast<std::size_t>(x)].push_back(running);
      targets_[static_cast<std::size_t>(x)].push_back(y);
    }
  }
}

Index PathSampler::step(Index state, double u) const {
  const auto& cdf = cdf_[static_cast<std::size_t>(state)];
  const auto& targets = targets_[static_cast<std::size_t>(state)];
  // Row sums may fall short of 1 by rounding; such u land on the last move.
  const auto it = std::upper_bound(cdf.begin(), cdf.end() - 1, u);
  return targets[static_cast<std::size_t>(it - cdf.begin())];
}

std::vector<Index> PathSampler::sample(Index start, Index n, const CounterRng& rng,
                                       std::uint32_t path_id) const {
  require(start >= 0 && start < n_states(), ErrorKind::InvalidArgument, "start state out of range");
  require(n >= 0, ErrorKind::InvalidArgument, "path length must be non-negative");
  std::vector<Index> states(static_cast<std::size_t>(n + 1));
  states[0] = start;
  for (Index k = 0; k < n; ++k)
    states[static_cast<std::size_t>(k + 1)] =
        step(states[static_cast<std::size_t>(k)],
             rng.uniform(Stream::Transition, path_id, static_cast<std::uint64_t>(k)));
  return states;
}

std::vector<Index> sample_path(const ChainXd& chain, Index start, Index n, std::uint64_t seed,
                               std::uint32_t path_id) {
  return PathSampler(chain).sample(start, n, CounterRng(seed), path_id);
}

PathTrace path_functionals(std::span<const Index> states, const ObservableXd& g, const KernelXd& kernel,
                           const PartialSumTable<double>& T) {
  require(!states.empty(), ErrorKind::InvalidArgument, "empty state sequence");
  const Index n = static_cast<Index>(states.size()) - 1;
  require(T.n_max >= n, ErrorKind::InvalidArgument, "partial sum table shorter than path");
  const Index d = g.dim();
  PathTrace trace;
  trace.start = states[0];
  trace.n = n;
  trace.states.assign(states.begin(), states.end());
  trace.S = MatrixXd::Zero(n + 1, d);
  trace.M = MatrixXd::Zero(n + 1, d);
  for (Index k = 0; k < n; ++k) {
    const Index x = states[static_cast<std::size_t>(k)];
    const Index y = states[static_cast<std::size_t>(k + 1)];
    if (!kernel.defined(x, y))
      throw Error(ErrorKind::MissingEdge,
                  "kernel undefined on transition " + std::to_string(x) + " -> " + std::to_string(y));
    trace.S.row(k + 1) = trace.S.row(k) + g.values.row(x);
    trace.M.row(k + 1) = trace.M.row(k) + kernel(x, y);
  }
  trace.R = trace.S - trace.M;
  trace.S_tilde.resize(n + 1, d);
  for (Index k = 0; k <= n; ++k) trace.S_tilde.row(k) = trace.S.row(k) - T[k].row(trace.start);
  return trace;
}

Index ScaledPath::floor_index(double t) const {
  require(t >= 0 && t <= 1, ErrorKind::InvalidArgument, "scaled path time outside [0, 1]");
  const double nt = static_cast<double>(n) * t;
  auto k = static_cast<Index>(std::floor(nt));
  // n * t may round below an integer k + 1 even though t is the double
  // nearest to (k + 1) / n; compare on the time axis instead.
  if (k < n && static_cast<double>(k + 1) / static_cast<double>(n) <= t) ++k;
  return std::min(k, n);
}

ScaledPath scaled_path(const PathTrace& trace, PathVariant variant) {
  require(trace.n >= 1, ErrorKind::InvalidArgument, "scaled path needs n >= 1");
  ScaledPath path;
  path.n = trace.n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(trace.n));
  path.values = (variant == PathVariant::Plain ? trace.S : trace.S_tilde) * scale;
  return path;
}

BrownianPath sample_brownian(const MatrixXd& Lambda, std::span<const double> grid, std::uint64_t seed,
                             std::uint32_t path_id) {
  double previous = 0;
  for (double t : grid) {
    require(t > previous && t <= 1, ErrorKind::InvalidArgument,
            "Brownian grid must be increasing in (0, 1]");
    previous = t;
  }
  const Index d = Lambda.rows();
  const Index m = Lambda.cols();
  const CounterRng rng(seed);
  BrownianPath path;
  path.times.reserve(grid.size() + 1);
  path.times.push_back(0.0);
  path.values = MatrixXd::Zero(static_cast<Index>(grid.size()) + 1, d);
  const auto blocks_per_step = static_cast<std::uint64_t>((m + 1) / 2);
  VectorXd increment(m);
  previous = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double dt = grid[i] - previous;
    for (Index j = 0; j < m; j += 2) {
      const auto z = rng.normal2(Stream::Brownian, path_id,
                                 i * blocks_per_step + static_cast<std::uint64_t>(j / 2));
      increment(j) = z[0];
      if (j + 1 < m) increment(j + 1) = z[1];
    }
    const auto row = static_cast<Index>(i);
    if (m > 0)
      path.values.row(row + 1) = path.values.row(row) + std::sqrt(dt) * (Lambda * increment).transpose();
    path.times.push_back(grid[i]);
    previous = grid[i];
  }
  return path;
}

PathSummary summarize_path(const PathSampler& sampler, const ObservableXd& g, const KernelXd& kernel,
                           const PartialSumTable<double>* T, Index start,
                           std::span<const Index> checkpoints, const CounterRng& rng,
                           std::uint32_t path_id) {
  require(!checkpoints.empty() && checkpoints.front() >= 1, ErrorKind::InvalidArgument,
          "checkpoints must be positive");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    require(checkpoints[i] > checkpoints[i - 1], ErrorKind::InvalidArgument,
            "checkpoints must be strictly increasing");
  require(start >= 0 && start < sampler.n_states(), ErrorKind::InvalidArgument,
          "start state out of range");
  const Index n = checkpoints.back();
  require(T == nullptr || T->n_max >= n, ErrorKind::InvalidArgument,
          "partial sum table shorter than path");
  const Index d = g.dim();

  PathSummary summary;
  summary.S_at.reserve(checkpoints.size());
  summary.M_at.reserve(checkpoints.size());
  summary.max_R.reserve(checkpoints.size());
  summary.max_S.reserve(checkpoints.size());
  if (T) summary.max_centered_gap.reserve(checkpoints.size());

  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(d);
  Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(d);
  double max_r = 0;
  double max_s = 0;
  double max_gap = 0;
  Index state = start;
  std::size_t next_checkpoint = 0;
  for (Index k = 0; k < n; ++k) {
    const Index next = sampler.step(state, rng.uniform(Stream::Transition, path_id, static_cast<std::uint64_t>(k)));
    if (!kernel.defined(state, next))
      throw Error(ErrorKind::MissingEdge, "kernel undefined on an observed transition");
    s += g.values.row(state);
    m += kernel(state, next);
    state = next;
    const Index step = k + 1;
    max_r = std::max(max_r, (s - m).norm());
    max_s = std::max(max_s, s.norm());
    if (T) max_gap = std::max(max_gap, (*T)[step].row(start).norm());
    if (step == checkpoints[next_checkpoint]) {
      summary.S_at.push_back(s);
      summary.M_at.push_back(m);
      summary.max_R.push_back(max_r);
      summary.max_S.push_back(max_s);
      if (T) summary.max_centered_gap.push_back(max_gap);
      ++next_checkpoint;
    }
  }
  return summary;
}

std::vector<PathSummary> summarize_paths(const ChainXd& chain, const ObservableXd& g,
                                         const KernelXd& kernel, const PartialSumTable<double>* T,
                                         Index start, std::span<const Index> checkpoints,
                                         Index n_paths, std::uint64_t seed, Index workers) {
  require(n_paths >= 1, ErrorKind::InvalidArgument, "need at least one path");
  const PathSampler sampler(chain);
  const CounterRng rng(seed);
  std::vector<PathSummary> summaries(static_cast<std::size_t>(n_paths));
  parallel_for(n_paths, workers, [&](Index i) {
    summaries[static_cast<std::size_t>(i)] =
        summarize_path(sampler, g, kernel, T, start, checkpoints, rng, static_cast<std::uint32_t>(i));
  });
  return summaries;
}

}  // namespace mwlab
