#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include "mwlab/types.hpp"

namespace mwlab {

struct ChainTolerances {
  double stochastic = 1e-12;
  double stationary = 1e-10;
  // Power-iteration cross-check of the linear-solve stationary vector.
  double crosscheck = 1e-8;
  Index max_power_iterations = 200000;
};

template <typename Scalar>
class FiniteChain;

template <typename Derived>
FiniteChain<typename Derived::Scalar> validate_chain(const Eigen::MatrixBase<Derived>& q,
                                                     const ChainTolerances& tol = {});

/// Irreducible finite-state chain with its stationary distribution. Only
/// obtainable through validate_chain, so every instance satisfies the
/// stochasticity, irreducibility and stationarity invariants.
template <typename Scalar>
class FiniteChain {
 public:
  Index n_states() const { return q_.rows(); }
  const Matrix<Scalar>& transition() const { return q_; }
  const Vector<Scalar>& stationary() const { return pi_; }
  /// Period of the support graph; 1 for aperiodic chains.
  Index period() const { return period_; }
  bool periodic() const { return period_ > 1; }
  /// Sup-norm gap between the linear-solve and damped power-iteration
  /// stationary vectors (negative when power iteration did not converge).
  Scalar crosscheck_gap() const { return crosscheck_gap_; }

  template <typename Derived>
  friend FiniteChain<typename Derived::Scalar> validate_chain(const Eigen::MatrixBase<Derived>&,
                                                              const ChainTolerances&);

 private:
  FiniteChain() = default;

  Matrix<Scalar> q_;
  Vector<Scalar> pi_;
  Index period_ = 1;
  Scalar crosscheck_gap_ = 0;
};

using ChainXd = FiniteChain<double>;

namespace detail {

inline std::vector<std::vector<Index>> support_graph(const auto& q, bool reversed) {
  const Index n = q.rows();
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (q(x, y) > 0) adj[static_cast<std::size_t>(reversed ? y : x)].push_back(reversed ? x : y);
  return adj;
}

inline std::vector<Index> bfs_levels(const std::vector<std::vector<Index>>& adj, Index root) {
  std::vector<Index> level(adj.size(), -1);
  std::queue<Index> frontier;
  level[static_cast<std::size_t>(root)] = 0;
  frontier.push(root);
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v : adj[static_cast<std::size_t>(u)]) {
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return level;
}

}  // namespace detail

/// Validates a transition matrix and computes its stationary distribution.
///
/// Irreducibility is established by forward and backward breadth-first search
/// on the support graph; the period is the gcd of level differences across
/// support edges. The stationary vector comes from a direct solve of
/// (Q^T - I) pi = 0 with the last equation replaced by normalization, and is
/// cross-checked by power iteration on the damped kernel (I + Q) / 2.
template <typename Derived>
FiniteChain<typename Derived::Scalar> validate_chain(const Eigen::MatrixBase<Derived>& q,
                                                     const ChainTolerances& tol) {
  using Scalar = typename Derived::Scalar;
  using std::abs;

  require(q.rows() == q.cols() && q.rows() > 0, ErrorKind::InvalidArgument,
          "transition matrix must be square and non-empty");
  require(q.allFinite(), ErrorKind::InvalidArgument, "transition matrix has non-finite entries");
  const Index n = q.rows();
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y)
      require(q(x, y) >= 0, ErrorKind::NotStochastic,
              "negative entry at (" + std::to_string(x) + "," + std::to_string(y) + ")");
    const Scalar row_sum = q.row(x).sum();
    require(abs(row_sum - Scalar(1)) <= Scalar(tol.stochastic), ErrorKind::NotStochastic,
            "row " + std::to_string(x) + " sums to " + std::to_string(static_cast<double>(row_sum)));
  }

  const auto forward = detail::support_graph(q, false);
  const auto backward = detail::support_graph(q, true);
  const auto level = detail::bfs_levels(forward, 0);
  const auto back_level = detail::bfs_levels(backward, 0);
  for (Index x = 0; x < n; ++x)
    require(level[static_cast<std::size_t>(x)] >= 0 && back_level[static_cast<std::size_t>(x)] >= 0,
            ErrorKind::Reducible,
            "support graph is not strongly connected (state " + std::to_string(x) + ")");

  FiniteChain<Scalar> chain;
  chain.q_ = q;

  Index period = 0;
  for (Index x = 0; x < n; ++x)
    for (Index y : forward[static_cast<std::size_t>(x)]) {
      const Index diff = level[static_cast<std::size_t>(x)] + 1 - level[static_cast<std::size_t>(y)];
      period = std::gcd(period, diff < 0 ? -diff : diff);
    }
  chain.period_ = period == 0 ? 1 : period;

  Matrix<Scalar> a = q.transpose() - Matrix<Scalar>::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector<Scalar> rhs = Vector<Scalar>::Zero(n);
  rhs(n - 1) = 1;
  Vector<Scalar> pi = a.fullPivLu().solve(rhs);
  require(pi.allFinite(), ErrorKind::SolveFailure, "stationary solve produced non-finite values");
  pi = pi.cwiseMax(Scalar(0));
  pi /= pi.sum();

  Vector<Scalar> power = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  const Matrix<Scalar> damped_t = (q.transpose() + Matrix<Scalar>::Identity(n, n)) / Scalar(2);
  bool converged = false;
  for (Index it = 0; it < tol.max_power_iterations; ++it) {
    Vector<Scalar> next = damped_t * power;
    const Scalar step = (next - power).cwiseAbs().maxCoeff();
    power = next;
    if (step <= Scalar(1e-15)) {
      converged = true;
      break;
    }
  }
  if (converged) {
    chain.crosscheck_gap_ = (power - pi).cwiseAbs().maxCoeff();
    require(chain.crosscheck_gap_ <= Scalar(tol.crosscheck), ErrorKind::SolveFailure,
            "stationary vector disagrees with power iteration");
  } else {
    chain.crosscheck_gap_ = Scalar(-1);
  }

  const Scalar stationarity = (pi.transpose() * q - pi.transpose()).cwiseAbs().maxCoeff();
  require(stationarity <= Scalar(tol.stationary), ErrorKind::SolveFailure,
          "stationary residual " + std::to_string(static_cast<double>(stationarity)));
  chain.pi_ = std::move(pi);
  return chain;
}

/// An R^d-valued function on the states, one row per state, with zero
/// pi-mean. `p_exponent` is the declared moment order and is informational on
/// finite chains.
template <typename Scalar>
struct Observable {
  Matrix<Scalar> values;
  double p_exponent = 4.0;

  Index dim() const { return values.cols(); }
  Index n_states() const { return values.rows(); }
};

using ObservableXd = Observable<double>;

/// pi(x) Q(x, y): the law of (X_0, X_1) under the stationary chain.
template <typename Scalar>
Matrix<Scalar> edge_measure(const FiniteChain<Scalar>& chain) {
  return chain.stationary().asDiagonal() * chain.transition();
}

/// Subtracts the pi-mean of each column.
template <typename Scalar, typename Derived>
Observable<Scalar> center_observable(const Eigen::MatrixBase<Derived>& raw,
                                     const FiniteChain<Scalar>& chain, double p_exponent = 4.0) {
  require(raw.rows() == chain.n_states() && raw.cols() > 0, ErrorKind::InvalidArgument,
          "observable must have one row per state and at least one column");
  const RowVector<Scalar> mean = chain.stationary().transpose() * raw.template cast<Scalar>();
  Observable<Scalar> g;
  g.values = raw.template cast<Scalar>().rowwise() - mean;
  g.p_exponent = p_exponent;
  return g;
}

/// Wraps already-centered values, checking the zero-mean invariant.
template <typename Scalar, typename Derived>
Observable<Scalar> make_observable(const Eigen::MatrixBase<Derived>& values,
                                   const FiniteChain<Scalar>& chain, double p_exponent = 4.0,
                                   double tol = 1e-10) {
  require(values.rows() == chain.n_states() && values.cols() > 0, ErrorKind::InvalidArgument,
          "observable must have one row per state and at least one column");
  const RowVector<Scalar> mean = chain.stationary().transpose() * values.template cast<Scalar>();
  require(mean.cwiseAbs().maxCoeff() <= Scalar(tol), ErrorKind::InvalidArgument,
          "observable is not pi-centered");
  return Observable<Scalar>{values.template cast<Scalar>(), p_exponent};
}

/// (sum_x pi(x) |f(x)|^2)^{1/2} for a per-state table of d-vectors.
template <typename Scalar, typename Derived>
Scalar l2_pi_norm(const FiniteChain<Scalar>& chain, const Eigen::MatrixBase<Derived>& f) {
  using std::sqrt;
  return sqrt(chain.stationary().dot(f.rowwise().squaredNorm()));
}

/// Q^power by binary exponentiation.
template <typename Scalar>
Matrix<Scalar> transition_power(const FiniteChain<Scalar>& chain, Index power) {
  require(power >= 0, ErrorKind::InvalidArgument, "negative matrix power");
  const Index n = chain.n_states();
  Matrix<Scalar> result = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar> base = chain.transition();
  while (power > 0) {
    if (power & 1) result = result * base;
    power >>= 1;
    if (power > 0) base = base * base;
  }
  return result;
}

}  // namespace mwlab
