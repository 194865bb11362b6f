#pragma once

#include <cmath>
#include <future>
#include <map>
#include <vector>

#include "mwlab/chain.hpp"
#include "mwlab/decomposition.hpp"

namespace mwlab {

/// Exact joint law of (S_n, M_n, R_n) started from a fixed state.
template <typename Scalar>
struct ExactDistribution {
  struct Atom {
    Scalar probability{};
    RowVector<Scalar> S, M, R;
  };

  Index n = 0;
  Index start = 0;
  Index dim = 0;
  /// Paths with positive probability that were visited.
  Index paths_enumerated = 0;
  std::vector<Atom> atoms;

  Scalar total_probability() const {
    Scalar total = 0;
    for (const auto& atom : atoms) total += atom.probability;
    return total;
  }
};

namespace detail {

/// Atom key: S, M, R components rounded on a 1e-9 grid.
inline std::vector<long long> quantize(const auto& s, const auto& m, const auto& r) {
  std::vector<long long> key;
  key.reserve(static_cast<std::size_t>(3 * s.size()));
  for (const auto* part : {&s, &m, &r})
    for (Index i = 0; i < part->size(); ++i)
      key.push_back(std::llround(static_cast<double>((*part)(i)) * 1e9));
  return key;
}

template <typename Scalar>
using AtomMap = std::map<std::vector<long long>, typename ExactDistribution<Scalar>::Atom>;

template <typename Scalar>
void enumerate_from(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g,
                    const MartingaleKernel<Scalar>& kernel, Index state, Index steps_left,
                    Scalar probability, RowVector<Scalar> s, RowVector<Scalar> m,
                    AtomMap<Scalar>& atoms, Index& visited) {
  if (steps_left == 0) {
    RowVector<Scalar> r = s - m;
    auto key = quantize(s, m, r);
    auto [it, inserted] = atoms.try_emplace(std::move(key));
    if (inserted) {
      it->second.probability = probability;
      it->second.S = s;
      it->second.M = m;
      it->second.R = std::move(r);
    } else {
      it->second.probability += probability;
    }
    ++visited;
    return;
  }
  const Index n = chain.n_states();
  for (Index next = 0; next < n; ++next) {
    const Scalar q = chain.transition()(state, next);
    if (q <= 0) continue;
    enumerate_from(chain, g, kernel, next, steps_left - 1, probability * q,
                   RowVector<Scalar>(s + g.values.row(state)),
                   RowVector<Scalar>(m + kernel(state, next)), atoms, visited);
  }
}

}  // namespace detail

/// Exhaustive enumeration of all length-n paths from `start`. Each first-step
/// branch is enumerated on its own task and the branches are merged in state
/// order, so the result does not depend on scheduling.
template <typename Scalar>
ExactDistribution<Scalar> enumerate_paths(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g,
                                          const MartingaleKernel<Scalar>& kernel, Index start, Index n,
                                          double max_paths = 1e7) {
  const Index states = chain.n_states();
  require(start >= 0 && start < states, ErrorKind::InvalidArgument, "start state out of range");
  require(n >= 1, ErrorKind::InvalidArgument, "enumeration needs n >= 1");
  require(std::pow(static_cast<double>(states), static_cast<double>(n)) <= max_paths,
          ErrorKind::TooLarge, "states^n exceeds the enumeration budget");

  const Index d = g.dim();
  const RowVector<Scalar> s1 = g.values.row(start);
  std::vector<std::future<std::pair<detail::AtomMap<Scalar>, Index>>> branches;
  for (Index next = 0; next < states; ++next) {
    const Scalar q = chain.transition()(start, next);
    if (q <= 0) continue;
    branches.push_back(std::async(std::launch::async, [&, next, q] {
      detail::AtomMap<Scalar> atoms;
      Index visited = 0;
      detail::enumerate_from(chain, g, kernel, next, n - 1, q, s1,
                             RowVector<Scalar>(kernel(start, next)), atoms, visited);
      return std::make_pair(std::move(atoms), visited);
    }));
  }

  detail::AtomMap<Scalar> merged;
  ExactDistribution<Scalar> dist;
  dist.n = n;
  dist.start = start;
  dist.dim = d;
  for (auto& branch : branches) {
    auto [atoms, visited] = branch.get();
    dist.paths_enumerated += visited;
    for (auto& [key, atom] : atoms) {
      auto [it, inserted] = merged.try_emplace(key, atom);
      if (!inserted) it->second.probability += atom.probability;
    }
  }
  dist.atoms.reserve(merged.size());
  for (auto& [key, atom] : merged) dist.atoms.push_back(std::move(atom));
  return dist;
}

template <typename Scalar>
struct ExactMoments {
  RowVector<Scalar> mean_S;
  Matrix<Scalar> cov_S;
  RowVector<Scalar> mean_M;
  Scalar mean_R_squared{};
  /// E[M_n M_n^T].
  Matrix<Scalar> second_M;
};

template <typename Scalar>
ExactMoments<Scalar> exact_moments(const ExactDistribution<Scalar>& dist) {
  const Index d = dist.dim;
  ExactMoments<Scalar> mom;
  mom.mean_S = RowVector<Scalar>::Zero(d);
  mom.mean_M = RowVector<Scalar>::Zero(d);
  mom.cov_S = Matrix<Scalar>::Zero(d, d);
  mom.second_M = Matrix<Scalar>::Zero(d, d);
  for (const auto& atom : dist.atoms) {
    mom.mean_S += atom.probability * atom.S;
    mom.mean_M += atom.probability * atom.M;
    mom.mean_R_squared += atom.probability * atom.R.squaredNorm();
    mom.second_M += atom.probability * atom.M.transpose() * atom.M;
  }
  for (const auto& atom : dist.atoms) {
    const RowVector<Scalar> centered = atom.S - mom.mean_S;
    mom.cov_S += atom.probability * centered.transpose() * centered;
  }
  return mom;
}

/// Cov(S_n) for the stationary chain from lag covariances
/// C_l = G^T diag(pi) Q^l G:  n C_0 + sum_{l=1}^{n-1} (n - l)(C_l + C_l^T).
template <typename Scalar>
Matrix<Scalar> exact_Sn_covariance(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g, Index n) {
  require(n >= 1, ErrorKind::InvalidArgument, "covariance needs n >= 1");
  const Matrix<Scalar> weighted = chain.stationary().asDiagonal() * g.values;
  Matrix<Scalar> lagged = g.values;  // Q^l g
  Matrix<Scalar> cov = Scalar(n) * (weighted.transpose() * lagged);
  for (Index l = 1; l < n; ++l) {
    lagged = chain.transition() * lagged;
    const Matrix<Scalar> c = weighted.transpose() * lagged;
    cov += Scalar(n - l) * (c + c.transpose());
  }
  return (cov + cov.transpose()) / Scalar(2);
}

}  // namespace mwlab
