#pragma once

#include <random>

#include "mwlab/chain.hpp"

namespace mwlab::testing {

// Three-state doubly stochastic chain with a spectral gap; pi is uniform.
inline MatrixXd reference_transition() {
  MatrixXd q(3, 3);
  q << 0.5, 0.3, 0.2,
       0.2, 0.5, 0.3,
       0.3, 0.2, 0.5;
  return q;
}

inline MatrixXd reference_values() {
  MatrixXd g(3, 2);
  g << 1, 0,
       0, 1,
      -1, -1;
  return g;
}

inline MatrixXd alternating_transition() {
  MatrixXd q(2, 2);
  q << 0, 1,
       1, 0;
  return q;
}

inline MatrixXd iid_transition(const VectorXd& pi) {
  return VectorXd::Ones(pi.size()) * pi.transpose();
}

inline MatrixXd plus_minus_one() {
  MatrixXd g(2, 1);
  g << 1, -1;
  return g;
}

// Random transition matrix with a guaranteed cycle 0 -> 1 -> ... -> 0 and
// a random sprinkle of other edges, so the chain is irreducible.
inline MatrixXd random_transition(std::mt19937_64& rng, Index n, double density = 0.6) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd q = MatrixXd::Zero(n, n);
  for (Index x = 0; x < n; ++x) {
    q(x, (x + 1) % n) = 0.1 + unit(rng);
    for (Index y = 0; y < n; ++y)
      if (unit(rng) < density) q(x, y) += unit(rng);
    q.row(x) /= q.row(x).sum();
  }
  return q;
}

inline MatrixXd random_values(std::mt19937_64& rng, Index n, Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd g(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  return g;
}

}  // namespace mwlab::testing
