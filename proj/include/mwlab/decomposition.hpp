#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mwlab/chain.hpp"
#include "mwlab/resolvent.hpp"

namespace mwlab {

/// Unique pi-mean-zero solution of (I - Q) h = g, from the nonsingular
/// system (I - Q + 1 pi^T) h = g.
template <typename Scalar>
Matrix<Scalar> poisson_solve(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g) {
  require(g.n_states() == chain.n_states(), ErrorKind::InvalidArgument,
          "observable does not match chain");
  const Index n = chain.n_states();
  const Matrix<Scalar> fundamental = Matrix<Scalar>::Identity(n, n) - chain.transition() +
                                     Vector<Scalar>::Ones(n) * chain.stationary().transpose();
  Matrix<Scalar> h = fundamental.fullPivLu().solve(g.values);
  require(h.allFinite(), ErrorKind::SolveFailure, "Poisson solve produced non-finite values");
  const Matrix<Scalar> residual = h - chain.transition() * h - g.values;
  const Scalar gmax = g.values.size() > 0 ? g.values.cwiseAbs().maxCoeff() : Scalar(0);
  require(residual.size() == 0 || residual.cwiseAbs().maxCoeff() <= Scalar(1e-10) * (Scalar(1) + gmax),
          ErrorKind::SolveFailure, "Poisson residual above tolerance");
  return h;
}

enum class KernelSource { EpsilonLimit, Poisson };

inline const char* to_string(KernelSource source) {
  return source == KernelSource::Poisson ? "poisson" : "epsilon_limit";
}

/// Increment function H(x, y) of the martingale part, stored for every pair
/// (x, y) as row x * n_states + y of `values`. Entries off the support of Q
/// are zero and `defined(x, y)` is false there.
template <typename Scalar>
struct MartingaleKernel {
  Index n_states = 0;
  Matrix<Scalar> values;
  std::vector<bool> support;
  KernelSource source = KernelSource::Poisson;
  Scalar cauchy_gap{};
  /// L2(pi_1) increments along the epsilon schedule, one per k >= 2.
  std::vector<Scalar> gap_history;
  /// L2(pi_1) distance to the Poisson-route kernel (0 for that route).
  Scalar route_gap{};

  Index dim() const { return values.cols(); }
  bool defined(Index x, Index y) const {
    return support[static_cast<std::size_t>(x * n_states + y)];
  }
  auto operator()(Index x, Index y) const { return values.row(x * n_states + y); }
};

using KernelXd = MartingaleKernel<double>;

/// H(x, y) = h(y) - (Q h)(x) on the support of Q.
template <typename Scalar, typename Derived>
MartingaleKernel<Scalar> kernel_from_solution(const FiniteChain<Scalar>& chain,
                                              const Eigen::MatrixBase<Derived>& h,
                                              KernelSource source) {
  const Index n = chain.n_states();
  const Matrix<Scalar> qh = chain.transition() * h;
  MartingaleKernel<Scalar> kernel;
  kernel.n_states = n;
  kernel.source = source;
  kernel.values = Matrix<Scalar>::Zero(n * n, h.cols());
  kernel.support.assign(static_cast<std::size_t>(n * n), false);
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (chain.transition()(x, y) > 0) {
        kernel.values.row(x * n + y) = h.row(y) - qh.row(x);
        kernel.support[static_cast<std::size_t>(x * n + y)] = true;
      }
  return kernel;
}

/// (sum_{x,y} pi(x) Q(x,y) |A(x,y) - B(x,y)|^2)^{1/2}.
template <typename Scalar>
Scalar l2_pi1_distance(const FiniteChain<Scalar>& chain, const MartingaleKernel<Scalar>& a,
                       const MartingaleKernel<Scalar>& b) {
  using std::sqrt;
  const Index n = chain.n_states();
  Scalar total = 0;
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      const Scalar w = chain.stationary()(x) * chain.transition()(x, y);
      if (w > 0) total += w * (a(x, y) - b(x, y)).squaredNorm();
    }
  return sqrt(total);
}

template <typename Scalar>
Scalar l2_pi1_norm(const FiniteChain<Scalar>& chain, const MartingaleKernel<Scalar>& kernel) {
  using std::sqrt;
  const Index n = chain.n_states();
  Scalar total = 0;
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      total += chain.stationary()(x) * chain.transition()(x, y) * kernel(x, y).squaredNorm();
  return sqrt(total);
}

/// max_x |sum_y Q(x, y) H(x, y)|.
template <typename Scalar>
Scalar martingale_defect(const FiniteChain<Scalar>& chain, const MartingaleKernel<Scalar>& kernel) {
  const Index n = chain.n_states();
  Scalar worst = 0;
  for (Index x = 0; x < n; ++x) {
    RowVector<Scalar> drift = RowVector<Scalar>::Zero(kernel.dim());
    for (Index y = 0; y < n; ++y) drift += chain.transition()(x, y) * kernel(x, y);
    worst = std::max(worst, drift.norm());
  }
  return worst;
}

/// Limit of H_delta along delta_k = 2^{-k}: stops at the first k >= 2 whose
/// L2(pi_1) increment drops below `tol`, extrapolates the last two iterates
/// and checks the result against the Poisson-route kernel within 10 tol.
/// Throws NoConvergence (with the gap sequence in the message) if either
/// condition fails.
template <typename Scalar>
MartingaleKernel<Scalar> limit_kernel(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g,
                                      Index k_max = 60, Scalar tol = Scalar(1e-8)) {
  require(tol > 0, ErrorKind::InvalidArgument, "kernel tolerance must be positive");
  require(k_max >= 2, ErrorKind::InvalidArgument, "kernel schedule needs k_max >= 2");

  auto kernel_at = [&](Index k) {
    const Scalar delta = std::ldexp(Scalar(1), -static_cast<int>(k));
    return kernel_from_solution(chain, solve_resolvent(chain, g, delta).h,
                                KernelSource::EpsilonLimit);
  };

  MartingaleKernel<Scalar> previous = kernel_at(1);
  std::vector<Scalar> gaps;
  for (Index k = 2; k <= k_max; ++k) {
    MartingaleKernel<Scalar> current = kernel_at(k);
    const Scalar gap = l2_pi1_distance(chain, current, previous);
    gaps.push_back(gap);
    if (gap < tol) {
      // H_delta is analytic in delta, so one Richardson step removes the
      // first-order bias left by stopping at a positive delta.
      current.values = Scalar(2) * current.values - previous.values;
      current.cauchy_gap = gap;
      current.gap_history = std::move(gaps);
      const auto reference = kernel_from_solution(chain, poisson_solve(chain, g), KernelSource::Poisson);
      current.route_gap = l2_pi1_distance(chain, current, reference);
      require(current.route_gap <= Scalar(10) * tol, ErrorKind::NoConvergence,
              "epsilon-route kernel differs from Poisson-route kernel by " +
                  std::to_string(static_cast<double>(current.route_gap)));
      return current;
    }
    previous = std::move(current);
  }
  std::string trail;
  for (std::size_t i = gaps.size() > 5 ? gaps.size() - 5 : 0; i < gaps.size(); ++i)
    trail += (trail.empty() ? "" : ", ") + std::to_string(static_cast<double>(gaps[i]));
  throw Error(ErrorKind::NoConvergence,
              "kernel increments did not fall below tolerance by k_max; last gaps: " + trail);
}

/// Kernel built directly from poisson_solve.
template <typename Scalar>
MartingaleKernel<Scalar> poisson_kernel(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g) {
  return kernel_from_solution(chain, poisson_solve(chain, g), KernelSource::Poisson);
}

template <typename Scalar>
struct DiffusionMatrix {
  Matrix<Scalar> D;
  /// d x rank_m factor with D = Lambda Lambda^T.
  Matrix<Scalar> Lambda;
  Index rank_m = 0;
  Vector<Scalar> eigenvalues;
};

using DiffusionXd = DiffusionMatrix<double>;

/// D = sum_{x,y} pi(x) Q(x,y) H(x,y) H(x,y)^T, factored through the
/// symmetric eigendecomposition with eigenvalues above `cutoff` kept.
template <typename Scalar>
DiffusionMatrix<Scalar> diffusion_matrix(const FiniteChain<Scalar>& chain,
                                         const MartingaleKernel<Scalar>& kernel,
                                         Scalar cutoff = Scalar(1e-10)) {
  using std::sqrt;
  const Index n = chain.n_states();
  const Index d = kernel.dim();
  Matrix<Scalar> D = Matrix<Scalar>::Zero(d, d);
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      const Scalar w = chain.stationary()(x) * chain.transition()(x, y);
      if (w > 0) D.noalias() += w * kernel(x, y).transpose() * kernel(x, y);
    }
  D = (D + D.transpose()).eval() / Scalar(2);

  DiffusionMatrix<Scalar> result;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(D);
  require(eig.info() == Eigen::Success, ErrorKind::SolveFailure, "eigendecomposition failed");
  result.eigenvalues = eig.eigenvalues();
  std::vector<Index> kept;
  for (Index i = d - 1; i >= 0; --i)
    if (eig.eigenvalues()(i) > cutoff) kept.push_back(i);
  result.rank_m = static_cast<Index>(kept.size());
  result.Lambda = Matrix<Scalar>::Zero(d, result.rank_m);
  for (Index j = 0; j < result.rank_m; ++j) {
    const Index i = kept[static_cast<std::size_t>(j)];
    result.Lambda.col(j) = eig.eigenvectors().col(i) * sqrt(eig.eigenvalues()(i));
  }
  result.D = std::move(D);
  return result;
}

/// Hoelder exponents used to upgrade the L2 kernel limit to L^q.
struct MomentExponents {
  double p = 0;
  double alpha = 0;
  double q_bound = 0;
  double q = 0;
  double a = 0;
  double b = 0;
  /// a - b/2 + alpha b; negative in every admissible regime.
  double rate = 0;
};

/// q = 2 + selector (q_bound - 2) with q_bound = (3 - 2 alpha) p / (1 - 2 alpha + p),
/// a = p (q - 2) / (p - 2), b = q - a.
inline MomentExponents lq_exponent(double p, double alpha, double selector = 0.5) {
  require(p > 2, ErrorKind::InvalidRegime, "moment exponent p must exceed 2");
  require(alpha > 0 && alpha < 0.5, ErrorKind::InvalidRegime, "growth exponent must lie in (0, 1/2)");
  require(selector > 0 && selector < 1, ErrorKind::InvalidArgument, "selector must lie in (0, 1)");
  MomentExponents e;
  e.p = p;
  e.alpha = alpha;
  e.q_bound = (3 - 2 * alpha) * p / (1 - 2 * alpha + p);
  e.q = 2 + selector * (e.q_bound - 2);
  e.a = p * (e.q - 2) / (p - 2);
  e.b = e.q - e.a;
  e.rate = e.a - e.b / 2 + alpha * e.b;
  require(e.q > 2 && e.q < p, ErrorKind::InvalidRegime, "selected q outside (2, p)");
  require(e.rate < 0, ErrorKind::InvalidRegime, "a - b/2 + alpha b is not negative");
  return e;
}

/// E|R_n|^2 under the stationary chain, where R_n = h(X_0) - h(X_n) for the
/// Poisson solution h: sum_{x,y} pi(x) (Q^n)(x,y) |h(x) - h(y)|^2.
template <typename Scalar>
Scalar remainder_second_moment(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g, Index n) {
  require(n >= 1, ErrorKind::InvalidArgument, "remainder moment needs n >= 1");
  const Matrix<Scalar> h = poisson_solve(chain, g);
  const Matrix<Scalar> qn = transition_power(chain, n);
  const Index states = chain.n_states();
  Scalar total = 0;
  for (Index x = 0; x < states; ++x)
    for (Index y = 0; y < states; ++y)
      total += chain.stationary()(x) * qn(x, y) * (h.row(x) - h.row(y)).squaredNorm();
  return total;
}

}  // namespace mwlab
