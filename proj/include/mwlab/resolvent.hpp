#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "mwlab/chain.hpp"

namespace mwlab {

template <typename Scalar>
struct ResolventSolution {
  Scalar epsilon{};
  Matrix<Scalar> h;
  /// Sup-norm of (1 + epsilon) h - Q h - g.
  Scalar residual{};
};

/// Solves ((1 + epsilon) I - Q) h = g by dense LU. The matrix is strictly
/// diagonally dominant for epsilon > 0, so partial pivoting is sufficient.
template <typename Scalar>
ResolventSolution<Scalar> solve_resolvent(const FiniteChain<Scalar>& chain,
                                          const Observable<Scalar>& g, Scalar epsilon) {
  require(epsilon > 0, ErrorKind::InvalidArgument, "resolvent parameter must be positive");
  require(g.n_states() == chain.n_states(), ErrorKind::InvalidArgument,
          "observable does not match chain");
  const Index n = chain.n_states();
  const Matrix<Scalar> a =
      (Scalar(1) + epsilon) * Matrix<Scalar>::Identity(n, n) - chain.transition();

  ResolventSolution<Scalar> sol;
  sol.epsilon = epsilon;
  sol.h = a.partialPivLu().solve(g.values);
  require(sol.h.allFinite(), ErrorKind::SolveFailure, "resolvent solve produced non-finite values");
  sol.residual = (a * sol.h - g.values).cwiseAbs().maxCoeff();
  const Scalar gmax = g.values.size() > 0 ? g.values.cwiseAbs().maxCoeff() : Scalar(0);
  require(sol.residual <= Scalar(1e-9) * (Scalar(1) + gmax), ErrorKind::SolveFailure,
          "resolvent residual above tolerance");
  return sol;
}

template <typename Scalar>
struct SeriesTruncation {
  Matrix<Scalar> h;
  /// (1 + epsilon)^{-K} max|g| / epsilon bounds the dropped tail in sup-norm.
  Scalar error_bound{};
};

/// K-term truncation of sum_{k>=1} (1 + epsilon)^{-k} Q^{k-1} g.
template <typename Scalar>
SeriesTruncation<Scalar> resolvent_series(const FiniteChain<Scalar>& chain,
                                          const Observable<Scalar>& g, Scalar epsilon, Index terms) {
  using std::pow;
  require(epsilon > 0, ErrorKind::InvalidArgument, "resolvent parameter must be positive");
  require(terms >= 1, ErrorKind::InvalidArgument, "series needs at least one term");
  const Scalar ratio = Scalar(1) / (Scalar(1) + epsilon);
  Matrix<Scalar> power_g = g.values;
  Matrix<Scalar> sum = Matrix<Scalar>::Zero(g.values.rows(), g.values.cols());
  Scalar weight = ratio;
  for (Index k = 1; k <= terms; ++k) {
    sum += weight * power_g;
    if (k < terms) {
      power_g = chain.transition() * power_g;
      weight *= ratio;
    }
  }
  const Scalar gmax = g.values.size() > 0 ? g.values.cwiseAbs().maxCoeff() : Scalar(0);
  return {std::move(sum), pow(ratio, Scalar(terms)) * gmax / epsilon};
}

/// T[n] = sum_{k<n} Q^k g for n = 0..n_max, with T[0] = 0, and the L2(pi)
/// norm of each entry.
template <typename Scalar>
struct PartialSumTable {
  Index n_max = 0;
  std::vector<Matrix<Scalar>> sums;
  std::vector<Scalar> norms;

  const Matrix<Scalar>& operator[](Index n) const { return sums.at(static_cast<std::size_t>(n)); }
  Scalar norm(Index n) const { return norms.at(static_cast<std::size_t>(n)); }
};

template <typename Scalar>
PartialSumTable<Scalar> partial_sums(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g,
                                     Index n_max) {
  require(n_max >= 1, ErrorKind::InvalidArgument, "partial sum table needs n_max >= 1");
  PartialSumTable<Scalar> table;
  table.n_max = n_max;
  table.sums.reserve(static_cast<std::size_t>(n_max + 1));
  table.norms.reserve(static_cast<std::size_t>(n_max + 1));
  table.sums.push_back(Matrix<Scalar>::Zero(g.values.rows(), g.values.cols()));
  table.norms.push_back(Scalar(0));
  for (Index n = 1; n <= n_max; ++n) {
    Matrix<Scalar> next = g.values + chain.transition() * table.sums.back();
    table.norms.push_back(l2_pi_norm(chain, next));
    table.sums.push_back(std::move(next));
  }
  return table;
}

struct GrowthReport {
  double alpha_hat = 0;
  /// max over fitted n of ||T_n||_2^2 / n.
  double C_hat = 0;
  std::pair<Index, Index> fit_range{0, 0};
  double residual_r2 = 0;
  std::vector<Index> fitted_n;
  std::vector<Index> excluded_zero_n;
  bool degenerate = false;
};

namespace detail {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 1;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  // A constant response is fitted exactly by a flat line.
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace detail

/// Least-squares slope of log ||T_n||_2 against log n over dyadic n in
/// `fit_range`. Zero norms are left out of the fit and listed; fewer than two
/// usable points yields a degenerate report with alpha_hat = 0.
template <typename Scalar>
GrowthReport estimate_growth(const PartialSumTable<Scalar>& table, std::pair<Index, Index> fit_range) {
  const auto [lo, hi] = fit_range;
  require(lo >= 1 && hi <= table.n_max && lo <= hi, ErrorKind::InvalidArgument,
          "fit range outside partial sum table");
  GrowthReport report;
  report.fit_range = fit_range;
  std::vector<double> xs, ys;
  Index dyadic_points = 0;
  for (Index n = 1; n <= hi; n *= 2) {
    if (n < lo) continue;
    ++dyadic_points;
    const double norm = static_cast<double>(table.norm(n));
    if (norm <= 0) {
      report.excluded_zero_n.push_back(n);
      continue;
    }
    report.fitted_n.push_back(n);
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(norm));
    report.C_hat = std::max(report.C_hat, norm * norm / static_cast<double>(n));
  }
  require(dyadic_points >= 4, ErrorKind::InvalidArgument,
          "growth fit needs at least 4 dyadic points in range");
  if (xs.size() < 2) {
    report.degenerate = true;
    report.residual_r2 = 0;
    return report;
  }
  const auto fit = detail::least_squares(xs, ys);
  report.alpha_hat = fit.slope;
  report.residual_r2 = fit.r2;
  return report;
}

struct NormScan {
  std::vector<std::pair<double, double>> points;  // (delta_k, ||h_{delta_k}||_2)
  /// Least-squares slope of log ||h_delta|| against log(1/delta), comparable
  /// to alpha_hat; 0 when fewer than two nonzero norms.
  double exponent = 0;
};

/// ||h_delta||_2 along delta_k = 2^{-k}, k = 1..k_max.
template <typename Scalar>
NormScan resolvent_norm_scan(const FiniteChain<Scalar>& chain, const Observable<Scalar>& g,
                             Index k_max) {
  require(k_max >= 1, ErrorKind::InvalidArgument, "norm scan needs k_max >= 1");
  NormScan scan;
  std::vector<double> xs, ys;
  for (Index k = 1; k <= k_max; ++k) {
    const Scalar delta = std::ldexp(Scalar(1), -static_cast<int>(k));
    const auto sol = solve_resolvent(chain, g, delta);
    const double norm = static_cast<double>(l2_pi_norm(chain, sol.h));
    scan.points.emplace_back(static_cast<double>(delta), norm);
    if (norm > 0) {
      xs.push_back(static_cast<double>(k) * std::log(2.0));
      ys.push_back(std::log(norm));
    }
  }
  if (xs.size() >= 2) scan.exponent = detail::least_squares(xs, ys).slope;
  return scan;
}

}  // namespace mwlab
