#include "mwlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mwlab/io.hpp"
#include "mwlab/oracle.hpp"
#include "mwlab/random.hpp"
#include "mwlab/simulate.hpp"

namespace mwlab {

namespace {

constexpr const char* kVersion = "mwlab 1.0.0";

// Effective growth exponent when the fitted slope is not positive: bounded
// norms satisfy the growth condition for every alpha > 0.
constexpr double kAlphaFloor = 0.01;

// Tags mixed into the master seed so each Monte Carlo block draws from its
// own stream.
enum SeedTag : std::uint64_t { kGofTag = 1000, kDecayTag = 2000, kBlockTag = 3000 };

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw Error(ErrorKind::InvalidArgument, "a seed is required (--seed or simulation.seed)");
  return *cfg.seed;
}

void ensure_out_dir(const RunConfig& cfg) { std::filesystem::create_directories(cfg.out_dir); }

void write_manifest(const RunConfig& cfg, const std::string& command) {
  io::KeyValueWriter kv;
  kv.add("command", command);
  kv.add("version", kVersion);
  kv.add("eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION));
  kv.add("config_hash", config_hash(cfg.text));
  kv.add("seed", cfg.seed ? std::to_string(*cfg.seed) : std::string("none"));
  kv.add("workers", std::to_string(cfg.workers));
  kv.add("note", "numeric outputs do not depend on the worker count");
  kv.write_file(cfg.out_dir / ("manifest_" + command + ".txt"));
}

double effective_alpha(const RunConfig& cfg, const GrowthReport& growth) {
  if (cfg.alpha_override) return *cfg.alpha_override;
  return std::max(growth.alpha_hat, kAlphaFloor);
}

Index table_size_for(const RunConfig& cfg) {
  Index top = std::max(cfg.growth_n_max, cfg.maximal_n_max);
  top = std::max(top, cfg.n_list.back());
  top = std::max(top, cfg.fit_range.second);
  return top;
}

std::string tagged(const std::string& test, Index start) {
  return test + "[start=" + std::to_string(start) + "]";
}

double max_row_norm(const MatrixXd& h) { return h.size() == 0 ? 0.0 : h.rowwise().norm().maxCoeff(); }

}  // namespace

Pipeline build_pipeline(const RunConfig& cfg, Index table_n_max) {
  auto chain = validate_chain(cfg.transition, cfg.tolerances);
  auto g = cfg.center_observable ? center_observable(cfg.observable, chain, cfg.p_exponent)
                                 : make_observable(cfg.observable, chain, cfg.p_exponent);
  auto h = poisson_solve(chain, g);
  auto kernel = limit_kernel(chain, g, cfg.kernel_k_max, cfg.kernel_tol);
  auto D = diffusion_matrix(chain, kernel);
  auto T = partial_sums(chain, g, std::max(table_n_max, cfg.fit_range.second));
  auto growth = estimate_growth(T, cfg.fit_range);
  const double C_hat = growth.C_hat;
  return Pipeline{std::move(chain), std::move(g), std::move(h), std::move(kernel), std::move(D),
                  std::move(T),     std::move(growth), C_hat};
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const auto chain = validate_chain(cfg.transition, cfg.tolerances);
  const auto g = cfg.center_observable ? center_observable(cfg.observable, chain, cfg.p_exponent)
                                       : make_observable(cfg.observable, chain, cfg.p_exponent);
  io::KeyValueWriter kv;
  kv.add("status", "valid");
  kv.add("n_states", std::to_string(chain.n_states()));
  kv.add("pi", chain.stationary());
  kv.add("period", std::to_string(chain.period()));
  kv.add("periodic", chain.periodic() ? "true" : "false");
  kv.add("pi_crosscheck_gap", chain.crosscheck_gap());
  kv.add("observable_dim", std::to_string(g.dim()));
  kv.add("observable_raw_pi_mean", VectorXd(cfg.observable.transpose() * chain.stationary()));
  if (chain.periodic()) kv.add("warning", "periodic chain: mixing-based diagnostics degrade");
  kv.write(out);
  return kExitPass;
}

int cmd_decompose(const RunConfig& cfg, std::ostream& out) {
  const Pipeline p = build_pipeline(cfg, table_size_for(cfg));
  ensure_out_dir(cfg);
  write_manifest(cfg, "decompose");
  const auto& dir = cfg.out_dir;

  io::write_matrix_file(dir / "h.txt", p.h);
  {
    std::ofstream f(dir / "H.txt");
    io::write_kernel(f, p.chain, p.kernel);
  }
  io::write_matrix_file(dir / "D.txt", p.D.D);
  io::write_matrix_file(dir / "Lambda.txt", p.D.Lambda);
  {
    std::ofstream f(dir / "growth.txt");
    io::write_norm_table(f, p.T);
  }
  const auto scan = resolvent_norm_scan(p.chain, p.g, cfg.scan_k_max);
  {
    std::ofstream f(dir / "resolvent_scan.txt");
    f << "# delta norm\n";
    for (const auto& [delta, norm] : scan.points) f << io::format_double(delta) << ' ' << io::format_double(norm) << '\n';
  }

  io::KeyValueWriter growth;
  growth.add("alpha_hat", p.growth.alpha_hat);
  growth.add("C_hat", p.C_hat);
  growth.add("fit_range", std::to_string(p.growth.fit_range.first) + " " + std::to_string(p.growth.fit_range.second));
  growth.add("r2", p.growth.residual_r2);
  growth.add("degenerate", p.growth.degenerate ? "true" : "false");
  std::string zeros;
  for (Index n : p.growth.excluded_zero_n) zeros += (zeros.empty() ? "" : " ") + std::to_string(n);
  growth.add("excluded_zero_n", zeros.empty() ? "none" : zeros);
  growth.add("scan_exponent", scan.exponent);
  growth.add("note", "C_hat is an empirical constant over the fitted range");
  growth.write_file(dir / "growth_report.txt");

  io::KeyValueWriter exponents;
  const double alpha = effective_alpha(cfg, p.growth);
  exponents.add("p", cfg.p_exponent);
  exponents.add("alpha", alpha);
  exponents.add("alpha_source", cfg.alpha_override ? "override" : "fit (floored)");
  try {
    const auto e = lq_exponent(cfg.p_exponent, alpha, cfg.q_selector);
    exponents.add("status", "ok");
    exponents.add("q_bound", e.q_bound);
    exponents.add("q", e.q);
    exponents.add("a", e.a);
    exponents.add("b", e.b);
    exponents.add("a_minus_b_half_plus_alpha_b", e.rate);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidRegime) throw;
    exponents.add("status", "InvalidRegime");
    exponents.add("reason", e.what());
  }
  exponents.write_file(dir / "exponents.txt");

  io::KeyValueWriter summary;
  summary.add("pi", p.chain.stationary());
  summary.add("period", std::to_string(p.chain.period()));
  summary.add("kernel_cauchy_gap", p.kernel.cauchy_gap);
  summary.add("kernel_route_gap", p.kernel.route_gap);
  summary.add("kernel_schedule_steps", std::to_string(p.kernel.gap_history.size() + 1));
  summary.add("martingale_defect", martingale_defect(p.chain, p.kernel));
  summary.add("diffusion_rank", std::to_string(p.D.rank_m));
  summary.add("diffusion_eigenvalues", p.D.eigenvalues);
  summary.add("max_abs_h", max_row_norm(p.h));
  if (p.D.rank_m == 0) summary.add("notice", "degenerate diffusion (D = 0): verify runs sup-norm decay instead of KS");
  summary.write_file(dir / "decompose_summary.txt");
  summary.write(out);
  return kExitPass;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const std::uint64_t seed = require_seed(cfg);
  const Index n = cfg.n_list.back();
  const Pipeline p = build_pipeline(cfg, table_size_for(cfg));
  ensure_out_dir(cfg);
  write_manifest(cfg, "simulate");
  io::KeyValueWriter summary;
  for (Index start : cfg.starts) {
    const auto states = sample_path(p.chain, start, n, seed, static_cast<std::uint32_t>(start));
    const auto trace = path_functionals(states, p.g, p.kernel, p.T);
    std::ofstream f(cfg.out_dir / ("trace_start" + std::to_string(start) + ".txt"));
    io::write_trace(f, trace);
    const std::string key = "start" + std::to_string(start);
    summary.add(key + ".n", std::to_string(n));
    summary.add(key + ".path_id", std::to_string(start));
    summary.add(key + ".S_n", VectorXd(trace.S.row(n).transpose()));
    summary.add(key + ".M_n", VectorXd(trace.M.row(n).transpose()));
    summary.add(key + ".R_n", VectorXd(trace.R.row(n).transpose()));
    summary.add(key + ".max_abs_R", trace.R.rowwise().norm().maxCoeff());
    summary.add(key + ".scaled_max_abs_R", trace.R.rowwise().norm().maxCoeff() / std::sqrt(static_cast<double>(n)));
  }
  summary.add("seed", std::to_string(seed));
  summary.write_file(cfg.out_dir / "simulate_summary.txt");
  summary.write(out);
  return kExitPass;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::vector<VerificationReport>* sink) {
  const std::uint64_t seed = require_seed(cfg);
  const Pipeline p = build_pipeline(cfg, table_size_for(cfg));
  ensure_out_dir(cfg);
  write_manifest(cfg, "verify");
  std::vector<VerificationReport> reports;
  const double max_h = max_row_norm(p.h);
  const double alpha = effective_alpha(cfg, p.growth);

  for (Index start : cfg.starts) {
    const auto s = static_cast<std::uint64_t>(start);
    if (p.D.rank_m > 0) {
      GofOptions opts;
      opts.significance = cfg.significance;
      opts.workers = cfg.workers;
      auto r = marginal_gof(p.chain, p.g, p.kernel, p.D, start, cfg.gof_n, cfg.gof_paths, cfg.t_grid,
                            derive_seed(seed, kGofTag + s), opts);
      r.test = tagged("marginal_gof", start);
      reports.push_back(std::move(r));
    } else {
      const std::vector<Index> n_list = cfg.n_list;
      const auto summaries = summarize_paths(p.chain, p.g, p.kernel, nullptr, start, n_list, cfg.n_paths,
                                             derive_seed(seed, kGofTag + s), cfg.workers);
      DecayOptions opts;
      opts.threshold = cfg.decay_threshold;
      auto r = sup_decay_check(summaries, n_list, DecayQuantity::Path, opts);
      r.test = tagged("degenerate_path_decay", start);
      r.seed = derive_seed(seed, kGofTag + s);
      r.starts = {start};
      r.note("reason", "D has rank 0; KS surrogate replaced by sup-norm decay of the scaled path");
      reports.push_back(std::move(r));
    }

    const auto summaries = summarize_paths(p.chain, p.g, p.kernel, &p.T, start, cfg.n_list, cfg.n_paths,
                                           derive_seed(seed, kDecayTag + s), cfg.workers);
    DecayOptions opts;
    opts.threshold = cfg.decay_threshold;
    opts.pathwise_bound = 2.0 * max_h;
    auto r = sup_decay_check(summaries, cfg.n_list, DecayQuantity::Remainder, opts);
    r.test = tagged("sup_decay_R", start);
    r.seed = derive_seed(seed, kDecayTag + s);
    r.starts = {start};
    reports.push_back(std::move(r));

    opts.pathwise_bound.reset();
    auto c = sup_decay_check(summaries, cfg.n_list, DecayQuantity::CenteredGap, opts);
    c.test = tagged("sup_decay_centered_gap", start);
    c.seed = derive_seed(seed, kDecayTag + s);
    c.starts = {start};
    reports.push_back(std::move(c));

    VerificationReport block;
    block.test = tagged("block_decomposition", start);
    block.seed = derive_seed(seed, kBlockTag + s);
    block.n_paths = cfg.block_paths;
    block.starts = {start};
    bool all_hold = true;
    const PathSampler sampler(p.chain);
    const CounterRng rng(*block.seed);
    for (Index j : cfg.schedule_j) {
      const auto schedule = make_schedule(cfg.schedule_r, cfg.schedule_gamma, cfg.schedule_beta, j, alpha,
                                          cfg.p_exponent);
      const Index length = std::max(schedule.m_j * schedule.ell_j, schedule.n_j);
      const auto table = length <= p.T.n_max ? &p.T : nullptr;
      const auto local_T = table ? PartialSumTable<double>{} : partial_sums(p.chain, p.g, length);
      Index holds = 0;
      double worst_slack = std::numeric_limits<double>::infinity();
      for (Index path = 0; path < cfg.block_paths; ++path) {
        const auto states = sampler.sample(start, length, rng, static_cast<std::uint32_t>(j * 1000003 + path));
        const auto trace = path_functionals(states, p.g, p.kernel, table ? *table : local_T);
        const auto diag = block_decomposition_diagnostic(trace, schedule);
        holds += diag.holds ? 1 : 0;
        worst_slack = std::min(worst_slack, diag.endpoint + diag.martingale + diag.sum - diag.lhs);
      }
      const std::string param = "j=" + std::to_string(j);
      block.add(param, "n_j", static_cast<double>(schedule.n_j));
      block.add(param, "m_j", static_cast<double>(schedule.m_j));
      block.add(param, "ell_j", static_cast<double>(schedule.ell_j));
      block.add(param, "paths_holding", static_cast<double>(holds));
      block.add(param, "min_slack", worst_slack);
      block.add(param, "endpoint_exponent", schedule.endpoint_exponent);
      block.add(param, "increment_exponent", schedule.increment_exponent);
      all_hold = all_hold && holds == cfg.block_paths;
    }
    block.passed = all_hold;
    reports.push_back(std::move(block));
  }

  DriftOptions drift;
  drift.threshold = cfg.drift_threshold;
  drift.burn_in = cfg.drift_burn_in;
  reports.push_back(centered_drift_check(p.chain, p.T, cfg.n_list, drift));

  std::vector<Index> dyadic;
  for (Index n = 1; n <= cfg.maximal_n_max; n *= 2) dyadic.push_back(n);
  std::vector<int> ks;
  for (int k = 0; k <= cfg.maximal_k_max; ++k) ks.push_back(k);
  const auto lambdas = default_lambda_grid(p.T, cfg.maximal_n_max, cfg.lambda_points);
  reports.push_back(maximal_inequality_check(p.chain, p.T, p.C_hat, dyadic, lambdas, ks));

  {
    VerificationReport exps;
    exps.test = "moment_exponents";
    exps.note("alpha", io::format_double(alpha));
    try {
      const auto e = lq_exponent(cfg.p_exponent, alpha, cfg.q_selector);
      exps.add("p=" + io::format_double(e.p), "q", e.q);
      exps.add("p=" + io::format_double(e.p), "rate", e.rate);
      exps.passed = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InvalidRegime) throw;
      exps.note("status", e.what());
      exps.passed = false;
    }
    reports.push_back(std::move(exps));
  }

  const Index states = p.chain.n_states();
  if (std::pow(static_cast<double>(states), static_cast<double>(cfg.oracle_n)) * static_cast<double>(states) <=
      cfg.oracle_max_paths) {
    VerificationReport oracle;
    oracle.test = "oracle_crosscheck";
    double enumerated_R2 = 0;
    MatrixXd enumerated_MM = MatrixXd::Zero(p.g.dim(), p.g.dim());
    double worst_mean_M = 0;
    double worst_mass = 0;
    for (Index x = 0; x < states; ++x) {
      const auto dist = enumerate_paths(p.chain, p.g, p.kernel, x, cfg.oracle_n, cfg.oracle_max_paths);
      const auto mom = exact_moments(dist);
      enumerated_R2 += p.chain.stationary()(x) * mom.mean_R_squared;
      worst_mean_M = std::max(worst_mean_M, mom.mean_M.cwiseAbs().maxCoeff());
      worst_mass = std::max(worst_mass, std::abs(dist.total_probability() - 1.0));
      const auto one = exact_moments(enumerate_paths(p.chain, p.g, p.kernel, x, 1, cfg.oracle_max_paths));
      enumerated_MM += p.chain.stationary()(x) * one.second_M;
    }
    const double exact_R2 = remainder_second_moment(p.chain, p.g, cfg.oracle_n);
    const double r2_gap = std::abs(enumerated_R2 - exact_R2);
    const double mm_gap = (enumerated_MM - p.D.D).cwiseAbs().maxCoeff();
    const std::string param = "n=" + std::to_string(cfg.oracle_n);
    oracle.add(param, "enumerated_R2", enumerated_R2);
    oracle.add(param, "matrix_power_R2", exact_R2);
    oracle.add(param, "R2_gap", r2_gap);
    oracle.add("n=1", "M1M1T_minus_D", mm_gap);
    oracle.add(param, "max_abs_mean_M", worst_mean_M);
    oracle.add(param, "mass_defect", worst_mass);
    const MatrixXd cov_rate = exact_Sn_covariance(p.chain, p.g, cfg.n_list.back()) /
                              static_cast<double>(cfg.n_list.back());
    oracle.add("n=" + std::to_string(cfg.n_list.back()), "cov_rate_minus_D",
               (cov_rate - p.D.D).cwiseAbs().maxCoeff());
    oracle.passed = r2_gap <= 1e-10 && mm_gap <= 1e-10 && worst_mean_M <= 1e-10 && worst_mass <= 1e-12;
    reports.push_back(std::move(oracle));
  }

  {
    std::ofstream table(cfg.out_dir / "verify_table.tsv");
    io::write_report_table(table, reports);
    std::ofstream summary(cfg.out_dir / "verify_summary.txt");
    io::write_report_summary(summary, reports);
  }
  bool all = true;
  for (const auto& r : reports) {
    out << r.test << ": " << (r.passed ? "PASS" : "FAIL") << '\n';
    all = all && r.passed;
  }
  if (sink) *sink = std::move(reports);
  return all ? kExitPass : kExitFail;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const Pipeline p = build_pipeline(cfg, table_size_for(cfg));
  ensure_out_dir(cfg);
  write_manifest(cfg, "oracle");
  io::KeyValueWriter summary;
  for (Index start : cfg.starts) {
    const auto dist = enumerate_paths(p.chain, p.g, p.kernel, start, cfg.oracle_n, cfg.oracle_max_paths);
    std::ofstream f(cfg.out_dir / ("distribution_start" + std::to_string(start) + ".txt"));
    io::write_distribution(f, dist);
    const auto mom = exact_moments(dist);
    const std::string key = "start" + std::to_string(start);
    summary.add(key + ".n", std::to_string(dist.n));
    summary.add(key + ".atoms", std::to_string(dist.atoms.size()));
    summary.add(key + ".total_probability", dist.total_probability());
    summary.add(key + ".mean_S", VectorXd(mom.mean_S.transpose()));
    summary.add(key + ".mean_M", VectorXd(mom.mean_M.transpose()));
    summary.add(key + ".mean_R_squared", mom.mean_R_squared);
  }
  summary.add("remainder_second_moment", remainder_second_moment(p.chain, p.g, cfg.oracle_n));
  {
    std::ofstream f(cfg.out_dir / "cov_Sn.txt");
    f << "# n max|Cov(S_n)/n - D| Cov(S_n)/n (row-major)\n";
    for (Index n : cfg.n_list) {
      const MatrixXd rate = exact_Sn_covariance(p.chain, p.g, n) / static_cast<double>(n);
      f << n << ' ' << io::format_double((rate - p.D.D).cwiseAbs().maxCoeff());
      for (Index i = 0; i < rate.rows(); ++i)
        for (Index j = 0; j < rate.cols(); ++j) f << ' ' << io::format_double(rate(i, j));
      f << '\n';
    }
  }
  summary.write_file(cfg.out_dir / "oracle_summary.txt");
  summary.write(out);
  return kExitPass;
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  const char* files[] = {"manifest_decompose.txt", "decompose_summary.txt", "growth_report.txt",
                         "exponents.txt",          "manifest_simulate.txt", "simulate_summary.txt",
                         "manifest_oracle.txt",    "oracle_summary.txt",    "manifest_verify.txt",
                         "verify_summary.txt"};
  bool found = false;
  bool failed = false;
  for (const char* name : files) {
    std::ifstream in(cfg.out_dir / name);
    if (!in) continue;
    found = true;
    out << "## " << name << '\n';
    std::string line;
    while (std::getline(in, line)) {
      out << line << '\n';
      if (line.ends_with("= FAIL")) failed = true;
    }
  }
  if (!found) throw Error(ErrorKind::InvalidArgument, "no outputs found in " + cfg.out_dir.string());
  return failed ? kExitFail : kExitPass;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (name == "check") return cmd_check(cfg, out);
    if (name == "decompose") return cmd_decompose(cfg, out);
    if (name == "simulate") return cmd_simulate(cfg, out);
    if (name == "verify") return cmd_verify(cfg, out);
    if (name == "oracle") return cmd_oracle(cfg, out);
    if (name == "report") return cmd_report(cfg, out);
    err << "error: unknown subcommand '" << name << "'\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace mwlab
