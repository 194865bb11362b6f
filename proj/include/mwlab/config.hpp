#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mwlab/chain.hpp"

namespace mwlab {

/// Everything a CLI run needs, parsed from one JSON document. Matrix sources
/// may be inline arrays or paths to whitespace-separated text files, resolved
/// relative to the config file.
struct RunConfig {
  std::string text;  // raw config, hashed into the manifest

  MatrixXd transition;
  MatrixXd observable;
  bool center_observable = true;
  double p_exponent = 4.0;
  ChainTolerances tolerances;

  // epsilon schedule for the kernel limit and the resolvent norm scan
  Index kernel_k_max = 60;
  double kernel_tol = 1e-8;
  Index scan_k_max = 20;

  // growth fit
  Index growth_n_max = 1024;
  std::pair<Index, Index> fit_range{1, 1024};

  // simulation
  std::vector<Index> starts{0};
  std::vector<Index> n_list{100, 1000, 10000};
  Index n_paths = 1000;
  std::optional<std::uint64_t> seed;

  // verification
  std::vector<double> t_grid{0.25, 0.5, 1.0};
  double significance = 0.01;
  double decay_threshold = 0.05;
  double drift_threshold = 0.05;
  Index drift_burn_in = 0;
  Index gof_n = 4096;
  Index gof_paths = 2000;
  Index schedule_r = 2;
  double schedule_gamma = 0.5;
  double schedule_beta = 1.05;
  std::vector<Index> schedule_j{2, 3, 4, 5};
  Index block_paths = 100;
  Index lambda_points = 20;
  int maximal_k_max = 6;
  Index maximal_n_max = 1024;

  // moment exponents
  std::optional<double> alpha_override;
  double q_selector = 0.5;

  // oracle
  Index oracle_n = 6;
  double oracle_max_paths = 1e7;

  std::filesystem::path out_dir = "mwlab_out";
  Index workers = 1;
};

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of the config text, as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace mwlab
