#include "mwlab/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "mwlab/io.hpp"

namespace mwlab {

namespace {

using nlohmann::json;

MatrixXd matrix_from_json(const json& node, const std::filesystem::path& base_dir, const char* what) {
  if (node.is_string()) {
    const std::filesystem::path path = base_dir / node.get<std::string>();
    if (!std::filesystem::exists(path))
      throw Error(ErrorKind::ParseError, std::string(what) + " file does not exist: " + path.string());
    return io::read_matrix_file(path);
  }
  if (node.is_object()) {
    if (node.contains("file")) return matrix_from_json(node.at("file"), base_dir, what);
    if (node.contains("matrix")) return matrix_from_json(node.at("matrix"), base_dir, what);
  }
  if (node.is_array() && !node.empty()) {
    // A flat array is a single column (one value per state).
    if (!node.front().is_array()) {
      MatrixXd m(static_cast<Index>(node.size()), 1);
      for (std::size_t i = 0; i < node.size(); ++i) m(static_cast<Index>(i), 0) = node[i].get<double>();
      return m;
    }
    const auto cols = node.front().size();
    MatrixXd m(static_cast<Index>(node.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (!node[i].is_array() || node[i].size() != cols)
        throw Error(ErrorKind::ParseError, std::string(what) + " has ragged rows");
      for (std::size_t j = 0; j < cols; ++j)
        m(static_cast<Index>(i), static_cast<Index>(j)) = node[i][j].get<double>();
    }
    return m;
  }
  throw Error(ErrorKind::ParseError, std::string(what) + " must be a matrix, a file path or {\"file\": path}");
}

template <typename T>
void read_opt(const json& node, const char* key, T& target) {
  if (node.contains(key) && !node.at(key).is_null()) target = node.at(key).get<T>();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  cfg.text = text;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (!root.contains("chain")) throw Error(ErrorKind::ParseError, "config lacks a 'chain' entry");
    cfg.transition = matrix_from_json(root.at("chain"), base_dir, "chain");
    if (!root.contains("observable")) throw Error(ErrorKind::ParseError, "config lacks an 'observable' entry");
    const json& obs = root.at("observable");
    cfg.observable = matrix_from_json(obs.is_object() && obs.contains("values") ? obs.at("values") : obs,
                                      base_dir, "observable");
    if (obs.is_object()) {
      read_opt(obs, "center", cfg.center_observable);
      read_opt(obs, "p", cfg.p_exponent);
    }
    if (root.contains("tolerances")) {
      const json& t = root.at("tolerances");
      read_opt(t, "stochastic", cfg.tolerances.stochastic);
      read_opt(t, "stationary", cfg.tolerances.stationary);
    }
    if (root.contains("resolvent")) {
      const json& r = root.at("resolvent");
      read_opt(r, "k_max", cfg.kernel_k_max);
      read_opt(r, "tol", cfg.kernel_tol);
      read_opt(r, "scan_k_max", cfg.scan_k_max);
    }
    if (root.contains("growth")) {
      const json& g = root.at("growth");
      read_opt(g, "n_max", cfg.growth_n_max);
      cfg.fit_range = {1, cfg.growth_n_max};
      if (g.contains("fit_range")) cfg.fit_range = g.at("fit_range").get<std::pair<Index, Index>>();
    }
    if (root.contains("simulation")) {
      const json& s = root.at("simulation");
      read_opt(s, "starts", cfg.starts);
      read_opt(s, "n_list", cfg.n_list);
      read_opt(s, "n_paths", cfg.n_paths);
      if (s.contains("seed") && !s.at("seed").is_null()) cfg.seed = s.at("seed").get<std::uint64_t>();
    }
    if (root.contains("verify")) {
      const json& v = root.at("verify");
      read_opt(v, "t_grid", cfg.t_grid);
      read_opt(v, "significance", cfg.significance);
      read_opt(v, "decay_threshold", cfg.decay_threshold);
      read_opt(v, "drift_threshold", cfg.drift_threshold);
      read_opt(v, "drift_burn_in", cfg.drift_burn_in);
      read_opt(v, "gof_n", cfg.gof_n);
      read_opt(v, "gof_paths", cfg.gof_paths);
      read_opt(v, "block_paths", cfg.block_paths);
      read_opt(v, "lambda_points", cfg.lambda_points);
      read_opt(v, "maximal_k_max", cfg.maximal_k_max);
      read_opt(v, "maximal_n_max", cfg.maximal_n_max);
      if (v.contains("schedule")) {
        const json& sch = v.at("schedule");
        read_opt(sch, "r", cfg.schedule_r);
        read_opt(sch, "gamma", cfg.schedule_gamma);
        read_opt(sch, "beta", cfg.schedule_beta);
        read_opt(sch, "j", cfg.schedule_j);
      }
    }
    if (root.contains("moments")) {
      const json& m = root.at("moments");
      read_opt(m, "p", cfg.p_exponent);
      if (m.contains("alpha") && !m.at("alpha").is_null()) cfg.alpha_override = m.at("alpha").get<double>();
      read_opt(m, "selector", cfg.q_selector);
    }
    if (root.contains("oracle")) {
      const json& o = root.at("oracle");
      read_opt(o, "n", cfg.oracle_n);
      read_opt(o, "max_paths", cfg.oracle_max_paths);
    }
    if (root.contains("output") && root.at("output").is_string())
      cfg.out_dir = base_dir / root.at("output").get<std::string>();
    read_opt(root, "workers", cfg.workers);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config field has the wrong type: ") + e.what());
  }

  for (Index s : cfg.starts)
    require(s >= 0 && s < cfg.transition.rows(), ErrorKind::ParseError, "start state out of range");
  require(!cfg.n_list.empty() && std::is_sorted(cfg.n_list.begin(), cfg.n_list.end()) && cfg.n_list.front() >= 1,
          ErrorKind::ParseError, "n_list must be positive and increasing");
  require(cfg.workers >= 1, ErrorKind::ParseError, "workers must be at least 1");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace mwlab
