#include "bhtbp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <yaml-cpp/yaml.h>

#include "bhtbp/csv.hpp"
#include "bhtbp/errors.hpp"

namespace bhtbp {
namespace {

template <typename T>
T as(const YAML::Node& node, std::string_view key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config key '{}': cannot convert value ({})", key, e.msg));
  }
}

std::size_t as_count(const YAML::Node& node, std::string_view key) {
  const auto v = as<long long>(node, key);
  if (v < 0) throw ConfigError(fmt::format("config key '{}' must be non-negative", key));
  return static_cast<std::size_t>(v);
}

template <typename T>
std::vector<T> as_list(const YAML::Node& node, std::string_view key) {
  if (!node.IsSequence()) throw ConfigError(fmt::format("config key '{}' must be a list", key));
  std::vector<T> out;
  for (const auto& item : node) {
    if constexpr (std::is_same_v<T, std::size_t>) {
      out.push_back(as_count(item, key));
    } else {
      out.push_back(as<T>(item, key));
    }
  }
  return out;
}

void set_field(ExperimentConfig& c, std::string_view key, const YAML::Node& v) {
  if (key == "n") c.n = as_count(v, key);
  else if (key == "m") c.m = as_count(v, key);
  else if (key == "l") c.l = as_count(v, key);
  else if (key == "n_d") c.n_d = as_count(v, key);
  else if (key == "q") c.prior.q = as<double>(v, key);
  else if (key == "sigma_x") c.prior.sigma_x = as<double>(v, key);
  else if (key == "x_min") c.prior.x_min = as<double>(v, key);
  else if (key == "lambda") c.prior.lambda = as<double>(v, key);
  else if (key == "snr_grid") c.snr_grid = as_list<double>(v, key);
  else if (key == "trials") c.trials = as_count(v, key);
  else if (key == "epsilon") c.bp.epsilon = as<double>(v, key);
  else if (key == "max_iters") c.bp.max_iters = as_count(v, key);
  else if (key == "damping") c.bp.damping = as<double>(v, key);
  else if (key == "grid_noise") c.bp.grid_noise = as<bool>(v, key);
  else if (key == "message_floor") c.bp.message_floor = as<double>(v, key);
  else if (key == "algorithms") {
    c.algorithms.clear();
    for (const auto& name : as_list<std::string>(v, key)) {
      c.algorithms.push_back(parse_algorithm(name));
    }
  } else if (key == "master_seed") c.master_seed = as<std::uint64_t>(v, key);
  else if (key == "identity") c.identity = as<bool>(v, key);
  else if (key == "threads") c.threads = as_count(v, key);
  else if (key == "clean_snr_db") c.clean_snr_db = as<double>(v, key);
  else if (key == "mn_grid") c.mn_grid = as_list<double>(v, key);
  else if (key == "nd_grid") c.nd_grid = as_list<std::size_t>(v, key);
  else if (key == "l_grid") c.l_grid = as_list<std::size_t>(v, key);
  else if (key == "trial_output") c.trial_output = as<bool>(v, key);
  else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

void apply_node(ExperimentConfig& c, const YAML::Node& root) {
  if (root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError("config must be a key-value mapping");
  for (const auto& kv : root) set_field(c, kv.first.as<std::string>(), kv.second);
}

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::string join_numbers(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(csv::number(x));
  return fmt::format("[{}]", fmt::join(parts, ", "));
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBhtBp: return "bht-bp";
    case Algorithm::kCsBp: return "cs-bp";
    case Algorithm::kOracle: return "oracle";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "bht-bp") return Algorithm::kBhtBp;
  if (name == "cs-bp") return Algorithm::kCsBp;
  if (name == "oracle") return Algorithm::kOracle;
  throw ConfigError(fmt::format("unknown algorithm '{}'", name));
}

void ExperimentConfig::validate() const {
  try {
    prior.validate();
    bp.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (snr_grid.empty()) throw ConfigError("snr_grid must be nonempty");
  if (!is_pow2(n_d) || n_d < 8) throw ConfigError(fmt::format("n_d = {} is not a power of two >= 8", n_d));
  for (std::size_t nd : nd_grid) {
    if (!is_pow2(nd) || nd < 8) throw ConfigError(fmt::format("nd_grid entry {} is not a power of two >= 8", nd));
  }
  if (algorithms.empty()) throw ConfigError("algorithms must be nonempty");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!identity && (l < 1 || l > m || m > n)) {
    throw ConfigError(fmt::format("need 1 <= l <= m <= n, got l={} m={} n={}", l, m, n));
  }
  if (identity && l < 1) throw ConfigError("l must be >= 1");
  for (double r : mn_grid) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError(fmt::format("mn_grid entry {} outside (0, 1]", r));
  }
}

std::string ExperimentConfig::to_line() const {
  std::vector<std::string> algs;
  for (auto a : algorithms) algs.emplace_back(to_string(a));
  std::vector<double> nds(nd_grid.begin(), nd_grid.end());
  std::vector<double> ls(l_grid.begin(), l_grid.end());
  return fmt::format(
      "{{n: {}, m: {}, l: {}, n_d: {}, q: {}, sigma_x: {}, x_min: {}, lambda: {}, "
      "snr_grid: {}, trials: {}, epsilon: {}, max_iters: {}, damping: {}, grid_noise: {}, message_floor: {}, algorithms: [{}], "
      "master_seed: {}, identity: {}, threads: {}, clean_snr_db: {}, mn_grid: {}, "
      "nd_grid: {}, l_grid: {}, trial_output: {}}}",
      n, m, l, n_d, csv::number(prior.q), csv::number(prior.sigma_x), csv::number(prior.x_min),
      csv::number(prior.lambda), join_numbers(snr_grid), trials, csv::number(bp.epsilon),
      bp.max_iters, csv::number(bp.damping), bp.grid_noise, csv::number(bp.message_floor), fmt::join(algs, ", "), master_seed, identity,
      threads, csv::number(clean_snr_db), join_numbers(mn_grid), join_numbers(nds),
      join_numbers(ls), trial_output);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  ExperimentConfig c;
  apply_config_text(c, buffer.str());
  return c;
}

void apply_config_text(ExperimentConfig& config, std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("config parse error: {}", e.msg));
  }
  apply_node(config, root);
}

void apply_override(ExperimentConfig& config, std::string_view key, std::string_view value) {
  YAML::Node node;
  try {
    node = YAML::Load(std::string(value));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("override '{}': {}", key, e.msg));
  }
  set_field(config, key, node);
}

void apply_assignment(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  apply_override(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

}  // namespace bhtbp
