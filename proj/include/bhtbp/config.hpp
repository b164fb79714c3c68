#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bhtbp/model.hpp"
#include "bhtbp/nbp.hpp"

namespace bhtbp {

enum class Algorithm { kBhtBp, kCsBp, kOracle };

std::string_view to_string(Algorithm a);
/// Accepts `bht-bp`, `cs-bp`, `oracle`; throws ConfigError otherwise.
Algorithm parse_algorithm(std::string_view name);

struct ExperimentConfig {
  std::size_t n = 256;
  std::size_t m = 128;
  std::size_t l = 5;
  std::size_t n_d = 128;
  PriorSpec prior;
  std::vector<double> snr_grid{10.0, 20.0, 30.0, 40.0};
  std::size_t trials = 200;
  BpConfig bp;
  std::vector<Algorithm> algorithms{Algorithm::kBhtBp, Algorithm::kCsBp, Algorithm::kOracle};
  std::uint64_t master_seed = 1;
  /// Phi = I (decoupled scalar channels). Forces m = n; SNR follows the
  /// scalar-channel convention with `l` as the bookkeeping column weight, and
  /// the summary gains the analytic bound column.
  bool identity = false;
  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 0;
  /// SNR used by the m/n, n_d and l sweeps.
  double clean_snr_db = 50.0;
  std::vector<double> mn_grid{0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  std::vector<std::size_t> nd_grid{32, 64, 128, 256};
  std::vector<std::size_t> l_grid{2, 3, 4, 5, 6, 8, 10, 12};
  /// Also write one row per trial and algorithm.
  bool trial_output = false;

  /// Throws ConfigError on any violated invariant.
  void validate() const;

  /// Single-line flow mapping of every field, 17 significant digits.
  std::string to_line() const;
};

/// Reads a YAML mapping; unknown keys are errors. Missing keys keep defaults.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses `text` as a YAML mapping on top of `config`.
void apply_config_text(ExperimentConfig& config, std::string_view text);

/// Sets one field from its YAML-encoded value, e.g. ("snr_grid", "[5, 10]").
void apply_override(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Splits `key=value` and forwards to apply_override.
void apply_assignment(ExperimentConfig& config, std::string_view assignment);

}  // namespace bhtbp
