#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhtbp/config.hpp"
#include "bhtbp/detect.hpp"
#include "bhtbp/estimate.hpp"
#include "bhtbp/graph.hpp"
#include "bhtbp/nbp.hpp"
#include "bhtbp/pdfgrid.hpp"

namespace bhtbp {

struct TrialRecord {
  std::size_t trial_id = 0;
  Algorithm algorithm = Algorithm::kOracle;
  double snr_db = 0.0;
  bool support_exact = false;
  double nmse = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// BP raised a numerical failure; nmse is NaN and support_exact is false.
  bool failed = false;
  double mean_entropy = 0.0;
  /// Oracle MSE* of this trial's support; NaN when the support is empty.
  double mse_star = 0.0;
  double seconds = 0.0;
};

/// State shared by every trial of one experiment: the matrix (drawn once
/// from the master seed), the grid, the prior samples and BHT references.
class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& config);

  const ExperimentConfig& config() const { return config_; }
  const FactorGraph& graph() const { return graph_; }
  const GridSpec& grid() const { return grid_; }
  const SampledPdf& prior_pdf() const { return prior_pdf_; }
  const ReferenceVectors& references() const { return refs_; }

  /// sigma_w for a target SNR: the measurement-side convention for LDPC
  /// matrices, the scalar-channel convention in identity mode.
  NoiseSpec noise_for_snr(double snr_db) const;

 private:
  ExperimentConfig config_;
  FactorGraph graph_;
  GridSpec grid_;
  SampledPdf prior_pdf_;
  ReferenceVectors refs_;
};

/// One fresh (x0, w) draw, seeded by trial_id only, and every enabled
/// algorithm run on it. BP is run once and shared by bht-bp and cs-bp.
std::vector<TrialRecord> run_trial(const Experiment& experiment, double snr_db,
                                   std::size_t trial_id);

/// Trials 0..trials-1 on a worker pool, merged in trial order.
std::vector<TrialRecord> run_trials(const Experiment& experiment, double snr_db);

struct SummaryRow {
  double param = 0.0;
  Algorithm algorithm = Algorithm::kOracle;
  double snr_db = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double success_rate = 0.0;
  /// Mean over non-failed trials.
  double mean_nmse = 0.0;
  double mse_star = 0.0;
  /// Analytic success probability in identity mode, NaN otherwise.
  double bound_p_succ = 0.0;
  double quant_floor = 0.0;
  double mean_entropy = 0.0;
  double mean_iterations = 0.0;
  double seconds = 0.0;
};

struct SweepResult {
  /// Name of the swept quantity: `snr`, `m_over_n`, `n_d` or `l`.
  std::string sweep;
  std::string config_line;
  std::vector<SummaryRow> summary;
  /// Trial-level rows, aligned with `trial_params`.
  std::vector<TrialRecord> trials;
  std::vector<double> trial_params;
};

SweepResult sweep_snr(const ExperimentConfig& config);
SweepResult sweep_mn(const ExperimentConfig& config, std::span<const double> mn_grid);
SweepResult sweep_nd(const ExperimentConfig& config, std::span<const std::size_t> nd_grid);
SweepResult sweep_l(const ExperimentConfig& config, std::span<const std::size_t> l_grid);

/// Mean entropy per m/n point of a sweep_mn result, for entropy_threshold.
std::vector<std::pair<double, double>> entropy_curve(const SweepResult& result);

/// Summary table. First line is `# config: <resolved config>`; `seconds` is
/// the last column so it can be excluded from reproducibility hashes.
void write_summary_csv(std::ostream& out, const SweepResult& result);
void write_trials_csv(std::ostream& out, const SweepResult& result);

/// Single-instance recovery with bht-bp or cs-bp.
RecoveryResult recover(const FactorGraph& graph, const Vector& z, const PriorSpec& prior,
                       const NoiseSpec& noise, std::size_t n_d, const BpConfig& bp,
                       Algorithm algorithm);

}  // namespace bhtbp
