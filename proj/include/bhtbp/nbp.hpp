#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bhtbp/convolution.hpp"
#include "bhtbp/graph.hpp"
#include "bhtbp/model.hpp"
#include "bhtbp/pdfgrid.hpp"

namespace bhtbp {

struct BpConfig {
  double epsilon = 1e-5;
  std::size_t max_iters = 30;
  /// Exponent of the previous FtV message in the geometric update
  /// b <- b_new^(1 - damping) b_old^damping; 0 disables damping.
  double damping = 0.0;
  /// Widen the factor noise kernel to sigma_w^2 + t_s^2 / 12, the variance of
  /// quantizing a value to the grid. Without it, noise much narrower than
  /// t_s lets messages from different factors land on disjoint bins.
  bool grid_noise = false;
  /// FtV messages are raised to at least this fraction of their maximum.
  /// Sits above FFT roundoff so near-zero bins are deterministic, and keeps
  /// products of sharp messages from losing all mass; 0 disables.
  double message_floor = 1e-12;

  void validate() const;
};

/// Per-edge VtF and FtV messages for one BP run, stored edge-major in flat
/// buffers of num_edges * n_d values. Single-writer.
class MessageStore {
 public:
  MessageStore(std::size_t num_edges, const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::size_t num_edges() const { return num_edges_; }
  std::size_t iteration() const { return iteration_; }
  void set_iteration(std::size_t l) { iteration_ = l; }

  std::span<double> vtf(std::size_t e) { return {vtf_.data() + e * grid_.n_d, grid_.n_d}; }
  std::span<const double> vtf(std::size_t e) const {
    return {vtf_.data() + e * grid_.n_d, grid_.n_d};
  }
  std::span<double> ftv(std::size_t e) { return {ftv_.data() + e * grid_.n_d, grid_.n_d}; }
  std::span<const double> ftv(std::size_t e) const {
    return {ftv_.data() + e * grid_.n_d, grid_.n_d};
  }

 private:
  GridSpec grid_;
  std::size_t num_edges_;
  std::size_t iteration_ = 0;
  std::vector<double> vtf_;
  std::vector<double> ftv_;
};

struct PosteriorSet {
  std::vector<SampledPdf> posteriors;
  bool converged = false;
  std::size_t iterations = 0;
  double final_metric = 0.0;

  double mean_entropy() const;
};

struct TraceRow {
  std::size_t iter;
  double metric;
  double mean_entropy;
};

/// FtV messages all ones (uniform once normalized), VtF uniform, iteration 0.
MessageStore init_messages(const FactorGraph& graph, const GridSpec& grid);

/// a_{i->j} = normalize(prior * prod_{k in N_V(i) \ j} b_{k->i}).
void update_vtf(MessageStore& store, const FactorGraph& graph, const SampledPdf& prior_pdf);

/// Measurement-side state reused across iterations: per-factor noise kernels
/// sampled at the sub-bin offset of z_j, and transform sizes.
class FactorKernels {
 public:
  FactorKernels(const FactorGraph& graph, const GridSpec& grid, const NoiseSpec& noise,
                const Vector& z);

  std::span<const double> kernel(std::size_t j) const {
    return {kernels_.data() + j * n_d_, n_d_};
  }
  std::size_t transform_size(std::size_t j) const { return sizes_[j]; }
  /// floor(z_j / t_s): the whole-bin part of the measurement.
  long long whole_bins(std::size_t j) const { return whole_bins_[j]; }

 private:
  std::size_t n_d_;
  std::vector<double> kernels_;
  std::vector<std::size_t> sizes_;
  std::vector<long long> whole_bins_;
};

/// b_{j->i}[m] is the likelihood of z_j given X_i = x_m with the other
/// neighbours of j marginalized under their VtF messages:
///   sum over partial sums u of P(u) N(z_j - x_m - u; 0, sigma_w^2).
/// The partial-sum distribution and the noise kernel are combined by one
/// full-length FFT convolution per edge; the result is read off at
/// u + w = z_j - x_m by index reflection. Each fresh message is raised to
/// `floor` times its maximum, normalized, then damped.
void update_ftv(MessageStore& store, const FactorGraph& graph, const FactorKernels& kernels,
                double damping = 0.0, double floor = 0.0);

/// p_i = normalize(prior * prod_{k in N_V(i)} b_{k->i}).
PosteriorSet compute_posteriors(const MessageStore& store, const FactorGraph& graph,
                                const SampledPdf& prior_pdf);

/// (1/N) sum_i ||p_i - q_i||^2 / ||p_i||^2.
double convergence_metric(const PosteriorSet& current, const PosteriorSet& previous);

/// Noise used for the factor kernels under `config`.
NoiseSpec kernel_noise(const NoiseSpec& noise, const GridSpec& grid, const BpConfig& config);

/// Flooding-schedule BP until convergence_metric <= epsilon or max_iters.
/// Degenerate messages propagate as DegenerateMessageError with the
/// iteration in the message. When `trace` is non-null, one row per iteration
/// is appended.
PosteriorSet run_bp(const FactorGraph& graph, const SampledPdf& prior_pdf,
                    const NoiseSpec& noise, const Vector& z, const BpConfig& config,
                    std::vector<TraceRow>* trace = nullptr);

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

}  // namespace bhtbp
