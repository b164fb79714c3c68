#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bhtbp/model.hpp"

namespace bhtbp {

/// Decoupled scalar Gaussian channel Z = X + W used for the Phi = I bound.
struct ScalarChannelSpec {
  PriorSpec prior;
  double sigma_w = 1.0;
  /// Column weight used only to translate SNR into sigma_w.
  std::size_t l = 1;
};

/// A ScalarChannelSpec with the H1 likelihood normalization precomputed.
/// Immutable after construction, so safe to share across threads.
class ScalarChannel {
 public:
  explicit ScalarChannel(const ScalarChannelSpec& spec);

  const ScalarChannelSpec& spec() const { return spec_; }
  double sigma_total() const { return sigma_total_; }
  /// Integral of the unnormalized H1 likelihood over [-10, 10] sigma_total.
  double normalization() const { return normalization_; }

  /// Closed-form marginal of N(z; x, sigma_w^2) against the dented slab,
  /// before normalization.
  double unnormalized_h1(double z) const;

 private:
  ScalarChannelSpec spec_;
  double sigma_total_ = 0.0;
  double normalization_ = 0.0;
};

struct BoundResult {
  double gamma_prime = 0.0;
  double p_ser_h0 = 0.0;
  double p_ser_h1 = 0.0;
  double p_ser = 0.0;
  double p_succ_n = 0.0;
};

/// f(z | H0) = N(z; 0, sigma_w^2).
double likelihood_h0(double z, const ScalarChannel& channel);
/// f(z | H1), normalized to unit integral.
double likelihood_h1(double z, const ScalarChannel& channel);
/// log f(z | H1) - log f(z | H0), finite well past where f(z | H0) underflows.
double log_likelihood_ratio(double z, const ScalarChannel& channel);

/// Smallest z > 0 where f(z|H1) / f(z|H0) = (1 - q) / q, located by a scan
/// over (0, 12 sigma_total] and bisection to full double precision.
/// Throws NoThresholdError when the ratio never crosses the threshold there.
double solve_gamma_prime(const ScalarChannel& channel, double q);

/// Conditional and total state error rates of the |z| >= gamma detector.
BoundResult ser_for_threshold(const ScalarChannel& channel, double q, double gamma,
                              std::size_t n);

/// ser_for_threshold at gamma = solve_gamma_prime(channel, q).
BoundResult ser_bound(const ScalarChannel& channel, double q, std::size_t n);

/// sigma_w for a target SNR under the scalar-channel convention
/// SNR = 10 log10(q L sigma_x^2 / sigma_w^2).
double bound_sigma_w(double snr_db, const PriorSpec& prior, std::size_t l);

struct BoundRow {
  double snr_db;
  BoundResult result;
};

/// One ser_bound evaluation per SNR point.
std::vector<BoundRow> bound_curve(const PriorSpec& prior, std::size_t l,
                                  std::span<const double> snr_grid, std::size_t n);

/// Rows `snr_db,gamma_prime,p_ser_h0,p_ser_h1,p_ser,p_succ`.
void write_bound_csv(std::ostream& out, std::span<const BoundRow> rows);

/// Normalized MSE of reading values off a grid with n_d samples: 3 / n_d^2.
double quantization_floor(std::size_t n_d);

/// Smallest sampling rate whose mean posterior entropy is <= 1e-3 nats, or
/// nullopt when no point qualifies. Input must be sorted by rate.
std::optional<double> entropy_threshold(std::span<const std::pair<double, double>> sweep,
                                        double level = 1e-3);

}  // namespace bhtbp
