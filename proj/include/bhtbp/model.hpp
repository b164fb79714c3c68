#pragma once

#include <cstddef>
#include <iosfwd>

#include "bhtbp/graph.hpp"
#include "bhtbp/rng.hpp"

namespace bhtbp {

/// Spike-and-dented-slab prior: with probability 1 - q the value is exactly
/// zero; otherwise it follows N(0, sigma_x^2) for |x| >= x_min and a flat
/// plateau of height `lambda` inside the dent |x| < x_min.
struct PriorSpec {
  double q = 0.05;
  double sigma_x = 5.0;
  double x_min = 1.25;
  double lambda = 1e-4;

  /// Throws ParameterError unless 0 <= q < 1, sigma_x > 0,
  /// 0 <= x_min < 3 sigma_x, lambda > 0, all finite.
  void validate() const;
};

struct NoiseSpec {
  double sigma_w = 1.0;
  void validate() const;
};

struct SignalInstance {
  Vector x0;
  Support s;
  std::size_t k = 0;
};

/// Bernoulli(q) support, N(0, sigma_x^2) values redrawn until |x| >= x_min.
SignalInstance generate_signal(std::size_t n, const PriorSpec& prior, const RngSeed& seed);

/// i.i.d. N(0, sigma_w^2).
Vector generate_noise(std::size_t m, const NoiseSpec& noise, const RngSeed& seed);

/// E[X^2 | S = 1] of the x_min-truncated Gaussian the signal is drawn from.
double nonzero_second_moment(const PriorSpec& prior);

/// 10 log10(E||Phi X||^2 / (M sigma_w^2)) for the 0/1 matrix of `graph`.
/// Throws ParameterError on q = 0 (no signal energy) or sigma_w = 0.
double snr_db(const FactorGraph& graph, const PriorSpec& prior, const NoiseSpec& noise);

/// Inverse of snr_db.
NoiseSpec sigma_w_for_snr(double target_snr_db, const FactorGraph& graph, const PriorSpec& prior);

/// One value per line, 17 significant digits.
void write_vector_csv(std::ostream& out, const Vector& v);
Vector read_vector_csv(std::istream& in);

}  // namespace bhtbp
