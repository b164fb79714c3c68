#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "bhtbp/model.hpp"

namespace bhtbp {

/// Values below this are flushed to zero to keep products out of the
/// denormal range.
inline constexpr double kFlushThreshold = 1e-300;

/// Uniform grid over [-3 sigma_x, 3 sigma_x) with n_d points; point m sits at
/// x_m = m t_s - 3 sigma_x, so x = 0 is exactly point n_d / 2.
struct GridSpec {
  std::size_t n_d = 0;
  double sigma_x = 0.0;
  double t_s = 0.0;

  double origin() const { return -3.0 * sigma_x; }
  double x(std::size_t m) const { return static_cast<double>(m) * t_s + origin(); }
  std::size_t zero_index() const { return n_d / 2; }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws ParameterError unless n_d is a power of two >= 8 and sigma_x > 0.
GridSpec make_grid(double sigma_x, std::size_t n_d);

/// A nonnegative vector of probability masses on a GridSpec. Messages and
/// posteriors are masses (they sum to one once normalized), not densities.
class SampledPdf {
 public:
  SampledPdf() = default;
  /// Validates finiteness and nonnegativity; flushes values below
  /// kFlushThreshold to zero.
  SampledPdf(const GridSpec& grid, std::vector<double> values);

  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t m) const { return values_[m]; }
  std::size_t size() const { return values_.size(); }
  double sum() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Spike of mass 1 - q on the zero bin plus a slab of total mass q.
SampledPdf sample_prior(const PriorSpec& prior, const GridSpec& grid);

/// Discrete conditional p_{X|S=1}: N(x; 0, sigma_x^2) samples for
/// |x| >= x_min and lambda inside the dent, zero on the zero bin, summing to 1.
std::vector<double> sample_slab(const PriorSpec& prior, const GridSpec& grid);

/// N(x_m; 0, sigma_w^2) on the grid, normalized.
SampledPdf sample_noise_pdf(const NoiseSpec& noise, const GridSpec& grid);

/// True when sigma_w < t_s / 2: the noise kernel is narrower than a bin.
bool noise_under_resolved(const NoiseSpec& noise, const GridSpec& grid);

/// Rescales to unit sum. Throws DegenerateMessageError on zero mass.
SampledPdf normalize(const SampledPdf& p);

/// -sum p ln p in nats, with 0 ln 0 = 0.
double entropy(const SampledPdf& p);
double entropy(std::span<const double> p);

/// Linear convolution of all inputs via zero-padded FFT. The output holds
/// the first `out_len` samples of the full convolution (zero-padded when
/// out_len exceeds the full length sum(len) - (k - 1)).
std::vector<double> convolve_many(std::span<const std::span<const double>> inputs,
                                  std::size_t out_len);

/// Full linear convolution length of the inputs.
std::size_t full_convolution_length(std::span<const std::span<const double>> inputs);

/// Debug dump, rows `index,x,value`.
void write_pdf_csv(std::ostream& out, const SampledPdf& p);

}  // namespace bhtbp
