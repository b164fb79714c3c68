#include "bhtbp/pdfgrid.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "bhtbp/convolution.hpp"
#include "bhtbp/errors.hpp"
#include "bhtbp/numeric.hpp"

namespace bhtbp {

GridSpec make_grid(double sigma_x, std::size_t n_d) {
  if (n_d < 8 || (n_d & (n_d - 1)) != 0) {
    throw ParameterError(fmt::format("n_d = {} must be a power of two >= 8", n_d));
  }
  if (!std::isfinite(sigma_x) || sigma_x <= 0.0) {
    throw ParameterError(fmt::format("grid sigma_x = {} must be finite and > 0", sigma_x));
  }
  return GridSpec{n_d, sigma_x, 6.0 * sigma_x / static_cast<double>(n_d)};
}

SampledPdf::SampledPdf(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_d) {
    throw DimensionError(
        fmt::format("sampled pdf has {} values, grid has {}", values_.size(), grid_.n_d));
  }
  for (double& v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw NumericalError(fmt::format("sampled pdf value {} is not finite and >= 0", v));
    }
    if (v < kFlushThreshold) v = 0.0;
  }
}

double SampledPdf::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

std::vector<double> sample_slab(const PriorSpec& prior, const GridSpec& grid) {
  prior.validate();
  std::vector<double> slab(grid.n_d, 0.0);
  for (std::size_t m = 0; m < grid.n_d; ++m) {
    if (m == grid.zero_index()) continue;
    const double x = grid.x(m);
    slab[m] = std::abs(x) >= prior.x_min ? numeric::normal_pdf(x, prior.sigma_x) : prior.lambda;
  }
  const double total = std::accumulate(slab.begin(), slab.end(), 0.0);
  for (double& v : slab) v /= total;
  return slab;
}

SampledPdf sample_prior(const PriorSpec& prior, const GridSpec& grid) {
  std::vector<double> values = sample_slab(prior, grid);
  for (double& v : values) v *= prior.q;
  values[grid.zero_index()] = 1.0 - prior.q;
  return SampledPdf(grid, std::move(values));
}

SampledPdf sample_noise_pdf(const NoiseSpec& noise, const GridSpec& grid) {
  noise.validate();
  std::vector<double> values(grid.n_d);
  for (std::size_t m = 0; m < grid.n_d; ++m) {
    const double u = grid.x(m) / noise.sigma_w;
    values[m] = std::exp(-0.5 * u * u);
  }
  return normalize(SampledPdf(grid, std::move(values)));
}

bool noise_under_resolved(const NoiseSpec& noise, const GridSpec& grid) {
  return noise.sigma_w < 0.5 * grid.t_s;
}

SampledPdf normalize(const SampledPdf& p) {
  const double total = p.sum();
  if (!(total > 0.0)) throw DegenerateMessageError("cannot normalize a pdf with zero mass");
  std::vector<double> values(p.values().begin(), p.values().end());
  for (double& v : values) v /= total;
  return SampledPdf(p.grid(), std::move(values));
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return std::max(h, 0.0);
}

double entropy(const SampledPdf& p) { return entropy(p.values()); }

std::size_t full_convolution_length(std::span<const std::span<const double>> inputs) {
  std::size_t len = 1;
  for (const auto& in : inputs) {
    if (in.empty()) throw DimensionError("convolve_many: empty input");
    len += in.size() - 1;
  }
  return len;
}

std::vector<double> convolve_many(std::span<const std::span<const double>> inputs,
                                  std::size_t out_len) {
  if (inputs.empty()) throw DimensionError("convolve_many: needs at least one input");
  const std::size_t full = full_convolution_length(inputs);
  std::vector<double> out(out_len, 0.0);
  if (inputs.size() == 1) {
    std::copy_n(inputs[0].begin(), std::min(out_len, inputs[0].size()), out.begin());
    return out;
  }
  const std::size_t size = next_pow2(full);
  const std::size_t bins = size / 2 + 1;
  std::vector<Complex> acc(bins);
  std::vector<Complex> spec(bins);
  forward_fft(inputs[0], size, acc);
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    forward_fft(inputs[k], size, spec);
    for (std::size_t b = 0; b < bins; ++b) acc[b] *= spec[b];
  }
  std::vector<double> time(size);
  inverse_fft(acc, size, time);
  std::copy_n(time.begin(), std::min(out_len, full), out.begin());
  return out;
}

void write_pdf_csv(std::ostream& out, const SampledPdf& p) {
  out << "index,x,value\n";
  for (std::size_t m = 0; m < p.size(); ++m) {
    out << fmt::format("{},{:.17g},{:.17g}\n", m, p.grid().x(m), p[m]);
  }
}

}  // namespace bhtbp
