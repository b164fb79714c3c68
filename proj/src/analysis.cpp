#include "bhtbp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"
#include "bhtbp/numeric.hpp"

namespace bhtbp {

ScalarChannel::ScalarChannel(const ScalarChannelSpec& spec) : spec_(spec) {
  spec_.prior.validate();
  if (!(spec_.sigma_w > 0.0) || !std::isfinite(spec_.sigma_w)) {
    throw ParameterError(fmt::format("sigma_w = {} must be finite and > 0", spec_.sigma_w));
  }
  const double sx = spec_.prior.sigma_x;
  sigma_total_ = std::sqrt(spec_.sigma_w * spec_.sigma_w + sx * sx);
  const double lim = 10.0 * sigma_total_;
  // Split at the dent edge so the adaptive rule sees the kink.
  const double xm = spec_.prior.x_min;
  auto f = [this](double z) { return unnormalized_h1(z); };
  // The integrand is even.
  normalization_ = xm > 0.0 ? 2.0 * (numeric::integrate(f, 0.0, xm, 1e-10) +
                                     numeric::integrate(f, xm, lim, 1e-10))
                            : 2.0 * numeric::integrate(f, 0.0, lim, 1e-10);
  if (!(normalization_ > 0.0)) throw NumericalError("H1 likelihood has zero mass");
}

double ScalarChannel::unnormalized_h1(double z) const {
  const double sw2 = spec_.sigma_w * spec_.sigma_w;
  const double sx2 = spec_.prior.sigma_x * spec_.prior.sigma_x;
  const double xm = spec_.prior.x_min;
  const double precision = 1.0 / sw2 + 1.0 / sx2;
  const double root = std::sqrt(precision);
  const double a = (xm * precision - z / sw2) / root;
  const double b = (xm * precision + z / sw2) / root;
  // 1 - erf(a)/2 - erf(b)/2 written with erfc to avoid cancellation.
  const double outside = 0.5 * std::erfc(a / std::numbers::sqrt2) +
                         0.5 * std::erfc(b / std::numbers::sqrt2);
  const double slab = numeric::normal_pdf(z, std::sqrt(sw2 + sx2)) * outside;
  const double scale = spec_.sigma_w * std::numbers::sqrt2;
  const double dent =
      0.5 * spec_.prior.lambda * (std::erf((xm - z) / scale) + std::erf((xm + z) / scale));
  return slab + dent;
}

double likelihood_h0(double z, const ScalarChannel& channel) {
  return numeric::normal_pdf(z, channel.spec().sigma_w);
}

double likelihood_h1(double z, const ScalarChannel& channel) {
  return channel.unnormalized_h1(z) / channel.normalization();
}

double log_likelihood_ratio(double z, const ScalarChannel& channel) {
  const double sw = channel.spec().sigma_w;
  const double log_h0 = -0.5 * (z / sw) * (z / sw) - std::log(sw * std::sqrt(2.0 * std::numbers::pi));
  return std::log(likelihood_h1(z, channel)) - log_h0;
}

double solve_gamma_prime(const ScalarChannel& channel, double q) {
  if (!(q > 0.0 && q <= 0.5)) throw ParameterError(fmt::format("q = {} outside (0, 1/2]", q));
  const double target = std::log((1.0 - q) / q);
  auto excess = [&](double z) { return log_likelihood_ratio(z, channel) - target; };

  const double hi = 12.0 * channel.sigma_total();
  const double step = std::min(hi / 20000.0, channel.spec().sigma_w / 20.0);
  double lo_z = 0.0;
  double lo_v = excess(0.0);
  for (double z = step; z <= hi + 0.5 * step; z += step) {
    const double v = excess(z);
    if (lo_v < 0.0 && v >= 0.0) {
      return numeric::bisect(excess, lo_z, z, 0.0);
    }
    lo_z = z;
    lo_v = v;
  }
  throw NoThresholdError(fmt::format(
      "likelihood ratio never crosses (1 - q) / q = {} on (0, {}]", (1.0 - q) / q, hi));
}

BoundResult ser_for_threshold(const ScalarChannel& channel, double q, double gamma,
                              std::size_t n) {
  if (!(gamma >= 0.0)) throw ParameterError("threshold must be >= 0");
  BoundResult r;
  r.gamma_prime = gamma;
  r.p_ser_h0 = std::erfc(gamma / (channel.spec().sigma_w * std::numbers::sqrt2));
  if (std::isinf(gamma)) {
    r.p_ser_h1 = 1.0;
  } else {
    auto f = [&](double z) { return likelihood_h1(z, channel); };
    const double xm = channel.spec().prior.x_min;
    double inside = 0.0;
    if (xm > 0.0 && gamma > xm) {
      inside = numeric::integrate(f, 0.0, xm, 1e-10) + numeric::integrate(f, xm, gamma, 1e-10);
    } else {
      inside = numeric::integrate(f, 0.0, gamma, 1e-10);
    }
    r.p_ser_h1 = std::clamp(2.0 * inside, 0.0, 1.0);
  }
  r.p_ser = (1.0 - q) * r.p_ser_h0 + q * r.p_ser_h1;
  r.p_succ_n = std::exp(static_cast<double>(n) * std::log1p(-r.p_ser));
  return r;
}

BoundResult ser_bound(const ScalarChannel& channel, double q, std::size_t n) {
  return ser_for_threshold(channel, q, solve_gamma_prime(channel, q), n);
}

double bound_sigma_w(double snr_db, const PriorSpec& prior, std::size_t l) {
  prior.validate();
  if (!std::isfinite(snr_db)) throw ParameterError("SNR must be finite");
  const double signal = prior.q * static_cast<double>(l) * prior.sigma_x * prior.sigma_x;
  return std::sqrt(signal / std::pow(10.0, snr_db / 10.0));
}

std::vector<BoundRow> bound_curve(const PriorSpec& prior, std::size_t l,
                                  std::span<const double> snr_grid, std::size_t n) {
  std::vector<BoundRow> rows;
  rows.reserve(snr_grid.size());
  for (double snr : snr_grid) {
    const ScalarChannel channel({prior, bound_sigma_w(snr, prior, l), l});
    rows.push_back({snr, ser_bound(channel, prior.q, n)});
  }
  return rows;
}

void write_bound_csv(std::ostream& out, std::span<const BoundRow> rows) {
  out << "snr_db,gamma_prime,p_ser_h0,p_ser_h1,p_ser,p_succ\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", row.snr_db,
                       r.gamma_prime, r.p_ser_h0, r.p_ser_h1, r.p_ser, r.p_succ_n);
  }
}

double quantization_floor(std::size_t n_d) {
  if (n_d < 2) throw ParameterError("quantization_floor needs n_d >= 2");
  const double nd = static_cast<double>(n_d);
  return 3.0 / (nd * nd);
}

std::optional<double> entropy_threshold(std::span<const std::pair<double, double>> sweep,
                                        double level) {
  if (sweep.empty()) throw ParameterError("entropy_threshold: empty sweep");
  if (!std::is_sorted(sweep.begin(), sweep.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; })) {
    throw ParameterError("entropy_threshold: sweep must be sorted by sampling rate");
  }
  for (const auto& [rate, h] : sweep) {
    if (h <= level) return rate;
  }
  return std::nullopt;
}

}  // namespace bhtbp
