#include "bhtbp/model.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"
#include "bhtbp/numeric.hpp"

namespace bhtbp {
namespace {

constexpr long kMaxRedraws = 1'000'000;

bool finite_all(std::initializer_list<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

void PriorSpec::validate() const {
  if (!finite_all({q, sigma_x, x_min, lambda})) {
    throw ParameterError("prior parameters must be finite");
  }
  if (q < 0.0 || q >= 1.0) throw ParameterError(fmt::format("q = {} outside [0, 1)", q));
  if (sigma_x <= 0.0) throw ParameterError(fmt::format("sigma_x = {} must be > 0", sigma_x));
  if (x_min < 0.0 || x_min >= 3.0 * sigma_x) {
    throw ParameterError(fmt::format("x_min = {} outside [0, 3 sigma_x)", x_min));
  }
  if (lambda <= 0.0) throw ParameterError(fmt::format("lambda = {} must be > 0", lambda));
}

void NoiseSpec::validate() const {
  if (!std::isfinite(sigma_w) || sigma_w <= 0.0) {
    throw ParameterError(fmt::format("sigma_w = {} must be finite and > 0", sigma_w));
  }
}

SignalInstance generate_signal(std::size_t n, const PriorSpec& prior, const RngSeed& seed) {
  prior.validate();
  if (n == 0) throw ParameterError("generate_signal: n must be >= 1");
  Engine engine = make_engine(seed);
  std::bernoulli_distribution state(prior.q);
  std::normal_distribution<double> value(0.0, prior.sigma_x);

  SignalInstance sig{Vector::Zero(static_cast<Eigen::Index>(n)), Support(n, 0), 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (!state(engine)) continue;
    double x = value(engine);
    long redraws = 0;
    while (std::abs(x) < prior.x_min) {
      if (++redraws > kMaxRedraws) {
        throw ParameterError(fmt::format(
            "rejection sampling exceeded {} redraws (x_min = {} too large)", kMaxRedraws,
            prior.x_min));
      }
      x = value(engine);
    }
    // x == 0.0 has probability zero but would break s_i = 1 <=> x_i != 0.
    if (x == 0.0) x = std::nextafter(0.0, 1.0);
    sig.x0(static_cast<Eigen::Index>(i)) = x;
    sig.s[i] = 1;
    ++sig.k;
  }
  return sig;
}

Vector generate_noise(std::size_t m, const NoiseSpec& noise, const RngSeed& seed) {
  noise.validate();
  if (m == 0) throw ParameterError("generate_noise: m must be >= 1");
  Engine engine = make_engine(seed);
  std::normal_distribution<double> dist(0.0, noise.sigma_w);
  Vector w(static_cast<Eigen::Index>(m));
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = dist(engine);
  return w;
}

double nonzero_second_moment(const PriorSpec& prior) {
  prior.validate();
  const double s = prior.sigma_x;
  if (prior.x_min == 0.0) return s * s;
  // Upper limit 12 sigma leaves a tail below 1e-30 of the mass.
  const double hi = prior.x_min + 12.0 * s;
  auto pdf = [s](double x) { return numeric::normal_pdf(x, s); };
  const double mass = numeric::integrate(pdf, prior.x_min, hi, 1e-13);
  const double second =
      numeric::integrate([&](double x) { return x * x * pdf(x); }, prior.x_min, hi,
                         1e-11 * s * s);
  return second / mass;
}

double snr_db(const FactorGraph& graph, const PriorSpec& prior, const NoiseSpec& noise) {
  prior.validate();
  if (!(noise.sigma_w > 0.0) || !std::isfinite(noise.sigma_w)) {
    throw ParameterError("snr_db: sigma_w must be finite and > 0 (infinite SNR)");
  }
  if (prior.q == 0.0) throw ParameterError("snr_db: q = 0 gives zero signal energy");
  // E||Phi X||^2 = (#edges) q E[X^2 | S = 1] for independent zero-mean X_i.
  const double energy = static_cast<double>(graph.num_edges()) * prior.q *
                        nonzero_second_moment(prior);
  const double noise_energy =
      static_cast<double>(graph.m()) * noise.sigma_w * noise.sigma_w;
  return 10.0 * std::log10(energy / noise_energy);
}

NoiseSpec sigma_w_for_snr(double target_snr_db, const FactorGraph& graph,
                          const PriorSpec& prior) {
  prior.validate();
  if (!std::isfinite(target_snr_db)) throw ParameterError("target SNR must be finite");
  if (prior.q == 0.0) throw ParameterError("sigma_w_for_snr: q = 0 gives zero signal energy");
  const double energy = static_cast<double>(graph.num_edges()) * prior.q *
                        nonzero_second_moment(prior) / static_cast<double>(graph.m());
  return NoiseSpec{std::sqrt(energy / std::pow(10.0, target_snr_db / 10.0))};
}

void write_vector_csv(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << fmt::format("{:.17g}\n", v(i));
}

Vector read_vector_csv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("vector csv: cannot parse `{}`", line));
    }
    if (line.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw ConfigError(fmt::format("vector csv: trailing characters in `{}`", line));
    }
    values.push_back(v);
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace bhtbp
