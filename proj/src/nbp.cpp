#include "bhtbp/nbp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"

namespace bhtbp {
namespace {

// Operands below this switch the product to the log domain.
constexpr double kLogDomainTrigger = 1e-280;
// A linear-domain product whose mass falls below this is recomputed in logs.
constexpr double kMinLinearMass = 1e-250;

double normalize_in_place(std::span<double> v) {
  double total = 0.0;
  for (double& x : v) {
    if (!(x >= kFlushThreshold)) x = 0.0;  // also clears negatives and NaN
    total += x;
  }
  if (total > 0.0 && std::isfinite(total)) {
    for (double& x : v) x /= total;
  }
  return total;
}

bool needs_log_domain(std::span<const double> v) {
  for (double x : v) {
    if (x > 0.0 && x < kLogDomainTrigger) return true;
  }
  return false;
}

// out = normalize(base * prod_{l != skip} ops[l]) in the log domain.
// Returns false when every bin is zero.
bool log_product(std::span<const double> base, std::span<const std::span<const double>> ops,
                 std::size_t skip, std::span<double> out) {
  const std::size_t n = base.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < n; ++m) {
    double s = base[m] > 0.0 ? std::log(base[m]) : -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < ops.size() && std::isfinite(s); ++l) {
      if (l == skip) continue;
      s = ops[l][m] > 0.0 ? s + std::log(ops[l][m]) : -std::numeric_limits<double>::infinity();
    }
    out[m] = s;
    best = std::max(best, s);
  }
  if (!std::isfinite(best)) return false;
  for (std::size_t m = 0; m < n; ++m) out[m] = std::exp(out[m] - best);
  return normalize_in_place(out) > 0.0;
}

struct ProductScratch {
  std::vector<double> prefix;
  std::vector<double> suffix;
};
thread_local ProductScratch t_products;

// For each k < ops.size(), outs[k] = normalize(base * prod_{l != k} ops[l]).
// When `full` is non-empty it receives normalize(base * prod_l ops[l]).
// `label(k)` names the output for error messages (k == ops.size() is full).
template <typename Label>
void leave_one_out_products(std::span<const double> base,
                            std::span<const std::span<const double>> ops,
                            std::span<const std::span<double>> outs, std::span<double> full,
                            Label&& label) {
  const std::size_t n = base.size();
  const std::size_t count = ops.size();
  bool use_log = needs_log_domain(base);
  for (std::size_t l = 0; l < count && !use_log; ++l) use_log = needs_log_domain(ops[l]);

  auto finish_log = [&](std::size_t k, std::span<double> out) {
    if (!log_product(base, ops, k, out)) {
      throw DegenerateMessageError(fmt::format("{} lost all mass", label(k)));
    }
  };

  if (!use_log) {
    auto& pre = t_products.prefix;
    auto& suf = t_products.suffix;
    pre.resize((count + 1) * n);
    suf.resize((count + 1) * n);
    std::copy(base.begin(), base.end(), pre.begin());
    for (std::size_t l = 0; l < count; ++l) {
      for (std::size_t m = 0; m < n; ++m) pre[(l + 1) * n + m] = pre[l * n + m] * ops[l][m];
    }
    std::fill(suf.begin() + static_cast<std::ptrdiff_t>(count * n), suf.end(), 1.0);
    for (std::size_t l = count; l-- > 0;) {
      for (std::size_t m = 0; m < n; ++m) suf[l * n + m] = ops[l][m] * suf[(l + 1) * n + m];
    }
    for (std::size_t k = 0; k < outs.size(); ++k) {
      auto out = outs[k];
      for (std::size_t m = 0; m < n; ++m) out[m] = pre[k * n + m] * suf[(k + 1) * n + m];
      if (!(normalize_in_place(out) > kMinLinearMass)) finish_log(k, out);
    }
    if (!full.empty()) {
      std::copy_n(pre.begin() + static_cast<std::ptrdiff_t>(count * n), n, full.begin());
      if (!(normalize_in_place(full) > kMinLinearMass)) finish_log(count, full);
    }
    return;
  }
  for (std::size_t k = 0; k < outs.size(); ++k) finish_log(k, outs[k]);
  if (!full.empty()) finish_log(count, full);
}

struct FtvScratch {
  std::vector<Complex> spectra;  // d rows of `bins`
  std::vector<Complex> suffix;   // d + 1 rows of `bins`
  std::vector<Complex> prefix;
  std::vector<Complex> work;
  std::vector<double> time;
  std::vector<double> message;
  std::vector<double> tilted;
  std::vector<double> means;
  std::vector<std::span<const double>> others;
  std::vector<Complex> edge_spectrum;
};

// message[m] = conv[anchor - m] exp(theta m), rescaled so the largest
// exponent is zero; samples outside [0, last] or nonpositive read as zero.
void read_window(std::span<const double> conv, long long anchor, long long last, double theta,
                 std::span<double> message) {
  const std::size_t n_d = message.size();
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < n_d; ++m) {
    const long long p = anchor - static_cast<long long>(m);
    if (p >= 0 && p <= last && conv[static_cast<std::size_t>(p)] > 0.0) {
      peak = std::max(peak, theta * static_cast<double>(m));
    }
  }
  for (std::size_t m = 0; m < n_d; ++m) {
    const long long p = anchor - static_cast<long long>(m);
    const double v = (p >= 0 && p <= last) ? conv[static_cast<std::size_t>(p)] : 0.0;
    message[m] = v > 0.0 ? v * std::exp(theta * static_cast<double>(m) - peak) : 0.0;
  }
}

// Largest tilt magnitude per index step; keeps exp(theta * index) finite.
double max_tilt(std::size_t n) { return 600.0 / static_cast<double>(n); }

// out[m] = in[m] exp(theta m), scaled so the largest value is 1.
void tilt(std::span<const double> in, double theta, std::span<double> out) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < in.size(); ++m) {
    if (in[m] > 0.0) top = std::max(top, std::log(in[m]) + theta * static_cast<double>(m));
  }
  for (std::size_t m = 0; m < in.size(); ++m) {
    out[m] = in[m] > 0.0
                 ? std::exp(std::log(in[m]) + theta * static_cast<double>(m) - top)
                 : 0.0;
  }
}

// Mean index of `in`; in must have some mass.
double mean_index(std::span<const double> in) {
  double mass = 0.0, first = 0.0;
  for (std::size_t m = 0; m < in.size(); ++m) {
    mass += in[m];
    first += in[m] * static_cast<double>(m);
  }
  return first / mass;
}

// Log-masses of the inputs to one tilt solve, flattened; zeros map to -inf.
thread_local std::vector<double> t_logs;

// Summed tilted mean and its derivative (the summed tilted variance).
std::pair<double, double> tilted_moments(std::size_t count, std::size_t n, double theta) {
  double mean = 0.0, var = 0.0;
  for (std::size_t l = 0; l < count; ++l) {
    const double* lg = t_logs.data() + l * n;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < n; ++m) {
      top = std::max(top, lg[m] + theta * static_cast<double>(m));
    }
    double mass = 0.0, first = 0.0, second = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const double w = std::exp(lg[m] + theta * static_cast<double>(m) - top);
      const double x = static_cast<double>(m);
      mass += w;
      first += w * x;
      second += w * x * x;
    }
    const double mu = first / mass;
    mean += mu;
    var += std::max(second / mass - mu * mu, 0.0);
  }
  return {mean, var};
}

// Tilt whose summed tilted means equal `target` to within a tenth of a bin,
// clamped to the safe range. The summed mean is increasing in theta, so
// Newton steps are safeguarded by a shrinking bracket.
double solve_tilt(std::span<const std::span<const double>> inputs, double target) {
  const std::size_t n = inputs.front().size();
  t_logs.resize(inputs.size() * n);
  for (std::size_t l = 0; l < inputs.size(); ++l) {
    for (std::size_t m = 0; m < n; ++m) {
      const double v = inputs[l][m];
      t_logs[l * n + m] = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    }
  }
  double lo = -max_tilt(n);
  double hi = -lo;
  if (tilted_moments(inputs.size(), n, lo).first >= target) return lo;
  if (tilted_moments(inputs.size(), n, hi).first <= target) return hi;
  double theta = 0.0;
  for (int it = 0; it < 100; ++it) {
    const auto [mean, var] = tilted_moments(inputs.size(), n, theta);
    if (std::abs(mean - target) < 0.1) break;
    (mean < target ? lo : hi) = theta;
    const double step = var > 0.0 ? theta + (target - mean) / var : 0.5 * (lo + hi);
    theta = step > lo && step < hi ? step : 0.5 * (lo + hi);
    if (hi - lo < 1e-12) break;
  }
  return theta;
}
thread_local FtvScratch t_ftv;

}  // namespace

void BpConfig::validate() const {
  if (!(epsilon > 0.0)) throw ParameterError(fmt::format("epsilon = {} must be > 0", epsilon));
  if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (!(damping >= 0.0 && damping < 1.0)) {
    throw ParameterError(fmt::format("damping = {} outside [0, 1)", damping));
  }
  if (!(message_floor >= 0.0 && message_floor < 1.0)) {
    throw ParameterError(fmt::format("message_floor = {} outside [0, 1)", message_floor));
  }
}

MessageStore::MessageStore(std::size_t num_edges, const GridSpec& grid)
    : grid_(grid),
      num_edges_(num_edges),
      vtf_(num_edges * grid.n_d, 1.0 / static_cast<double>(grid.n_d)),
      ftv_(num_edges * grid.n_d, 1.0) {}

double PosteriorSet::mean_entropy() const {
  if (posteriors.empty()) return 0.0;
  double total = 0.0;
  for (const auto& p : posteriors) total += entropy(p);
  return total / static_cast<double>(posteriors.size());
}

MessageStore init_messages(const FactorGraph& graph, const GridSpec& grid) {
  return MessageStore(graph.num_edges(), grid);
}

void update_vtf(MessageStore& store, const FactorGraph& graph, const SampledPdf& prior_pdf) {
  if (prior_pdf.grid() != store.grid()) throw DimensionError("update_vtf: prior grid mismatch");
  std::vector<std::span<const double>> ops;
  std::vector<std::span<double>> outs;
  for (std::size_t i = 0; i < graph.n(); ++i) {
    const auto edges = graph.variable_edges(i);
    ops.clear();
    outs.clear();
    for (std::size_t e : edges) {
      ops.push_back(store.ftv(e));
      outs.push_back(store.vtf(e));
    }
    leave_one_out_products(prior_pdf.values(), ops, outs, {}, [&](std::size_t k) {
      return fmt::format("VtF message {} -> {}", i, graph.variable_factors(i)[k]);
    });
  }
}

FactorKernels::FactorKernels(const FactorGraph& graph, const GridSpec& grid,
                             const NoiseSpec& noise, const Vector& z)
    : n_d_(grid.n_d) {
  noise.validate();
  if (static_cast<std::size_t>(z.size()) != graph.m()) {
    throw DimensionError(
        fmt::format("measurement has length {}, graph has m = {}", z.size(), graph.m()));
  }
  const std::size_t m = graph.m();
  kernels_.resize(m * n_d_);
  sizes_.resize(m);
  whole_bins_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double zj = z(static_cast<Eigen::Index>(j));
    if (!std::isfinite(zj)) throw ParameterError(fmt::format("z[{}] is not finite", j));
    const double whole = std::floor(zj / grid.t_s);
    whole_bins_[j] = static_cast<long long>(whole);
    const double offset = zj - whole * grid.t_s;
    // Kernel sample r is the noise value w_r = r t_s - 3 sigma_x + offset.
    // The constant factor exp(-w*^2 / 2 sigma_w^2) of the sample nearest zero
    // is divided out so narrow kernels do not underflow.
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n_d_; ++r) {
      nearest = std::min(nearest, std::abs(grid.x(r) + offset));
    }
    const double inv_var = 1.0 / (noise.sigma_w * noise.sigma_w);
    auto kernel = std::span<double>(kernels_).subspan(j * n_d_, n_d_);
    for (std::size_t r = 0; r < n_d_; ++r) {
      const double w = grid.x(r) + offset;
      const double v = std::exp(-0.5 * (w * w - nearest * nearest) * inv_var);
      kernel[r] = v < kFlushThreshold ? 0.0 : v;
    }
    const std::size_t d = graph.factor_degree(j);
    sizes_[j] = next_pow2(d * (n_d_ - 1) + 1);
  }
}

void update_ftv(MessageStore& store, const FactorGraph& graph, const FactorKernels& kernels,
                double damping, double floor) {
  const std::size_t n_d = store.grid().n_d;
  auto& s = t_ftv;
  s.message.resize(n_d);

  // Writes the new message for edge e, blending with the old one when damped.
  auto commit = [&](std::size_t j, std::size_t e, std::span<double> fresh) {
    if (floor > 0.0) {
      double peak = 0.0;
      for (double v : fresh) peak = std::max(peak, v);
      const double level = floor * peak;
      for (double& v : fresh) v = std::max(v, level);
    }
    if (!(normalize_in_place(fresh) > 0.0)) {
      throw DegenerateMessageError(fmt::format(
          "FtV message {} -> {} lost all mass (measurement inconsistent with grid range)", j,
          graph.edge(e).variable));
    }
    auto out = store.ftv(e);
    if (damping > 0.0) {
      // Geometric blend, renormalized; a linear blend would keep a decaying
      // copy of every earlier message.
      for (std::size_t m = 0; m < n_d; ++m) {
        out[m] = fresh[m] > 0.0 && out[m] > 0.0
                     ? std::exp((1.0 - damping) * std::log(fresh[m]) + damping * std::log(out[m]))
                     : 0.0;
      }
      if (!(normalize_in_place(out) > 0.0)) {
        std::copy(fresh.begin(), fresh.end(), out.begin());
      }
    } else {
      std::copy(fresh.begin(), fresh.end(), out.begin());
    }
  };

  for (std::size_t j = 0; j < graph.m(); ++j) {
    const std::size_t d = graph.factor_degree(j);
    const std::size_t first = graph.factor_offset(j);
    const long long whole = kernels.whole_bins(j);
    const long long half = static_cast<long long>(n_d / 2);

    // An empty row carries no messages.
    if (d == 0) continue;
    if (d == 1) {
      // Only the noise kernel: b[m] = kernel[whole + n_d - m].
      const auto kernel = kernels.kernel(j);
      for (std::size_t m = 0; m < n_d; ++m) {
        const long long p = whole + 2 * half - static_cast<long long>(m);
        s.message[m] = (p >= 0 && p < static_cast<long long>(n_d))
                           ? kernel[static_cast<std::size_t>(p)]
                           : 0.0;
      }
      commit(j, first, s.message);
      continue;
    }

    const std::size_t size = kernels.transform_size(j);
    const std::size_t bins = size / 2 + 1;
    s.spectra.resize(d * bins);
    s.suffix.resize((d + 1) * bins);
    s.prefix.resize(bins);
    s.work.resize(bins);
    s.time.resize(size);
    s.tilted.resize(n_d);

    // Output sample p holds the mass of (partial sum + noise) at
    // p t_s - 3 d sigma_x + offset; X_i = x_m needs p = whole + (d + 1) n_d / 2 - m.
    const long long anchor = whole + static_cast<long long>(d + 1) * half;
    const long long last = static_cast<long long>(d * (n_d - 1));

    std::vector<std::span<const double>> inputs;
    inputs.reserve(d + 1);
    for (std::size_t k = 0; k < d; ++k) inputs.push_back(store.vtf(first + k));
    inputs.push_back(kernels.kernel(j));
    s.means.resize(d + 1);
    double mean_total = 0.0;
    for (std::size_t k = 0; k <= d; ++k) {
      s.means[k] = mean_index(inputs[k]);
      mean_total += s.means[k];
    }

    for (std::size_t k = 0; k < d; ++k) {
      forward_fft(inputs[k], size, std::span<Complex>(s.spectra).subspan(k * bins, bins));
    }
    std::fill(s.suffix.begin() + static_cast<std::ptrdiff_t>(d * bins), s.suffix.end(),
              Complex(1.0, 0.0));
    for (std::size_t k = d; k-- > 0;) {
      for (std::size_t b = 0; b < bins; ++b) {
        s.suffix[k * bins + b] = s.spectra[k * bins + b] * s.suffix[(k + 1) * bins + b];
      }
    }
    forward_fft(inputs[d], size, s.prefix);

    const double window_lo = static_cast<double>(anchor) - static_cast<double>(n_d - 1);
    const double window_hi = static_cast<double>(anchor);
    for (std::size_t k = 0; k < d; ++k) {
      const double centre = mean_total - s.means[k];
      if (centre >= window_lo && centre <= window_hi) {
        for (std::size_t b = 0; b < bins; ++b) {
          s.work[b] = s.prefix[b] * s.suffix[(k + 1) * bins + b];
        }
        inverse_fft(s.work, size, s.time);
        read_window(s.time, anchor, last, 0.0, s.message);
      } else {
        // The readout window lies in a tail of the partial-sum distribution,
        // below FFT roundoff. Redo this edge with every other input tilted by
        // exp(theta * index) so the tilted sum is centred on the window end
        // nearest the bulk, then undo the tilt on readout.
        s.others.clear();
        for (std::size_t l = 0; l <= d; ++l) {
          if (l != k) s.others.push_back(inputs[l]);
        }
        const double target = centre < window_lo ? window_lo : window_hi;
        const double theta = solve_tilt(s.others, target);
        s.edge_spectrum.resize(bins);
        for (std::size_t l = 0; l < s.others.size(); ++l) {
          tilt(s.others[l], theta, s.tilted);
          forward_fft(s.tilted, size, s.edge_spectrum);
          if (l == 0) {
            std::copy(s.edge_spectrum.begin(), s.edge_spectrum.begin() + bins, s.work.begin());
          } else {
            for (std::size_t b = 0; b < bins; ++b) s.work[b] *= s.edge_spectrum[b];
          }
        }
        inverse_fft(s.work, size, s.time);
        read_window(s.time, anchor, last, theta, s.message);
      }
      commit(j, first + k, s.message);
      for (std::size_t b = 0; b < bins; ++b) s.prefix[b] *= s.spectra[k * bins + b];
    }
  }
}

PosteriorSet compute_posteriors(const MessageStore& store, const FactorGraph& graph,
                                const SampledPdf& prior_pdf) {
  if (prior_pdf.grid() != store.grid()) {
    throw DimensionError("compute_posteriors: prior grid mismatch");
  }
  const GridSpec& grid = store.grid();
  PosteriorSet set;
  set.posteriors.reserve(graph.n());
  std::vector<std::span<const double>> ops;
  std::vector<double> full(grid.n_d);
  for (std::size_t i = 0; i < graph.n(); ++i) {
    ops.clear();
    for (std::size_t e : graph.variable_edges(i)) ops.push_back(store.ftv(e));
    leave_one_out_products(prior_pdf.values(), ops, {}, full, [&](std::size_t) {
      return fmt::format("posterior of variable {}", i);
    });
    set.posteriors.emplace_back(grid, full);
  }
  set.iterations = store.iteration();
  return set;
}

double convergence_metric(const PosteriorSet& current, const PosteriorSet& previous) {
  if (current.posteriors.size() != previous.posteriors.size()) {
    throw DimensionError("convergence_metric: posterior sets differ in size");
  }
  if (current.posteriors.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < current.posteriors.size(); ++i) {
    const auto p = current.posteriors[i].values();
    const auto q = previous.posteriors[i].values();
    double diff = 0.0, norm = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
      diff += (p[m] - q[m]) * (p[m] - q[m]);
      norm += p[m] * p[m];
    }
    total += diff / norm;
  }
  return total / static_cast<double>(current.posteriors.size());
}

NoiseSpec kernel_noise(const NoiseSpec& noise, const GridSpec& grid, const BpConfig& config) {
  noise.validate();
  if (!config.grid_noise) return noise;
  return NoiseSpec{std::sqrt(noise.sigma_w * noise.sigma_w + grid.t_s * grid.t_s / 12.0)};
}

PosteriorSet run_bp(const FactorGraph& graph, const SampledPdf& prior_pdf,
                    const NoiseSpec& noise, const Vector& z, const BpConfig& config,
                    std::vector<TraceRow>* trace) {
  config.validate();
  const GridSpec& grid = prior_pdf.grid();
  const FactorKernels kernels(graph, grid, kernel_noise(noise, grid, config), z);
  MessageStore store = init_messages(graph, grid);
  PosteriorSet previous = compute_posteriors(store, graph, prior_pdf);

  for (std::size_t l = 1; l <= config.max_iters; ++l) {
    PosteriorSet current;
    try {
      update_vtf(store, graph, prior_pdf);
      update_ftv(store, graph, kernels, config.damping, config.message_floor);
      store.set_iteration(l);
      current = compute_posteriors(store, graph, prior_pdf);
    } catch (const DegenerateMessageError& e) {
      throw DegenerateMessageError(fmt::format("BP iteration {}: {}", l, e.what()));
    }
    const double metric = convergence_metric(current, previous);
    current.final_metric = metric;
    current.iterations = l;
    if (trace) trace->push_back({l, metric, current.mean_entropy()});
    if (metric <= config.epsilon) {
      current.converged = true;
      return current;
    }
    previous = std::move(current);
  }
  return previous;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "iter,metric,mean_entropy\n";
  for (const auto& row : trace) {
    out << fmt::format("{},{:.17g},{:.17g}\n", row.iter, row.metric, row.mean_entropy);
  }
}

}  // namespace bhtbp
