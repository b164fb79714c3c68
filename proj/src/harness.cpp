#include "bhtbp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "bhtbp/analysis.hpp"
#include "bhtbp/csv.hpp"
#include "bhtbp/errors.hpp"

namespace bhtbp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

FactorGraph build_graph(const ExperimentConfig& c) {
  c.validate();
  if (c.identity) return identity_graph(c.n);
  return generate_matrix(c.n, c.m, c.l, derive_seed(c.master_seed, StreamKind::kMatrix));
}

bool enabled(const ExperimentConfig& c, Algorithm a) {
  return std::find(c.algorithms.begin(), c.algorithms.end(), a) != c.algorithms.end();
}

Vector lmmse_estimate(const FactorGraph& graph, const Vector& z, const Support& s_hat,
                      double sigma_x, double sigma_w) {
  const EstimatorInputs in{z, restrict(graph, s_hat), sigma_x, sigma_w};
  return assemble_estimate(s_hat, lmmse_on_support(in));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<SummaryRow> summarize(const Experiment& ex, double param, double snr,
                                  std::span<const TrialRecord> records) {
  const auto& c = ex.config();
  double bound = kNaN;
  if (c.identity) {
    const ScalarChannel channel({c.prior, ex.noise_for_snr(snr).sigma_w, c.l});
    bound = ser_bound(channel, c.prior.q, c.n).p_succ_n;
  }
  std::vector<SummaryRow> rows;
  for (Algorithm a : c.algorithms) {
    SummaryRow row;
    row.param = param;
    row.algorithm = a;
    row.snr_db = snr;
    row.bound_p_succ = bound;
    row.quant_floor = quantization_floor(c.n_d);
    std::vector<double> nmse, star, entropy, iters;
    std::size_t exact = 0;
    for (const auto& r : records) {
      if (r.algorithm != a) continue;
      ++row.trials;
      row.seconds += r.seconds;
      if (!std::isnan(r.mse_star)) star.push_back(r.mse_star);
      if (r.failed) {
        ++row.failures;
        continue;
      }
      exact += r.support_exact ? 1 : 0;
      nmse.push_back(r.nmse);
      if (!std::isnan(r.mean_entropy)) entropy.push_back(r.mean_entropy);
      iters.push_back(static_cast<double>(r.iterations));
    }
    row.success_rate =
        row.trials ? static_cast<double>(exact) / static_cast<double>(row.trials) : kNaN;
    row.mean_nmse = mean_of(nmse);
    row.mse_star = mean_of(star);
    row.mean_entropy = mean_of(entropy);
    row.mean_iterations = mean_of(iters);
    rows.push_back(row);
  }
  return rows;
}

void run_point(const Experiment& ex, double param, double snr, SweepResult& out) {
  const auto records = run_trials(ex, snr);
  const auto rows = summarize(ex, param, snr, records);
  out.summary.insert(out.summary.end(), rows.begin(), rows.end());
  if (ex.config().trial_output) {
    out.trials.insert(out.trials.end(), records.begin(), records.end());
    out.trial_params.insert(out.trial_params.end(), records.size(), param);
  }
}

}  // namespace

Experiment::Experiment(const ExperimentConfig& config)
    : config_(config),
      graph_(build_graph(config)),
      grid_(make_grid(config.prior.sigma_x, config.n_d)),
      prior_pdf_(sample_prior(config.prior, grid_)),
      refs_(build_references(config.prior, grid_)) {
  if (config_.identity) config_.m = config_.n;
}

NoiseSpec Experiment::noise_for_snr(double snr_db) const {
  if (config_.identity) return NoiseSpec{bound_sigma_w(snr_db, config_.prior, config_.l)};
  return sigma_w_for_snr(snr_db, graph_, config_.prior);
}

std::vector<TrialRecord> run_trial(const Experiment& ex, double snr_db, std::size_t trial_id) {
  const auto& c = ex.config();
  const auto& graph = ex.graph();
  const NoiseSpec noise = ex.noise_for_snr(snr_db);
  const SignalInstance sig =
      generate_signal(c.n, c.prior, derive_seed(c.master_seed, StreamKind::kSignal, trial_id));
  const Vector w =
      generate_noise(graph.m(), noise, derive_seed(c.master_seed, StreamKind::kNoise, trial_id));
  const Vector z = apply(graph, sig.x0) + w;
  const double energy =
      static_cast<double>(c.n) * c.prior.q * nonzero_second_moment(c.prior);
  const double mse_star = sig.k > 0 ? oracle_mse(graph, sig.s, c.prior, noise) : kNaN;

  std::vector<TrialRecord> out;
  auto base = [&](Algorithm a) {
    TrialRecord r;
    r.trial_id = trial_id;
    r.algorithm = a;
    r.snr_db = snr_db;
    r.mse_star = mse_star;
    r.mean_entropy = kNaN;
    return r;
  };

  const bool want_bp = enabled(c, Algorithm::kBhtBp) || enabled(c, Algorithm::kCsBp);
  std::optional<PosteriorSet> post;
  double bp_seconds = 0.0;
  if (want_bp) {
    const auto start = Clock::now();
    try {
      post = run_bp(graph, ex.prior_pdf(), noise, z, c.bp);
    } catch (const NumericalError&) {
      post.reset();
    }
    bp_seconds = seconds_since(start);
  }

  for (Algorithm a : c.algorithms) {
    TrialRecord r = base(a);
    const auto start = Clock::now();
    if (a == Algorithm::kOracle) {
      const Vector x_hat = oracle_estimate(z, graph, sig.s, c.prior.sigma_x, noise.sigma_w);
      r.support_exact = true;
      r.nmse = normalized_mse(x_hat, sig.x0, energy);
      r.converged = true;
    } else if (!post) {
      r.failed = true;
      r.nmse = kNaN;
      r.seconds = bp_seconds;
    } else {
      r.iterations = post->iterations;
      r.converged = post->converged;
      r.mean_entropy = post->mean_entropy();
      r.seconds = bp_seconds;
      try {
        if (a == Algorithm::kBhtBp) {
          const auto est = bht_detect(*post, ex.references(), c.prior.q);
          const Vector x_hat = lmmse_estimate(graph, z, est.s_hat, c.prior.sigma_x, noise.sigma_w);
          r.support_exact = est.s_hat == sig.s;
          r.nmse = normalized_mse(x_hat, sig.x0, energy);
        } else {
          const auto est = csbp_map_detect(*post);
          r.support_exact = est.s_hat == sig.s;
          r.nmse = normalized_mse(est.x_map, sig.x0, energy);
        }
      } catch (const NumericalError&) {
        r.failed = true;
        r.support_exact = false;
        r.nmse = kNaN;
      }
    }
    r.seconds += seconds_since(start);
    out.push_back(r);
  }
  return out;
}

std::vector<TrialRecord> run_trials(const Experiment& ex, double snr_db) {
  const auto& c = ex.config();
  std::vector<std::vector<TrialRecord>> slots(c.trials);
  std::size_t workers = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, c.trials);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= c.trials) return;
      try {
        slots[t] = run_trial(ex, snr_db, t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(c.trials);
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);

  std::vector<TrialRecord> merged;
  merged.reserve(c.trials * c.algorithms.size());
  for (auto& s : slots) merged.insert(merged.end(), s.begin(), s.end());
  return merged;
}

SweepResult sweep_snr(const ExperimentConfig& config) {
  const Experiment ex(config);
  SweepResult out{"snr", ex.config().to_line(), {}, {}, {}};
  for (double snr : config.snr_grid) run_point(ex, snr, snr, out);
  return out;
}

SweepResult sweep_mn(const ExperimentConfig& config, std::span<const double> mn_grid) {
  SweepResult out{"m_over_n", config.to_line(), {}, {}, {}};
  for (double r : mn_grid) {
    ExperimentConfig c = config;
    c.m = std::max<std::size_t>(
        c.l, static_cast<std::size_t>(std::llround(r * static_cast<double>(c.n))));
    run_point(Experiment(c), r, config.clean_snr_db, out);
  }
  return out;
}

SweepResult sweep_nd(const ExperimentConfig& config, std::span<const std::size_t> nd_grid) {
  SweepResult out{"n_d", config.to_line(), {}, {}, {}};
  for (std::size_t nd : nd_grid) {
    ExperimentConfig c = config;
    c.n_d = nd;
    run_point(Experiment(c), static_cast<double>(nd), config.clean_snr_db, out);
  }
  return out;
}

SweepResult sweep_l(const ExperimentConfig& config, std::span<const std::size_t> l_grid) {
  SweepResult out{"l", config.to_line(), {}, {}, {}};
  for (std::size_t l : l_grid) {
    ExperimentConfig c = config;
    c.l = l;
    run_point(Experiment(c), static_cast<double>(l), config.clean_snr_db, out);
  }
  return out;
}

std::vector<std::pair<double, double>> entropy_curve(const SweepResult& result) {
  std::vector<std::pair<double, double>> curve;
  for (const auto& row : result.summary) {
    if (row.algorithm == Algorithm::kOracle) continue;
    if (!curve.empty() && curve.back().first == row.param) continue;
    curve.emplace_back(row.param, row.mean_entropy);
  }
  return curve;
}

void write_summary_csv(std::ostream& out, const SweepResult& result) {
  out << "# config: " << result.config_line << '\n';
  out << result.sweep
      << ",algorithm,snr_db,trials,failures,success_rate,mean_nmse,mse_star,bound_p_succ,"
         "quant_floor,mean_entropy,mean_iterations,seconds\n";
  for (const auto& r : result.summary) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv::number(r.param),
                       to_string(r.algorithm), csv::number(r.snr_db), r.trials, r.failures,
                       csv::number(r.success_rate), csv::number(r.mean_nmse),
                       csv::number(r.mse_star), csv::number(r.bound_p_succ),
                       csv::number(r.quant_floor), csv::number(r.mean_entropy),
                       csv::number(r.mean_iterations), csv::number(r.seconds));
  }
}

void write_trials_csv(std::ostream& out, const SweepResult& result) {
  out << "# config: " << result.config_line << '\n';
  out << result.sweep
      << ",snr_db,trial_id,algorithm,support_exact,nmse,iterations,converged,failed,"
         "mean_entropy,mse_star,seconds\n";
  for (std::size_t k = 0; k < result.trials.size(); ++k) {
    const auto& r = result.trials[k];
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", csv::number(result.trial_params[k]),
                       csv::number(r.snr_db), r.trial_id, to_string(r.algorithm),
                       int(r.support_exact), csv::number(r.nmse), r.iterations, int(r.converged),
                       int(r.failed), csv::number(r.mean_entropy), csv::number(r.mse_star),
                       csv::number(r.seconds));
  }
}

RecoveryResult recover(const FactorGraph& graph, const Vector& z, const PriorSpec& prior,
                       const NoiseSpec& noise, std::size_t n_d, const BpConfig& bp,
                       Algorithm algorithm) {
  if (algorithm == Algorithm::kOracle) {
    throw ParameterError("recover: the oracle needs the true support");
  }
  if (z.size() != static_cast<Eigen::Index>(graph.m())) {
    throw DimensionError(fmt::format("recover: z has length {}, matrix has {} rows", z.size(),
                                     graph.m()));
  }
  const auto start = Clock::now();
  const GridSpec grid = make_grid(prior.sigma_x, n_d);
  const SampledPdf prior_pdf = sample_prior(prior, grid);
  const PosteriorSet post = run_bp(graph, prior_pdf, noise, z, bp);
  RecoveryResult r;
  r.iterations = post.iterations;
  r.converged = post.converged;
  if (algorithm == Algorithm::kBhtBp) {
    const auto est = bht_detect(post, build_references(prior, grid), prior.q);
    r.s_hat = est.s_hat;
    r.x_hat = lmmse_estimate(graph, z, est.s_hat, prior.sigma_x, noise.sigma_w);
  } else {
    const auto est = csbp_map_detect(post);
    r.s_hat = est.s_hat;
    r.x_hat = est.x_map;
  }
  r.seconds = seconds_since(start);
  return r;
}

}  // namespace bhtbp
