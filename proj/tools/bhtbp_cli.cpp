#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bhtbp/analysis.hpp"
#include "bhtbp/config.hpp"
#include "bhtbp/errors.hpp"
#include "bhtbp/graph.hpp"
#include "bhtbp/harness.hpp"
#include "bhtbp/model.hpp"

namespace {

using namespace bhtbp;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct PriorArgs {
  PriorSpec prior;
  void add(CLI::App* app) {
    app->add_option("--q", prior.q, "Sparsity rate")->capture_default_str();
    app->add_option("--sigma-x", prior.sigma_x, "Slab standard deviation")->capture_default_str();
    app->add_option("--x-min", prior.x_min, "Dent half-width")->capture_default_str();
    app->add_option("--lambda", prior.lambda, "Dent plateau height")->capture_default_str();
  }
};

struct SweepArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_path;
  std::string trials_path;

  void add(CLI::App* app) {
    app->add_option("-c,--config", config_path, "YAML experiment config");
    app->add_option("--set", overrides, "Override a config field, key=value (repeatable)");
    app->add_option("-o,--out", out_path, "Summary CSV path (default: stdout)");
    app->add_option("--trials-out", trials_path, "Trial-level CSV path");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    for (const auto& o : overrides) apply_assignment(c, o);
    if (!trials_path.empty()) c.trial_output = true;
    c.validate();
    return c;
  }

  void emit(const SweepResult& result) const {
    if (out_path.empty()) {
      write_summary_csv(std::cout, result);
    } else {
      std::ofstream f(out_path);
      if (!f) throw ConfigError(fmt::format("cannot write '{}'", out_path));
      write_summary_csv(f, result);
    }
    if (!trials_path.empty()) {
      std::ofstream f(trials_path);
      if (!f) throw ConfigError(fmt::format("cannot write '{}'", trials_path));
      write_trials_csv(f, result);
    }
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot write '{}'", path));
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(fmt::format("cannot read '{}'", path));
  return f;
}

std::string support_string(const Support& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i]) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(i);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BHT-BP noisy sparse recovery"};
  app.require_subcommand(1);

  // gen-matrix
  auto* gm = app.add_subcommand("gen-matrix", "Draw an LDPC-like 0/1 measurement matrix");
  std::size_t gm_n = 256, gm_m = 128, gm_l = 5;
  std::uint64_t gm_seed = 1;
  std::string gm_out;
  gm->add_option("--n", gm_n)->capture_default_str();
  gm->add_option("--m", gm_m)->capture_default_str();
  gm->add_option("--l", gm_l)->capture_default_str();
  gm->add_option("--seed", gm_seed)->capture_default_str();
  gm->add_option("-o,--out", gm_out)->required();

  // gen-signal
  auto* gs = app.add_subcommand("gen-signal", "Draw a sparse signal, optionally with measurements");
  PriorArgs gs_prior;
  gs_prior.add(gs);
  std::size_t gs_n = 256;
  std::uint64_t gs_seed = 1;
  std::string gs_out, gs_matrix, gs_z_out;
  std::optional<double> gs_snr;
  gs->add_option("--n", gs_n, "Signal length (taken from --matrix when given)")->capture_default_str();
  gs->add_option("--seed", gs_seed)->capture_default_str();
  gs->add_option("-o,--out", gs_out, "Signal CSV")->required();
  gs->add_option("--matrix", gs_matrix, "Matrix file for measurements");
  gs->add_option("--snr", gs_snr, "Measurement SNR in dB");
  gs->add_option("--z-out", gs_z_out, "Measurement CSV");

  // recover
  auto* rc = app.add_subcommand("recover", "Recover one signal from measurements");
  PriorArgs rc_prior;
  rc_prior.add(rc);
  std::string rc_matrix, rc_z, rc_out, rc_alg = "bht-bp";
  std::optional<double> rc_sigma_w, rc_snr;
  std::size_t rc_nd = 128;
  BpConfig rc_bp;
  rc->add_option("--matrix", rc_matrix)->required();
  rc->add_option("--z", rc_z, "Measurement CSV")->required();
  auto* sw_opt = rc->add_option("--sigma-w", rc_sigma_w, "Noise standard deviation");
  rc->add_option("--snr", rc_snr, "SNR in dB, used to derive sigma_w")->excludes(sw_opt);
  rc->add_option("--n-d", rc_nd)->capture_default_str();
  rc->add_option("--algorithm", rc_alg)->check(CLI::IsMember({"bht-bp", "cs-bp"}));
  rc->add_option("--epsilon", rc_bp.epsilon)->capture_default_str();
  rc->add_option("--max-iters", rc_bp.max_iters)->capture_default_str();
  rc->add_option("--damping", rc_bp.damping)->capture_default_str();
  rc->add_option("-o,--out", rc_out, "Estimate CSV");

  // sweeps
  auto* ss = app.add_subcommand("sweep-snr", "Success rate and NMSE over the SNR grid");
  SweepArgs ss_args;
  ss_args.add(ss);
  auto* smn = app.add_subcommand("sweep-mn", "Posterior entropy over the sampling rate");
  SweepArgs smn_args;
  smn_args.add(smn);
  auto* snd = app.add_subcommand("sweep-nd", "NMSE over the grid size");
  SweepArgs snd_args;
  snd_args.add(snd);
  auto* sl = app.add_subcommand("sweep-l", "NMSE over the column weight");
  SweepArgs sl_args;
  sl_args.add(sl);

  // bound
  auto* bd = app.add_subcommand("bound", "Analytic success-rate bound for Phi = I");
  PriorArgs bd_prior;
  bd_prior.add(bd);
  std::size_t bd_n = 1024, bd_l = 5;
  std::vector<double> bd_snr{5, 10, 15, 20, 25, 30, 35, 40};
  std::string bd_out;
  bd->add_option("--n", bd_n, "Signal length")->capture_default_str();
  bd->add_option("--l", bd_l, "Column weight in the SNR bookkeeping")->capture_default_str();
  bd->add_option("--snr", bd_snr, "SNR grid in dB")->capture_default_str();
  bd->add_option("-o,--out", bd_out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gm) {
      const auto graph = generate_matrix(gm_n, gm_m, gm_l, derive_seed(gm_seed, StreamKind::kMatrix));
      auto f = open_out(gm_out);
      write_matrix(f, graph);
    } else if (*gs) {
      std::optional<FactorGraph> graph;
      if (!gs_matrix.empty()) {
        auto f = open_in(gs_matrix);
        graph = read_matrix(f);
        gs_n = graph->n();
      }
      const auto sig = generate_signal(gs_n, gs_prior.prior, derive_seed(gs_seed, StreamKind::kSignal));
      {
        auto f = open_out(gs_out);
        write_vector_csv(f, sig.x0);
      }
      if (!gs_z_out.empty()) {
        if (!graph || !gs_snr) throw ConfigError("--z-out needs --matrix and --snr");
        const NoiseSpec noise = sigma_w_for_snr(*gs_snr, *graph, gs_prior.prior);
        const Vector z = apply(*graph, sig.x0) +
                         generate_noise(graph->m(), noise, derive_seed(gs_seed, StreamKind::kNoise));
        auto f = open_out(gs_z_out);
        write_vector_csv(f, z);
        std::cout << fmt::format("sigma_w: {:.17g}\n", noise.sigma_w);
      }
      std::cout << fmt::format("k: {}\nsupport: {}\n", sig.k, support_string(sig.s));
    } else if (*rc) {
      auto mf = open_in(rc_matrix);
      const auto graph = read_matrix(mf);
      auto zf = open_in(rc_z);
      const Vector z = read_vector_csv(zf);
      NoiseSpec noise;
      if (rc_sigma_w) noise.sigma_w = *rc_sigma_w;
      else if (rc_snr) noise = sigma_w_for_snr(*rc_snr, graph, rc_prior.prior);
      else throw ConfigError("recover needs --sigma-w or --snr");
      noise.validate();
      const auto r = recover(graph, z, rc_prior.prior, noise, rc_nd, rc_bp, parse_algorithm(rc_alg));
      std::cout << fmt::format("algorithm: {}\niterations: {}\nconverged: {}\nseconds: {:.6f}\n",
                               rc_alg, r.iterations, r.converged, r.seconds);
      std::cout << fmt::format("support: {}\n", support_string(r.s_hat));
      if (rc_out.empty()) {
        write_vector_csv(std::cout, r.x_hat);
      } else {
        auto f = open_out(rc_out);
        write_vector_csv(f, r.x_hat);
      }
    } else if (*ss) {
      ss_args.emit(sweep_snr(ss_args.resolve()));
    } else if (*smn) {
      const auto c = smn_args.resolve();
      const auto result = sweep_mn(c, c.mn_grid);
      smn_args.emit(result);
      const auto curve = entropy_curve(result);
      const auto threshold = entropy_threshold(curve);
      std::cerr << (threshold ? fmt::format("entropy threshold m/n: {:.17g}\n", *threshold)
                              : std::string("entropy threshold m/n: not reached\n"));
    } else if (*snd) {
      const auto c = snd_args.resolve();
      snd_args.emit(sweep_nd(c, c.nd_grid));
    } else if (*sl) {
      const auto c = sl_args.resolve();
      sl_args.emit(sweep_l(c, c.l_grid));
    } else if (*bd) {
      const auto rows = bound_curve(bd_prior.prior, bd_l, bd_snr, bd_n);
      if (bd_out.empty()) {
        write_bound_csv(std::cout, rows);
      } else {
        auto f = open_out(bd_out);
        write_bound_csv(f, rows);
      }
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
