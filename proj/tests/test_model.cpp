#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "bhtbp/errors.hpp"
#include "bhtbp/model.hpp"
#include "bhtbp/rng.hpp"
#include "oracles.hpp"

using namespace bhtbp;

TEST(Rng, StreamsArePureFunctionsOfTheSeed) {
  auto a = make_engine(derive_seed(5, StreamKind::kSignal, 17));
  auto b = make_engine(derive_seed(5, StreamKind::kSignal, 17));
  auto c = make_engine(derive_seed(5, StreamKind::kNoise, 17));
  auto d = make_engine(derive_seed(5, StreamKind::kSignal, 18));
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
}

TEST(Model, SignalRespectsSupportAndDent) {
  oracle::Rand r(21);
  for (int t = 0; t < 100; ++t) {
    PriorSpec prior;
    prior.q = r.uniform(0.0, 0.5);
    prior.sigma_x = r.uniform(0.5, 10.0);
    prior.x_min = r.uniform(0.0, 1.0) * prior.sigma_x;
    const std::size_t n = r.index(1, 500);
    const auto sig = generate_signal(n, prior, RngSeed{r.seed(), 2});
    ASSERT_EQ(sig.x0.size(), static_cast<Eigen::Index>(n));
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sig.x0(static_cast<Eigen::Index>(i));
      EXPECT_EQ(sig.s[i] != 0, x != 0.0);
      if (sig.s[i]) {
        EXPECT_GE(std::abs(x), prior.x_min);
        ++k;
      }
    }
    EXPECT_EQ(k, sig.k);
  }
}

TEST(Model, SignalStatisticsMatchPrior) {
  PriorSpec prior;
  prior.q = 0.1;
  const std::size_t n = 200000;
  const auto sig = generate_signal(n, prior, RngSeed{3, 2});
  const double q_hat = static_cast<double>(sig.k) / static_cast<double>(n);
  EXPECT_NEAR(q_hat, prior.q, 4.0 * std::sqrt(prior.q * (1 - prior.q) / n));
  double second = 0.0;
  for (Eigen::Index i = 0; i < sig.x0.size(); ++i) second += sig.x0(i) * sig.x0(i);
  second /= static_cast<double>(sig.k);
  EXPECT_NEAR(second / nonzero_second_moment(prior), 1.0, 0.03);
}

TEST(Model, TruncatedSecondMomentClosedForm) {
  // E[X^2 | |X| >= a] = s^2 (1 + (a/s) phi(a/s) / Q(a/s)) for X ~ N(0, s^2).
  oracle::Rand r(22);
  for (int t = 0; t < 50; ++t) {
    PriorSpec prior;
    prior.sigma_x = r.uniform(0.1, 20.0);
    prior.x_min = r.uniform(0.0, 2.9) * prior.sigma_x;
    const double u = prior.x_min / prior.sigma_x;
    const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    const double tail = 0.5 * std::erfc(u / std::numbers::sqrt2);
    const double expect = prior.sigma_x * prior.sigma_x * (1.0 + u * phi / tail);
    EXPECT_NEAR(nonzero_second_moment(prior) / expect, 1.0, 1e-9);
  }
}

TEST(Model, NoiseIsSeededGaussian) {
  const auto w = generate_noise(100000, NoiseSpec{2.0}, RngSeed{4, 3});
  EXPECT_NEAR(w.mean(), 0.0, 4.0 * 2.0 / std::sqrt(1e5));
  EXPECT_NEAR(std::sqrt(w.squaredNorm() / 1e5), 2.0, 0.02);
  EXPECT_EQ(w, generate_noise(100000, NoiseSpec{2.0}, RngSeed{4, 3}));
}

TEST(Model, SnrRoundTripAndMonteCarloEnergy) {
  PriorSpec prior;
  prior.q = 0.2;
  const auto g = generate_matrix(300, 150, 5, RngSeed{9, 1});
  for (double snr : {-5.0, 10.0, 27.5, 50.0}) {
    const NoiseSpec noise = sigma_w_for_snr(snr, g, prior);
    EXPECT_NEAR(snr_db(g, prior, noise), snr, 1e-9);
  }
  // E||Phi X||^2 / M against an empirical average.
  const NoiseSpec unit{1.0};
  double energy = 0.0;
  const int reps = 400;
  for (int t = 0; t < reps; ++t) {
    const auto sig = generate_signal(g.n(), prior, RngSeed{100 + static_cast<std::uint64_t>(t), 2});
    energy += apply(g, sig.x0).squaredNorm();
  }
  energy /= reps * static_cast<double>(g.m());
  EXPECT_NEAR(10.0 * std::log10(energy), snr_db(g, prior, unit), 0.15);
}

TEST(Model, VectorCsvRoundTripIsExact) {
  oracle::Rand r(23);
  Vector v(50);
  for (auto& x : v) x = r.normal() * std::pow(10.0, r.uniform(-20, 20));
  std::stringstream ss;
  write_vector_csv(ss, v);
  EXPECT_EQ(read_vector_csv(ss), v);
  std::istringstream bad("1.0\nabc\n");
  EXPECT_THROW(read_vector_csv(bad), ConfigError);
}

TEST(Model, ValidationRejectsBadParameters) {
  const PriorSpec good;
  EXPECT_NO_THROW(good.validate());
  auto bad = [&](auto mutate) {
    PriorSpec p = good;
    mutate(p);
    EXPECT_THROW(p.validate(), ParameterError);
  };
  bad([](PriorSpec& p) { p.q = 1.0; });
  bad([](PriorSpec& p) { p.q = -0.1; });
  bad([](PriorSpec& p) { p.sigma_x = 0.0; });
  bad([](PriorSpec& p) { p.x_min = 15.0; });
  bad([](PriorSpec& p) { p.lambda = 0.0; });
  bad([](PriorSpec& p) { p.sigma_x = std::nan(""); });
  EXPECT_THROW(NoiseSpec{0.0}.validate(), ParameterError);
  PriorSpec zero_q = good;
  zero_q.q = 0.0;
  EXPECT_THROW(snr_db(identity_graph(4), zero_q, NoiseSpec{1.0}), ParameterError);
}

TEST(Model, SnrWorkedExampleAndDentMonotonicity) {
  // Square matrix with column weight 5: E||Phi X||^2 / M = q L sigma_x^2.
  PriorSpec prior;
  prior.q = 0.1;
  prior.x_min = 0.0;
  const auto g = generate_matrix(50, 50, 5, RngSeed{2, 1});
  EXPECT_NEAR(snr_db(g, prior, NoiseSpec{std::sqrt(0.125)}), 20.0, 1e-9);
  PriorSpec dented = prior;
  dented.x_min = prior.sigma_x / 4;
  EXPECT_GT(snr_db(g, dented, NoiseSpec{1.0}), snr_db(g, prior, NoiseSpec{1.0}));
  EXPECT_GT(snr_db(g, prior, NoiseSpec{1.0}), snr_db(g, prior, NoiseSpec{1.1}));
}
