#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bhtbp/detect.hpp"
#include "bhtbp/errors.hpp"
#include "bhtbp/harness.hpp"
#include "oracles.hpp"

using namespace bhtbp;

namespace {

PosteriorSet random_posteriors(oracle::Rand& r, const GridSpec& grid, std::size_t n) {
  PosteriorSet set;
  for (std::size_t i = 0; i < n; ++i) {
    auto w = r.masses(grid.n_d, 0.4);
    // Mix in a heavy or empty zero bin now and then.
    if (r.coin(0.3)) w[grid.zero_index()] = r.uniform(0.0, 5.0);
    if (r.coin(0.1)) w[grid.zero_index()] = 0.0;
    set.posteriors.emplace_back(grid, oracle::normalized(w));
  }
  return set;
}

}  // namespace

TEST(Detect, ReferencesAreConditionalOverMarginal) {
  PriorSpec prior;
  const auto grid = make_grid(prior.sigma_x, 64);
  const auto refs = build_references(prior, grid);
  for (std::size_t m = 0; m < grid.n_d; ++m) {
    if (m == grid.zero_index()) {
      EXPECT_DOUBLE_EQ(refs.r0[m], 1.0 / (1.0 - prior.q));
      EXPECT_EQ(refs.r1[m], 0.0);
    } else {
      EXPECT_EQ(refs.r0[m], 0.0);
      EXPECT_NEAR(refs.r1[m], 1.0 / prior.q, 1e-12);
    }
  }
}

TEST(Detect, BhtScoreIsPosteriorOddsOverPriorOdds) {
  oracle::Rand r(51);
  for (int t = 0; t < 20; ++t) {
    PriorSpec prior;
    prior.q = r.uniform(0.01, 0.5);
    const auto grid = make_grid(prior.sigma_x, 32);
    const auto refs = build_references(prior, grid);
    const auto post = random_posteriors(r, grid, 60);
    const auto est = bht_detect(post, refs, prior.q);
    for (std::size_t i = 0; i < post.posteriors.size(); ++i) {
      const double p0 = post.posteriors[i][grid.zero_index()];
      const double expect = std::log((1.0 - p0) / prior.q) - std::log(p0 / (1.0 - prior.q));
      if (p0 == 0.0) {
        EXPECT_EQ(est.scores[i], std::numeric_limits<double>::infinity());
      } else if (p0 == 1.0) {
        EXPECT_EQ(est.scores[i], -std::numeric_limits<double>::infinity());
      } else {
        EXPECT_NEAR(est.scores[i], expect, 1e-9 * (1.0 + std::abs(expect)));
      }
      // With the slab off the zero bin the test reduces to P(zero bin) < 1/2.
      if (std::abs(p0 - 0.5) > 1e-12) EXPECT_EQ(est.s_hat[i] != 0, p0 < 0.5) << p0;
    }
  }
}

TEST(Detect, MapDetectorPicksLargestBinWithSmallMagnitudeTies) {
  const auto grid = make_grid(1.0, 8);  // x = -3, -2.25, ..., 2.25, zero at index 4
  PosteriorSet set;
  set.posteriors = {
      SampledPdf(grid, {0, 0, 0, 0, 1, 0, 0, 0}),
      SampledPdf(grid, {0, 0, 0, 0.3, 0.1, 0.3, 0, 0.3}),
      SampledPdf(grid, {0.5, 0, 0, 0, 0.5, 0, 0, 0}),
      SampledPdf(grid, {0, 0, 0.1, 0, 0, 0, 0.9, 0}),
  };
  const auto est = csbp_map_detect(set);
  EXPECT_EQ(est.s_hat, (Support{0, 1, 0, 1}));
  EXPECT_EQ(est.x_map(0), 0.0);
  EXPECT_DOUBLE_EQ(est.x_map(1), grid.x(3));
  EXPECT_EQ(est.x_map(2), 0.0);
  EXPECT_DOUBLE_EQ(est.x_map(3), grid.x(6));
}

TEST(Detect, MapDetectorAgreesWithArgmax) {
  oracle::Rand r(52);
  const auto grid = make_grid(2.0, 64);
  const auto post = random_posteriors(r, grid, 300);
  const auto est = csbp_map_detect(post);
  for (std::size_t i = 0; i < post.posteriors.size(); ++i) {
    const auto p = post.posteriors[i].values();
    const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    const bool tie_with_zero = p[best] == p[grid.zero_index()];
    EXPECT_EQ(est.s_hat[i] != 0, !tie_with_zero && best != grid.zero_index());
  }
}

TEST(Detect, ThresholdDomain) {
  EXPECT_DOUBLE_EQ(bht_threshold(0.05), std::log(19.0));
  EXPECT_THROW(bht_threshold(0.0), ParameterError);
  EXPECT_THROW(bht_threshold(1.0), ParameterError);
}

TEST(Detect, HighSnrRecoveryFindsTheSupport) {
  // End-to-end: BP plus BHT on an easy instance recovers the exact support.
  PriorSpec prior;
  const auto g = generate_matrix(200, 150, 5, RngSeed{3, 1});
  const auto sig = generate_signal(200, prior, RngSeed{3, 2});
  const NoiseSpec noise = sigma_w_for_snr(40.0, g, prior);
  const Vector z = apply(g, sig.x0) + generate_noise(150, noise, RngSeed{3, 3});
  const auto r = recover(g, z, prior, noise, 128, BpConfig{}, Algorithm::kBhtBp);
  EXPECT_EQ(r.s_hat, sig.s);
  EXPECT_LT(normalized_mse(r.x_hat, sig.x0, 1.0), 1e-3);
}
