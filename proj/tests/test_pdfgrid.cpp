#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "bhtbp/errors.hpp"
#include "bhtbp/pdfgrid.hpp"
#include "oracles.hpp"

using namespace bhtbp;

TEST(Grid, ZeroSitsExactlyOnTheMiddleBin) {
  for (std::size_t nd : {8u, 16u, 64u, 512u}) {
    for (double sx : {0.3, 1.0, 5.0}) {
      const auto g = make_grid(sx, nd);
      EXPECT_DOUBLE_EQ(g.t_s, 6.0 * sx / static_cast<double>(nd));
      EXPECT_EQ(g.x(g.zero_index()), 0.0);
      EXPECT_DOUBLE_EQ(g.x(0), -3.0 * sx);
    }
  }
  EXPECT_THROW(make_grid(1.0, 12), ParameterError);
  EXPECT_THROW(make_grid(1.0, 4), ParameterError);
  EXPECT_THROW(make_grid(0.0, 16), ParameterError);
}

TEST(Grid, PriorSamplingHasSpikeAndSlabMasses) {
  PriorSpec prior;
  const auto g = make_grid(prior.sigma_x, 128);
  const auto p = sample_prior(prior, g);
  EXPECT_NEAR(p.sum(), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(p[g.zero_index()], 1.0 - prior.q);
  const auto slab = sample_slab(prior, g);
  EXPECT_EQ(slab[g.zero_index()], 0.0);
  EXPECT_NEAR(std::accumulate(slab.begin(), slab.end(), 0.0), 1.0, 1e-14);
  // Dent bins share one plateau value; the slab is even about zero.
  for (std::size_t m = 1; m < g.n_d / 2; ++m) {
    EXPECT_NEAR(slab[g.zero_index() + m], slab[g.zero_index() - m], 1e-16);
  }
  // t_s = 0.234: bins 1..5 from zero are inside the dent, bin 6 is outside.
  EXPECT_DOUBLE_EQ(slab[g.zero_index() + 1], slab[g.zero_index() + 5]);
  EXPECT_NEAR(slab[g.zero_index() + 6] / slab[g.zero_index() + 1],
              std::exp(-0.5 * std::pow(g.x(g.zero_index() + 6) / 5.0, 2)) /
                  (5.0 * std::sqrt(2.0 * std::numbers::pi) * prior.lambda),
              1e-9);
}

TEST(Grid, SampledPdfFlushesAndValidates) {
  const auto g = make_grid(1.0, 8);
  SampledPdf p(g, {1e-310, 1, 0, 0, 0, 0, 0, 0});
  EXPECT_EQ(p[0], 0.0);
  EXPECT_THROW(SampledPdf(g, {1, 2}), DimensionError);
  EXPECT_THROW(SampledPdf(g, {-1, 0, 0, 0, 0, 0, 0, 0}), NumericalError);
  EXPECT_THROW(normalize(SampledPdf(g, std::vector<double>(8, 0.0))), DegenerateMessageError);
}

TEST(Grid, EntropyKnownValues) {
  const auto g = make_grid(1.0, 8);
  EXPECT_EQ(entropy(SampledPdf(g, {0, 0, 0, 1, 0, 0, 0, 0})), 0.0);
  EXPECT_NEAR(entropy(SampledPdf(g, std::vector<double>(8, 0.125))), std::log(8.0), 1e-14);
}

TEST(Grid, NoiseSamplesAreNormalizedGaussian) {
  const auto g = make_grid(2.0, 64);
  const auto p = sample_noise_pdf(NoiseSpec{1.0}, g);
  EXPECT_NEAR(p.sum(), 1.0, 1e-14);
  const double r = p[g.zero_index() + 4] / p[g.zero_index()];
  EXPECT_NEAR(r, std::exp(-0.5 * std::pow(4 * g.t_s, 2)), 1e-14);
  EXPECT_TRUE(noise_under_resolved(NoiseSpec{0.4 * g.t_s}, g));
  EXPECT_FALSE(noise_under_resolved(NoiseSpec{0.6 * g.t_s}, g));
}

TEST(Convolution, MatchesNestedSums) {
  oracle::Rand r(31);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = r.index(1, 5);
    std::vector<std::vector<double>> in(k);
    for (auto& v : in) v = r.masses(r.index(1, 70), 0.3);
    std::vector<std::span<const double>> views(in.begin(), in.end());
    const auto full = full_convolution_length(views);
    const auto direct = oracle::direct_convolution(in);
    ASSERT_EQ(direct.size(), full);
    const auto fast = convolve_many(views, full);
    EXPECT_LT(oracle::relative_l2(fast, direct), 1e-12);
    // Truncated and padded output lengths.
    const auto head = convolve_many(views, full / 2 + 1);
    for (std::size_t i = 0; i < head.size(); ++i) EXPECT_NEAR(head[i], direct[i], 1e-14);
    const auto padded = convolve_many(views, full + 7);
    for (std::size_t i = full; i < padded.size(); ++i) EXPECT_NEAR(padded[i], 0.0, 1e-14);
  }
}

TEST(Convolution, PreservesTotalMass) {
  oracle::Rand r(32);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<double>> in(r.index(2, 6));
    for (auto& v : in) v = r.masses(r.index(8, 128));
    std::vector<std::span<const double>> views(in.begin(), in.end());
    const auto out = convolve_many(views, full_convolution_length(views));
    EXPECT_NEAR(std::accumulate(out.begin(), out.end(), 0.0), 1.0, 1e-12);
  }
}
