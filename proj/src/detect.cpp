#include "bhtbp/detect.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"

namespace bhtbp {

ReferenceVectors build_references(const PriorSpec& prior, const GridSpec& grid) {
  const SampledPdf p_x = sample_prior(prior, grid);
  const std::vector<double> slab = sample_slab(prior, grid);
  ReferenceVectors refs{std::vector<double>(grid.n_d, 0.0), std::vector<double>(grid.n_d, 0.0)};
  for (std::size_t m = 0; m < grid.n_d; ++m) {
    if (p_x[m] <= 0.0) continue;
    const double spike = m == grid.zero_index() ? 1.0 : 0.0;
    refs.r0[m] = spike / p_x[m];
    refs.r1[m] = slab[m] / p_x[m];
  }
  return refs;
}

double bht_threshold(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError(fmt::format("q = {} outside (0, 1)", q));
  return std::log((1.0 - q) / q);
}

SupportEstimate bht_detect(const PosteriorSet& posteriors, const ReferenceVectors& refs,
                           double q) {
  const double threshold = bht_threshold(q);
  const std::size_t n = posteriors.posteriors.size();
  SupportEstimate est{Support(n, 0), std::vector<double>(n, 0.0), Vector()};
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = posteriors.posteriors[i].values();
    if (p.size() != refs.r0.size()) throw DimensionError("bht_detect: grid size mismatch");
    double h1 = 0.0, h0 = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
      h1 += refs.r1[m] * p[m];
      h0 += refs.r0[m] * p[m];
    }
    double score;
    if (h1 > 0.0 && h0 > 0.0) {
      score = std::log(h1) - std::log(h0);
    } else if (h1 > 0.0) {
      score = std::numeric_limits<double>::infinity();
    } else {
      // Covers h1 == 0 (all mass on the zero bin) and the all-zero posterior.
      score = -std::numeric_limits<double>::infinity();
    }
    est.scores[i] = score;
    est.s_hat[i] = score > threshold ? 1 : 0;
  }
  return est;
}

SupportEstimate csbp_map_detect(const PosteriorSet& posteriors) {
  const std::size_t n = posteriors.posteriors.size();
  SupportEstimate est{Support(n, 0), {}, Vector::Zero(static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    const SampledPdf& p = posteriors.posteriors[i];
    const GridSpec& grid = p.grid();
    const std::size_t zero = grid.zero_index();
    // Scan outward from the zero bin so the first maximum found has the
    // smallest |x|; on equal |x| the negative side wins.
    std::size_t best = zero;
    for (std::size_t r = 1; r <= zero; ++r) {
      if (p[zero - r] > p[best]) best = zero - r;
      if (zero + r < grid.n_d && p[zero + r] > p[best]) best = zero + r;
    }
    if (best != zero && p[best] > p[zero]) {
      est.s_hat[i] = 1;
      est.x_map(static_cast<Eigen::Index>(i)) = grid.x(best);
    }
  }
  return est;
}

void write_scores_csv(std::ostream& out, const SupportEstimate& estimate) {
  out << "i,score,s_hat\n";
  for (std::size_t i = 0; i < estimate.s_hat.size(); ++i) {
    const double score = i < estimate.scores.size() ? estimate.scores[i]
                                                    : std::numeric_limits<double>::quiet_NaN();
    out << fmt::format("{},{:.17g},{}\n", i, score, static_cast<int>(estimate.s_hat[i]));
  }
}

}  // namespace bhtbp
