#pragma once

#include <iosfwd>
#include <vector>

#include "bhtbp/nbp.hpp"
#include "bhtbp/pdfgrid.hpp"

namespace bhtbp {

/// Per-bin ratios of the discrete conditionals to the sampled prior:
/// r0 = p_{X|S=0} / p_X and r1 = p_{X|S=1} / p_X, with 0/0 taken as 0.
struct ReferenceVectors {
  std::vector<double> r0;
  std::vector<double> r1;
};

struct SupportEstimate {
  Support s_hat;
  /// Log-likelihood-ratio scores (+-inf allowed). Empty for the MAP detector.
  std::vector<double> scores;
  /// Grid MAP values; filled only by csbp_map_detect.
  Vector x_map;
};

ReferenceVectors build_references(const PriorSpec& prior, const GridSpec& grid);

/// log((1 - q) / q).
double bht_threshold(double q);

/// score_i = log(sum r1 p_i) - log(sum r0 p_i); s_hat_i = 1 iff
/// score_i > log((1 - q) / q).
SupportEstimate bht_detect(const PosteriorSet& posteriors, const ReferenceVectors& refs,
                           double q);

/// Grid MAP per variable (ties go to the smaller |x|); s_hat_i = 1 iff the
/// MAP bin is not the zero bin and outweighs it.
SupportEstimate csbp_map_detect(const PosteriorSet& posteriors);

/// Rows `i,score,s_hat`.
void write_scores_csv(std::ostream& out, const SupportEstimate& estimate);

}  // namespace bhtbp
