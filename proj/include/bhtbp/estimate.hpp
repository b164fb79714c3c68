#pragma once

#include <cstddef>

#include "bhtbp/graph.hpp"
#include "bhtbp/model.hpp"

namespace bhtbp {

struct EstimatorInputs {
  Vector z;
  /// Phi restricted to the (detected or true) support, M x K.
  Matrix submatrix;
  double sigma_x = 0.0;
  double sigma_w = 0.0;
};

struct RecoveryResult {
  Vector x_hat;
  Support s_hat;
  std::size_t iterations = 0;
  bool converged = false;
  double seconds = 0.0;
};

/// (I / sigma_x^2 + Phi_s^T Phi_s / sigma_w^2)^{-1} Phi_s^T z / sigma_w^2,
/// solved by Cholesky. Returns an empty vector for K = 0.
Vector lmmse_on_support(const EstimatorInputs& inputs);

/// Scatters `nonzeros` into the positions where s_hat is 1.
Vector assemble_estimate(const Support& s_hat, const Vector& nonzeros);

/// LMMSE with the true support.
Vector oracle_estimate(const Vector& z, const FactorGraph& graph, const Support& true_support,
                       double sigma_x, double sigma_w);

/// Tr[(I / sigma_x^2 + Phi_s^T Phi_s / sigma_w^2)^{-1}] / E||X||^2 with
/// E||X||^2 = N q E[X^2 | S = 1]. Throws ParameterError on an empty support.
double oracle_mse(const FactorGraph& graph, const Support& true_support, const PriorSpec& prior,
                  const NoiseSpec& noise);

/// ||x_hat - x0||^2 / ||x0||^2. When x0 = 0 the denominator falls back to
/// `expected_energy`.
double normalized_mse(const Vector& x_hat, const Vector& x0, double expected_energy);

}  // namespace bhtbp
