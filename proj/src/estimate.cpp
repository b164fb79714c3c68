#include "bhtbp/estimate.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"

namespace bhtbp {
namespace {

Eigen::LLT<Matrix> factor_system(const Matrix& phi_s, double sigma_x, double sigma_w) {
  if (!(sigma_x > 0.0) || !(sigma_w > 0.0) || !std::isfinite(sigma_x) ||
      !std::isfinite(sigma_w)) {
    throw ParameterError("LMMSE needs finite sigma_x > 0 and sigma_w > 0");
  }
  const Eigen::Index k = phi_s.cols();
  Matrix system = phi_s.transpose() * phi_s / (sigma_w * sigma_w);
  system.diagonal().array() += 1.0 / (sigma_x * sigma_x);
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(fmt::format("LMMSE system of size {} is not positive definite", k));
  }
  return llt;
}

}  // namespace

Vector lmmse_on_support(const EstimatorInputs& in) {
  if (in.submatrix.rows() != in.z.size()) {
    throw DimensionError(fmt::format("LMMSE: submatrix has {} rows, z has length {}",
                                     in.submatrix.rows(), in.z.size()));
  }
  if (in.submatrix.cols() == 0) return Vector();
  const auto llt = factor_system(in.submatrix, in.sigma_x, in.sigma_w);
  Vector x = llt.solve(in.submatrix.transpose() * in.z / (in.sigma_w * in.sigma_w));
  if (!x.allFinite()) throw NumericalError("LMMSE solve produced non-finite values");
  return x;
}

Vector assemble_estimate(const Support& s_hat, const Vector& nonzeros) {
  const auto k = std::count_if(s_hat.begin(), s_hat.end(), [](auto s) { return s != 0; });
  if (k != nonzeros.size()) {
    throw DimensionError(
        fmt::format("support has {} ones but {} nonzero values were given", k, nonzeros.size()));
  }
  Vector x = Vector::Zero(static_cast<Eigen::Index>(s_hat.size()));
  Eigen::Index next = 0;
  for (std::size_t i = 0; i < s_hat.size(); ++i) {
    if (s_hat[i]) x(static_cast<Eigen::Index>(i)) = nonzeros(next++);
  }
  return x;
}

Vector oracle_estimate(const Vector& z, const FactorGraph& graph, const Support& true_support,
                       double sigma_x, double sigma_w) {
  const EstimatorInputs in{z, restrict(graph, true_support), sigma_x, sigma_w};
  return assemble_estimate(true_support, lmmse_on_support(in));
}

double oracle_mse(const FactorGraph& graph, const Support& true_support, const PriorSpec& prior,
                  const NoiseSpec& noise) {
  const Matrix phi_s = restrict(graph, true_support);
  if (phi_s.cols() == 0) throw ParameterError("oracle MSE is undefined on an empty support");
  const auto llt = factor_system(phi_s, prior.sigma_x, noise.sigma_w);
  const Matrix inverse = llt.solve(Matrix::Identity(phi_s.cols(), phi_s.cols()));
  const double energy =
      static_cast<double>(graph.n()) * prior.q * nonzero_second_moment(prior);
  return inverse.trace() / energy;
}

double normalized_mse(const Vector& x_hat, const Vector& x0, double expected_energy) {
  if (x_hat.size() != x0.size()) throw DimensionError("normalized_mse: length mismatch");
  const double err = (x_hat - x0).squaredNorm();
  const double energy = x0.squaredNorm();
  return err / (energy > 0.0 ? energy : expected_energy);
}

}  // namespace bhtbp
