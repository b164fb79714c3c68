#pragma once

// Independent reference implementations and random-instance generators
// shared by the unit tests and the acceptance binary. Nothing here calls the
// library routine it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bhtbp/graph.hpp"
#include "bhtbp/model.hpp"
#include "bhtbp/pdfgrid.hpp"

namespace oracle {

using bhtbp::Matrix;
using bhtbp::Vector;

class Rand {
 public:
  explicit Rand(std::uint64_t seed) : eng_(seed) {}

  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>()(eng_); }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }
  std::uint64_t seed() { return eng_(); }

  /// Nonnegative weights with a fraction of exact zeros, at least one positive.
  std::vector<double> masses(std::size_t n, double zero_prob = 0.2) {
    std::vector<double> v(n);
    for (auto& x : v) x = coin(zero_prob) ? 0.0 : uniform(0.0, 1.0);
    v[index(0, n - 1)] = uniform(0.5, 1.0);
    double s = 0.0;
    for (double x : v) s += x;
    for (auto& x : v) x /= s;
    return v;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

/// Nested-sum linear convolution, one input at a time.
inline std::vector<double> direct_convolution(const std::vector<std::vector<double>>& inputs) {
  std::vector<double> acc = inputs.front();
  for (std::size_t k = 1; k < inputs.size(); ++k) {
    const auto& b = inputs[k];
    std::vector<double> next(acc.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) next[i + j] += acc[i] * b[j];
    }
    acc = std::move(next);
  }
  return acc;
}

inline double relative_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline std::vector<double> normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (auto& x : v) x /= s;
  return v;
}

/// Factor-to-variable messages of factor j by enumerating every joint grid
/// configuration of the other neighbours:
///   b_k[m] = sum_{others} prod a_l[m_l] N(z_j - x_m - sum x_{m_l}; 0, sigma_w^2).
/// `vtf[k]` is the message from the k-th neighbour of j. Returns normalized
/// messages, one per neighbour.
inline std::vector<std::vector<double>> brute_force_ftv(const bhtbp::GridSpec& grid,
                                                        const std::vector<std::vector<double>>& vtf,
                                                        double sigma_w, double z) {
  const std::size_t d = vtf.size();
  const std::size_t n_d = grid.n_d;
  std::vector<std::vector<double>> out(d, std::vector<double>(n_d, 0.0));
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<std::size_t> others;
    for (std::size_t l = 0; l < d; ++l) {
      if (l != k) others.push_back(l);
    }
    std::vector<std::size_t> idx(others.size(), 0);
    for (;;) {
      double weight = 1.0;
      double sum = 0.0;
      for (std::size_t t = 0; t < others.size(); ++t) {
        weight *= vtf[others[t]][idx[t]];
        sum += grid.x(idx[t]);
      }
      if (weight > 0.0) {
        for (std::size_t m = 0; m < n_d; ++m) {
          const double r = (z - grid.x(m) - sum) / sigma_w;
          out[k][m] += weight * std::exp(-0.5 * r * r);
        }
      }
      std::size_t t = 0;
      while (t < idx.size() && ++idx[t] == n_d) idx[t++] = 0;
      if (t == idx.size()) break;
    }
    out[k] = normalized(out[k]);
  }
  return out;
}

/// LMMSE through the measurement-space form
///   sigma_x^2 Phi^T (sigma_x^2 Phi Phi^T + sigma_w^2 I)^{-1} z
/// with an explicit inverse.
inline Vector woodbury_lmmse(const Matrix& phi, const Vector& z, double sigma_x, double sigma_w) {
  // Measurement-space form, solved in extended precision so the reference
  // is not the limiting error.
  using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const LMat p = phi.cast<long double>();
  const long double sx2 = static_cast<long double>(sigma_x) * sigma_x;
  const long double sw2 = static_cast<long double>(sigma_w) * sigma_w;
  const LMat gram = sx2 * p * p.transpose() + sw2 * LMat::Identity(phi.rows(), phi.rows());
  const LVec y = gram.fullPivLu().solve(LVec(z.cast<long double>()));
  return (sx2 * p.transpose() * y).cast<double>();
}

inline double gk(const std::function<double(double)>& f, double a, double b) {
  if (a >= b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
}

inline double gauss_pdf(double x, double sigma) {
  const double u = x / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// f(z | S = 1) = integral of N(z; x, sigma_w^2) f(x | S = 1) dx, with the
/// dented slab normalized in closed form and the x-integral done piecewise.
inline double direct_h1(double z, const bhtbp::PriorSpec& prior, double sigma_w) {
  const double sx = prior.sigma_x;
  const double xm = prior.x_min;
  const double mass = std::erfc(xm / (sx * std::numbers::sqrt2)) + 2.0 * prior.lambda * xm;
  auto slab = [&](double x) { return gauss_pdf(z - x, sigma_w) * gauss_pdf(x, sx); };
  auto dent = [&](double x) { return gauss_pdf(z - x, sigma_w) * prior.lambda; };
  const double reach = 14.0 * (sx + sigma_w) + std::abs(z);
  std::vector<double> cuts{-reach, -xm, xm, reach, z - 12.0 * sigma_w, z + 12.0 * sigma_w};
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = std::clamp(cuts[i], -reach, reach);
    const double b = std::clamp(cuts[i + 1], -reach, reach);
    if (b <= a) continue;
    const double mid = 0.5 * (a + b);
    total += std::abs(mid) < xm ? gk(dent, a, b) : gk(slab, a, b);
  }
  return total / mass;
}

/// X | S = 1 drawn from the continuous dented slab (plateau included).
inline double draw_dented_slab(Rand& r, const bhtbp::PriorSpec& prior) {
  const double sx = prior.sigma_x;
  const double xm = prior.x_min;
  const double tail = std::erfc(xm / (sx * std::numbers::sqrt2));
  const double plateau = 2.0 * prior.lambda * xm;
  if (r.uniform(0.0, tail + plateau) < plateau) return r.uniform(-xm, xm);
  for (;;) {
    const double x = sx * r.normal();
    if (std::abs(x) >= xm) return x;
  }
}

}  // namespace oracle
