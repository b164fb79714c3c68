#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bhtbp/rng.hpp"

namespace bhtbp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Binary support indicator, one byte per variable.
using Support = std::vector<std::uint8_t>;

struct Edge {
  std::size_t factor;
  std::size_t variable;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Bipartite factor graph of a 0/1 measurement matrix with fixed column weight.
///
/// Edges are stored sorted by (factor, variable), so the edges of factor j
/// occupy the contiguous range [factor_offset(j), factor_offset(j + 1)).
/// Immutable after construction.
class FactorGraph {
 public:
  /// Builds from per-column row lists; validates every invariant.
  FactorGraph(std::size_t m, std::vector<std::vector<std::size_t>> column_rows);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t l() const { return l_; }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }

  /// N_V(i): factors adjacent to variable i, ascending.
  std::span<const std::size_t> variable_factors(std::size_t i) const { return var_factors_[i]; }
  /// Edge ids of variable i, aligned with variable_factors(i).
  std::span<const std::size_t> variable_edges(std::size_t i) const { return var_edges_[i]; }
  /// N_C(j): variables adjacent to factor j, ascending.
  std::span<const std::size_t> factor_variables(std::size_t j) const;
  std::size_t factor_offset(std::size_t j) const { return factor_offsets_[j]; }
  std::size_t factor_degree(std::size_t j) const {
    return factor_offsets_[j + 1] - factor_offsets_[j];
  }

  /// Number of 4-cycles (pairs of columns sharing two or more rows, counted
  /// per shared row pair). Diagnostic only.
  std::size_t count_four_cycles() const;

  Matrix dense() const;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t l_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> factor_offsets_;
  std::vector<std::size_t> factor_vars_;
  std::vector<std::vector<std::size_t>> var_factors_;
  std::vector<std::vector<std::size_t>> var_edges_;
};

/// LDPC-like matrix: per column, `l` distinct rows drawn uniformly.
FactorGraph generate_matrix(std::size_t n, std::size_t m, std::size_t l, const RngSeed& seed);

/// The identity measurement matrix (decoupled scalar channels, l = 1).
FactorGraph identity_graph(std::size_t n);

/// z = Phi x.
Vector apply(const FactorGraph& graph, const Vector& x);

/// Dense M x K matrix of the columns in `support`, ascending variable order.
Matrix restrict(const FactorGraph& graph, const Support& support);

/// Text format: header `M N L`, then one line per column with its l
/// ascending zero-based row indices.
void write_matrix(std::ostream& out, const FactorGraph& graph);
FactorGraph read_matrix(std::istream& in);

}  // namespace bhtbp
