#include "bhtbp/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "bhtbp/errors.hpp"

namespace bhtbp {

FactorGraph::FactorGraph(std::size_t m, std::vector<std::vector<std::size_t>> column_rows)
    : n_(column_rows.size()), m_(m) {
  if (n_ == 0 || m_ == 0) throw ParameterError("factor graph needs n >= 1 and m >= 1");
  l_ = column_rows.front().size();
  if (l_ == 0 || l_ > m_) {
    throw ParameterError(fmt::format("column weight {} infeasible for m = {}", l_, m_));
  }
  var_factors_.resize(n_);
  edges_.reserve(n_ * l_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto& rows = column_rows[i];
    if (rows.size() != l_) {
      throw ParameterError(
          fmt::format("column {} has weight {}, expected {}", i, rows.size(), l_));
    }
    std::sort(rows.begin(), rows.end());
    if (std::adjacent_find(rows.begin(), rows.end()) != rows.end()) {
      throw ParameterError(fmt::format("column {} has a duplicate row", i));
    }
    if (rows.back() >= m_) {
      throw ParameterError(fmt::format("column {} row index {} out of range", i, rows.back()));
    }
    var_factors_[i] = rows;
    for (std::size_t j : rows) edges_.push_back({j, i});
  }
  std::sort(edges_.begin(), edges_.end());

  factor_offsets_.assign(m_ + 1, 0);
  factor_vars_.resize(edges_.size());
  var_edges_.assign(n_, {});
  for (auto& v : var_edges_) v.reserve(l_);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    factor_offsets_[edges_[e].factor + 1]++;
    factor_vars_[e] = edges_[e].variable;
    // Edges are visited in ascending factor order, so var_edges_ stays
    // aligned with the ascending var_factors_.
    var_edges_[edges_[e].variable].push_back(e);
  }
  for (std::size_t j = 0; j < m_; ++j) factor_offsets_[j + 1] += factor_offsets_[j];
}

std::span<const std::size_t> FactorGraph::factor_variables(std::size_t j) const {
  return std::span<const std::size_t>(factor_vars_).subspan(factor_offsets_[j],
                                                            factor_degree(j));
}

std::size_t FactorGraph::count_four_cycles() const {
  std::size_t cycles = 0;
  std::vector<std::size_t> shared(n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    std::fill(shared.begin(), shared.end(), 0);
    for (std::size_t j : var_factors_[i]) {
      for (std::size_t k : factor_variables(j)) {
        if (k > i) shared[k]++;
      }
    }
    for (std::size_t k = i + 1; k < n_; ++k) cycles += shared[k] * (shared[k] - 1) / 2;
  }
  return cycles;
}

Matrix FactorGraph::dense() const {
  Matrix phi = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
  for (const Edge& e : edges_) {
    phi(static_cast<Eigen::Index>(e.factor), static_cast<Eigen::Index>(e.variable)) = 1.0;
  }
  return phi;
}

FactorGraph generate_matrix(std::size_t n, std::size_t m, std::size_t l, const RngSeed& seed) {
  if (l < 1 || l > m || m > n) {
    throw ParameterError(fmt::format("need 1 <= l <= m <= n, got n={} m={} l={}", n, m, l));
  }
  Engine engine = make_engine(seed);
  std::uniform_int_distribution<std::size_t> row(0, m - 1);
  std::vector<std::vector<std::size_t>> columns(n);
  for (auto& rows : columns) {
    rows.reserve(l);
    while (rows.size() < l) {
      const std::size_t r = row(engine);
      if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(r);
    }
  }
  return FactorGraph(m, std::move(columns));
}

FactorGraph identity_graph(std::size_t n) {
  std::vector<std::vector<std::size_t>> columns(n);
  for (std::size_t i = 0; i < n; ++i) columns[i] = {i};
  return FactorGraph(n, std::move(columns));
}

Vector apply(const FactorGraph& graph, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != graph.n()) {
    throw DimensionError(fmt::format("apply: x has length {}, graph has n = {}", x.size(),
                                     graph.n()));
  }
  Vector z = Vector::Zero(static_cast<Eigen::Index>(graph.m()));
  for (const Edge& e : graph.edges()) {
    z(static_cast<Eigen::Index>(e.factor)) += x(static_cast<Eigen::Index>(e.variable));
  }
  return z;
}

Matrix restrict(const FactorGraph& graph, const Support& support) {
  if (support.size() != graph.n()) {
    throw DimensionError(fmt::format("restrict: support has length {}, graph has n = {}",
                                     support.size(), graph.n()));
  }
  const auto k = std::count_if(support.begin(), support.end(), [](auto s) { return s != 0; });
  Matrix sub = Matrix::Zero(static_cast<Eigen::Index>(graph.m()), k);
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < graph.n(); ++i) {
    if (!support[i]) continue;
    for (std::size_t j : graph.variable_factors(i)) sub(static_cast<Eigen::Index>(j), col) = 1.0;
    ++col;
  }
  return sub;
}

void write_matrix(std::ostream& out, const FactorGraph& graph) {
  out << graph.m() << ' ' << graph.n() << ' ' << graph.l() << '\n';
  for (std::size_t i = 0; i < graph.n(); ++i) {
    const auto rows = graph.variable_factors(i);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r) out << ' ';
      out << rows[r];
    }
    out << '\n';
  }
}

FactorGraph read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("matrix file: missing header");
  std::istringstream header(line);
  long long m = 0, n = 0, l = 0;
  if (!(header >> m >> n >> l) || m <= 0 || n <= 0 || l <= 0) {
    throw ConfigError("matrix file: header must be `M N L` with positive integers");
  }
  std::vector<std::vector<std::size_t>> columns(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw ConfigError(fmt::format("matrix file: expected {} column lines, got {}", n, i));
    }
    std::istringstream row_stream(line);
    long long r = 0;
    auto& rows = columns[static_cast<std::size_t>(i)];
    while (row_stream >> r) {
      if (r < 0 || r >= m) {
        throw ConfigError(fmt::format("matrix file: column {} row {} out of range", i, r));
      }
      rows.push_back(static_cast<std::size_t>(r));
    }
    if (!row_stream.eof()) {
      throw ConfigError(fmt::format("matrix file: column {} has a non-integer token", i));
    }
    if (rows.size() != static_cast<std::size_t>(l)) {
      throw ConfigError(
          fmt::format("matrix file: column {} lists {} rows, header says {}", i, rows.size(), l));
    }
    if (!std::is_sorted(rows.begin(), rows.end()) ||
        std::adjacent_find(rows.begin(), rows.end()) != rows.end()) {
      throw ConfigError(fmt::format("matrix file: column {} rows not strictly ascending", i));
    }
  }
  try {
    return FactorGraph(static_cast<std::size_t>(m), std::move(columns));
  } catch (const ParameterError& e) {
    throw ConfigError(fmt::format("matrix file: {}", e.what()));
  }
}

}  // namespace bhtbp
