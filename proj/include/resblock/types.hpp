#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace resblock {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

inline long dyad_count(int n) { return static_cast<long>(n) * (n - 1) / 2; }

/// Flat index of the unordered pair (i, j), i < j, in canonical dyad order:
/// (0,1), (0,2), ..., (0,N-1), (1,2), ...
inline long dyad_index(int i, int j, int n) {
  return static_cast<long>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
}

template <typename F>
void for_each_dyad(int n, F&& body) {
  long d = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++d) {
      body(i, j, d);
    }
  }
}

/// Undirected binary adjacency structure with zero diagonal plus the node
/// identity map. Immutable after construction.
struct Sociomatrix {
  BinaryMatrix adjacency;
  std::vector<std::string> node_ids;

  Sociomatrix() = default;
  Sociomatrix(BinaryMatrix adj, std::vector<std::string> ids);

  int n_nodes() const { return static_cast<int>(adjacency.rows()); }
  long n_edges() const;
  IntVector degrees() const;
  /// Validates symmetry, zero diagonal, binary entries, and unique ids.
  void validate() const;
};

struct NodeCovariates {
  std::vector<std::string> gender_levels;  // sorted, defines index coding
  std::vector<std::string> race_levels;
  IntVector gender;      // per-node level index
  IntVector race;        // per-node level index
  IntVector grade;       // per-node ordinal value
  IntVector degree_bin;  // derived; empty until computed

  int n_nodes() const { return static_cast<int>(grade.size()); }
  bool has_degree_bins() const { return degree_bin.size() == grade.size() && grade.size() > 0; }
};

/// Per-dyad explanatory vectors in canonical dyad order, one named column per
/// covariate. Row count is always C(N,2).
struct DyadCovariates {
  int n_nodes = 0;
  Matrix values;  // n_dyads x n_columns
  std::vector<std::string> columns;
  std::vector<std::string> notes;  // provenance notes (dropped indicators etc.)

  long n_dyads() const { return values.rows(); }
  int n_columns() const { return static_cast<int>(values.cols()); }
  int column_index(const std::string& name) const;  // -1 if absent
};

}  // namespace resblock
