#include "resblock/types.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace resblock {

Sociomatrix::Sociomatrix(BinaryMatrix adj, std::vector<std::string> ids)
    : adjacency(std::move(adj)), node_ids(std::move(ids)) {
  validate();
}

long Sociomatrix::n_edges() const {
  long total = 0;
  const int n = n_nodes();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      total += adjacency(i, j);
    }
  }
  return total;
}

IntVector Sociomatrix::degrees() const {
  const int n = n_nodes();
  IntVector deg = IntVector::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      deg[i] += adjacency(i, j);
    }
  }
  return deg;
}

void Sociomatrix::validate() const {
  const int n = n_nodes();
  if (adjacency.cols() != n) {
    throw std::invalid_argument("netdata: adjacency matrix must be square");
  }
  if (static_cast<int>(node_ids.size()) != n) {
    throw std::invalid_argument("netdata: node_ids length must match matrix size");
  }
  for (int i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0) {
      throw std::invalid_argument("netdata: adjacency diagonal must be zero");
    }
    for (int j = 0; j < n; ++j) {
      if (adjacency(i, j) > 1) {
        throw std::invalid_argument("netdata: adjacency entries must be 0 or 1");
      }
      if (adjacency(i, j) != adjacency(j, i)) {
        throw std::invalid_argument("netdata: adjacency must be symmetric");
      }
    }
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : node_ids) {
    if (!seen.insert(id).second) {
      throw std::invalid_argument("netdata: duplicate node id '" + id + "'");
    }
  }
}

int DyadCovariates::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

}  // namespace resblock
