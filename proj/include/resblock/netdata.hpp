#pragma once

#include <string>
#include <utility>
#include <vector>

#include "resblock/types.hpp"

namespace resblock {

enum class Symmetrization { kUnion, kMutual };
enum class CovariateScheme { kBasic, kExpanded };

/// Load a directed nomination edge list plus node covariates and symmetrize.
///
/// The edge file holds one whitespace-separated `src_id dst_id` pair per line;
/// `#` starts a comment. The covariate file is a CSV with header
/// `id,gender,race,grade`. Node indexing follows covariate-file row order.
/// Union keeps a dyad when either direction was nominated, mutual only when
/// both were. Self-nominations are dropped and duplicates collapsed.
std::pair<Sociomatrix, NodeCovariates> load_network(const std::string& edge_file,
                                                    const std::string& covariate_file,
                                                    Symmetrization rule);

/// Build the per-dyad covariate matrix.
///
/// basic: [intercept, same_gender, same_race, grade_diff].
/// expanded: intercept and same_gender, plus one indicator per observed race
/// pairing, grade pairing, and degree-bin pairing (unobserved pairings get no
/// column; each drop is recorded in the provenance notes). Column order is
/// deterministic, sorted by level within each group.
DyadCovariates build_dyad_covariates(const NodeCovariates& nodes, CovariateScheme scheme);

/// Group observed degrees into ordinal bins: bin index = number of cutpoints
/// strictly below the degree. Defaults give ranges 0-3, 4-7, 8+.
IntVector compute_degree_bins(const Sociomatrix& g, const std::vector<int>& cutpoints = {3, 7});

}  // namespace resblock
