#pragma once

#include <map>
#include <string>
#include <vector>

#include "resblock/confidence.hpp"
#include "resblock/inference.hpp"
#include "resblock/types.hpp"

namespace resblock {

/// Assessment of one candidate partition against the covariate-only baseline.
struct AssessmentReport {
  int k = 1;
  double normalized_divergence = 0.0;
  double normalized_bound = 0.0;
  bool exceeds_bound = false;
  std::map<std::string, double> jaccard;  // covariate name -> alignment
  double variance_ratio = 0.0;
  Eigen::MatrixXi crosstab;             // class x grade-level counts
  std::vector<int> crosstab_levels;     // grade values labelling the columns
  IntVector partition;
  std::string baseline_ref;             // fingerprint of the baseline fit
};

/// Mean baseline-fitted edge probability per block pair of z. The baseline
/// must be a K=1, theta=0 fit; its logistic probabilities keep every entry
/// strictly interior. Empty pairs get the overall mean as a placeholder.
Matrix baseline_nominal(const IntVector& z, int k, const FitResult& baseline,
                        const DyadCovariates& x);

/// Full assessment of one partition: sample proportions against baseline
/// nominal values, the Bonferroni-corrected uniform bound, and the covariate
/// alignment diagnostics.
AssessmentReport assess_partition(const IntVector& z, const Sociomatrix& a,
                                  const DyadCovariates& x, const FitResult& baseline,
                                  const BoundSpec& spec, const NodeCovariates& nodes);

/// Jaccard coefficient between the dyad co-membership sets of a partition and
/// a covariate labelling; 1 when both sets are empty.
double jaccard_alignment(const IntVector& z, const IntVector& labels);

/// Mean over classes of within-class degree variance divided by the total
/// degree variance (population variances; singletons contribute zero).
double degree_variance_ratio(const IntVector& z, const Sociomatrix& a);

/// Count matrix of class membership against a categorical labelling with
/// n_levels levels (labels are 0-based level indices).
Eigen::MatrixXi crosstab(const IntVector& z, const IntVector& labels, int n_levels);

/// Pearson correlation between the fitted node effects and observed degrees.
double alpha_degree_correlation(const FitResult& fit, const Sociomatrix& a);

struct DevianceResult {
  double deviance_change = 0.0;  // 2 * (loglik_full - loglik_withheld), >= 0
  double p_value = 1.0;
  int df = 0;
  std::vector<std::string> withheld_columns;
};

/// Analysis of deviance for one withheld covariate under the alpha = 0
/// logistic baseline, the only restriction where the chi-squared reference is
/// valid. `withhold` names a design column, or a column-group prefix such as
/// "race_pair" (df = number of matching columns).
DevianceResult analysis_of_deviance(const Sociomatrix& a, const DyadCovariates& x,
                                    const NodeCovariates& nodes, const std::string& withhold);

/// Fingerprint used to tie reports to the baseline fit they were computed
/// against.
std::string fit_fingerprint(const FitResult& fit);

}  // namespace resblock
