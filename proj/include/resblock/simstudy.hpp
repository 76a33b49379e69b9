#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "resblock/inference.hpp"
#include "resblock/model.hpp"
#include "resblock/rng.hpp"
#include "resblock/types.hpp"

namespace resblock {

/// Synthetic node-covariate generator mirroring the survey schema: gender on
/// two levels, race on five with a configurable skew, grade uniform over a
/// contiguous range.
struct CovariateGenerator {
  std::vector<double> gender_probs = {0.5, 0.5};
  std::vector<double> race_probs = {0.55, 0.20, 0.12, 0.08, 0.05};
  int grade_min = 7;
  int grade_max = 12;

  void validate() const;
  NodeCovariates draw(int n_nodes, RngStream& rng) const;
};

struct SimScenario {
  int n_nodes = 100;
  CovariateGenerator covariate_generator;
  ModelParams true_params;  // beta aligned with the basic covariate columns
  int n_replicates = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One simulated graph together with everything the studies need downstream.
struct SimGraph {
  Sociomatrix g;
  NodeCovariates nodes;
  DyadCovariates x;          // basic scheme
  EdgeProbabilities p_true;  // generating probabilities
};

/// Draw covariates, evaluate the generating log-odds, and sample each dyad
/// independently. Deterministic per (scenario seed, replicate index).
SimGraph generate_graph(const SimScenario& scenario, int replicate_index);

struct BiasRow {
  std::string restriction;
  std::vector<double> bias;  // mean(beta_hat - beta_true) per component
  std::vector<double> mc_se;  // Monte Carlo standard errors (NaN if undefined)
  int n_used = 0;
  int n_degenerate = 0;
};

struct BiasStudyResult {
  std::vector<std::string> components;  // covariate column names
  std::vector<BiasRow> rows;
};

/// Empirical bias of the fitted regression coefficients under each requested
/// restriction, over the scenario's replicates. Degenerate replicates are
/// excluded from the averages and counted.
BiasStudyResult bias_study(const SimScenario& scenario,
                           const std::vector<Restriction>& restrictions, int threads = 1);

struct SlackRatio {
  int replicate = 0;
  int k = 0;
  double ratio = 0.0;  // divergence statistic / uniform bound
  bool degenerate = false;
};

struct SlackStudyResult {
  std::vector<SlackRatio> ratios;
  double max_ratio = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  std::vector<double> bin_edges;   // histogram over [0, 1+]
  std::vector<long> bin_counts;
};

/// Fit the full model over a K range to graphs drawn from covariate-only
/// truths, and compare each divergence statistic (sample proportions against
/// the true per-pair means) to its uniform bound.
SlackStudyResult slack_study(const std::vector<SimScenario>& scenarios, int k_min, int k_max,
                             double delta, const FitConfig& fit_proto, int threads = 1);

}  // namespace resblock
