#pragma once

#include <optional>
#include <string>
#include <vector>

#include "resblock/model.hpp"
#include "resblock/rng.hpp"
#include "resblock/types.hpp"

namespace resblock {

/// Model restrictions selecting which components are fitted.
///
/// kFull           theta, alpha, beta all free (theta pinned to 0 at K=1,
///                 where it is redundant with the intercept).
/// kBaseline       K forced to 1, theta = 0; alpha and beta free.
/// kPureBlockmodel alpha = 0 and beta = 0; theta free at every K.
/// kNoAlpha        alpha = 0; beta free; theta free for K >= 2 and pinned to 0
///                 at K=1, which reduces to plain logistic regression.
enum class Restriction { kFull, kBaseline, kPureBlockmodel, kNoAlpha };

std::string restriction_name(Restriction r);
Restriction restriction_from_name(const std::string& name);

struct FitConfig {
  int k = 1;
  Restriction restriction = Restriction::kFull;
  int max_em_iters = 200;
  int gibbs_sweeps_per_estep = 5;
  double newton_tol = 1e-8;
  int newton_max_iters = 100;
  std::optional<double> ridge;  // resolved per restriction when unset
  int n_restarts = 10;
  std::uint64_t seed = 0;

  void validate() const;
  double resolved_ridge() const;
  /// K after applying the restriction (baseline forces K = 1).
  int effective_k() const;
};

/// Which parameter blocks are free under a restriction at a given K.
struct ParameterMask {
  bool theta = false;
  bool alpha = false;
  bool beta = false;
};
ParameterMask parameter_mask(Restriction r, int k);

struct MStepResult {
  Matrix theta;
  Vector alpha;
  Vector beta;
  Vector beta_se;       // empty unless beta is free
  double loglik = 0.0;  // conditional log-likelihood at the optimum (no ridge)
  double grad_norm = 0.0;
  int iterations = 0;
  bool degenerate = false;  // separation: some fitted |log-odds| > 30
};

struct MStepOptions {
  Restriction restriction = Restriction::kNoAlpha;
  double ridge = 0.0;
  double tol = 1e-8;
  int max_iters = 100;
};

/// Maximize the conditional log-likelihood over the free parameter blocks for
/// a fixed partition, via damped Newton iterations. Alpha is optimized through
/// N-1 free coordinates so its sum-zero constraint holds exactly. A positive
/// ridge subtracts ridge/2 * ||params||^2 from the objective.
MStepResult m_step(const IntVector& z, int k, const Sociomatrix& a, const DyadCovariates& x,
                   const MStepOptions& opts, const ModelParams* warm_start = nullptr);

/// One coordinate-wise Gibbs pass over nodes 0..N-1, redrawing each label from
/// its full conditional. Consumes exactly N categorical draws from rng.
IntVector gibbs_sweep(const ModelParams& params, const Sociomatrix& a, const DyadCovariates& x,
                      RngStream& rng);

struct FitResult {
  ModelParams params;
  double best_loglik = 0.0;
  std::vector<double> trajectory;  // per-iteration log-likelihood, best restart
  bool degenerate = false;
  FitConfig config;  // resolved configuration echo
  int best_restart = 0;
};

/// Stochastic EM: alternate Gibbs sweeps over z with convex conditional
/// maximization, tracking the best-likelihood iterate across restarts.
/// Deterministic given the seed. Restarts run concurrently when threads > 1.
FitResult fit(const Sociomatrix& a, const DyadCovariates& x, const FitConfig& cfg,
              int threads = 1);

/// Relabel classes in decreasing block-size order (ties broken by smallest
/// member index) and permute theta to match. The likelihood is unchanged.
ModelParams canonicalize(const ModelParams& params);

}  // namespace resblock
