#include "resblock/simstudy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resblock/confidence.hpp"
#include "resblock/netdata.hpp"
#include "resblock/parallel.hpp"

namespace resblock {

namespace {

void check_probs(const std::vector<double>& probs, const std::string& what) {
  if (probs.empty()) throw std::invalid_argument("simstudy: " + what + " probabilities empty");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("simstudy: " + what + " probabilities negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("simstudy: " + what + " probabilities must sum to 1");
  }
}

int draw_categorical(const std::vector<double>& probs, RngStream& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

std::vector<std::string> letter_levels(size_t count) {
  std::vector<std::string> out;
  for (size_t i = 0; i < count; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
  return out;
}

}  // namespace

void CovariateGenerator::validate() const {
  check_probs(gender_probs, "gender");
  check_probs(race_probs, "race");
  if (grade_max < grade_min) throw std::invalid_argument("simstudy: empty grade range");
}

NodeCovariates CovariateGenerator::draw(int n_nodes, RngStream& rng) const {
  validate();
  NodeCovariates nodes;
  nodes.gender_levels = letter_levels(gender_probs.size());
  nodes.race_levels = letter_levels(race_probs.size());
  nodes.gender.resize(n_nodes);
  nodes.race.resize(n_nodes);
  nodes.grade.resize(n_nodes);
  const int n_grades = grade_max - grade_min + 1;
  for (int i = 0; i < n_nodes; ++i) {
    nodes.gender[i] = draw_categorical(gender_probs, rng);
    nodes.race[i] = draw_categorical(race_probs, rng);
    nodes.grade[i] = grade_min + rng.uniform_int(n_grades);
  }
  return nodes;
}

void SimScenario::validate() const {
  if (n_nodes < 2) throw std::invalid_argument("simstudy: need at least two nodes");
  if (n_replicates < 1) throw std::invalid_argument("simstudy: need at least one replicate");
  covariate_generator.validate();
  true_params.validate();
  if (true_params.n_nodes() != n_nodes) {
    throw std::invalid_argument("simstudy: true_params.z length must equal n_nodes");
  }
}

SimGraph generate_graph(const SimScenario& scenario, int replicate_index) {
  scenario.validate();
  RngStream rep_stream = RngStream(scenario.seed).substream(0x5249u).substream(
      static_cast<std::uint64_t>(replicate_index));
  RngStream cov_rng = rep_stream.substream(0);
  RngStream edge_rng = rep_stream.substream(1);

  SimGraph out;
  out.nodes = scenario.covariate_generator.draw(scenario.n_nodes, cov_rng);
  out.x = build_dyad_covariates(out.nodes, CovariateScheme::kBasic);
  if (scenario.true_params.beta.size() != out.x.n_columns()) {
    throw std::invalid_argument("simstudy: true beta length must match the basic design");
  }
  out.p_true = log_odds(scenario.true_params, out.x);

  const int n = scenario.n_nodes;
  BinaryMatrix adj = BinaryMatrix::Zero(n, n);
  for_each_dyad(n, [&](int i, int j, long d) {
    const bool edge = edge_rng.bernoulli(out.p_true.p[d]);
    adj(i, j) = adj(j, i) = edge ? 1 : 0;
  });
  std::vector<std::string> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = "n" + std::to_string(i);
  out.g = Sociomatrix(std::move(adj), std::move(ids));
  return out;
}

BiasStudyResult bias_study(const SimScenario& scenario,
                           const std::vector<Restriction>& restrictions, int threads) {
  scenario.validate();
  if (scenario.true_params.theta.cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("simstudy: bias study requires a theta = 0 truth");
  }

  struct RepOutcome {
    std::vector<Vector> beta;       // per restriction; empty if degenerate
    std::vector<bool> degenerate;
  };
  const int reps = scenario.n_replicates;
  std::vector<RepOutcome> outcomes(reps);

  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    const SimGraph sim = generate_graph(scenario, static_cast<int>(r));
    RepOutcome& out = outcomes[r];
    for (const Restriction restriction : restrictions) {
      FitConfig cfg;
      cfg.k = 1;
      cfg.restriction = restriction;
      cfg.seed = scenario.seed ^ (0xB1A5u + r);
      const FitResult f = fit(sim.g, sim.x, cfg);
      out.degenerate.push_back(f.degenerate);
      out.beta.push_back(f.params.beta);
    }
  });

  BiasStudyResult result;
  {
    const SimGraph probe = generate_graph(scenario, 0);
    result.components = probe.x.columns;
  }
  const int p = static_cast<int>(result.components.size());

  for (size_t ri = 0; ri < restrictions.size(); ++ri) {
    BiasRow row;
    row.restriction = restriction_name(restrictions[ri]);
    std::vector<Vector> errors;
    for (const auto& out : outcomes) {
      if (out.degenerate[ri]) {
        ++row.n_degenerate;
        continue;
      }
      errors.push_back(out.beta[ri] - scenario.true_params.beta);
    }
    row.n_used = static_cast<int>(errors.size());
    row.bias.assign(p, std::numeric_limits<double>::quiet_NaN());
    row.mc_se.assign(p, std::numeric_limits<double>::quiet_NaN());
    if (row.n_used > 0) {
      for (int c = 0; c < p; ++c) {
        double mean = 0.0;
        for (const auto& e : errors) mean += e[c];
        mean /= row.n_used;
        row.bias[c] = mean;
        if (row.n_used > 1) {
          double ss = 0.0;
          for (const auto& e : errors) ss += (e[c] - mean) * (e[c] - mean);
          row.mc_se[c] = std::sqrt(ss / (row.n_used - 1) / row.n_used);
        }
      }
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

SlackStudyResult slack_study(const std::vector<SimScenario>& scenarios, int k_min, int k_max,
                             double delta, const FitConfig& fit_proto, int threads) {
  if (k_min < 2 || k_max < k_min) {
    throw std::invalid_argument("simstudy: slack study needs 2 <= k_min <= k_max");
  }
  for (const auto& s : scenarios) {
    s.validate();
    if (s.true_params.theta.cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("simstudy: slack study requires theta = 0 truths");
    }
  }

  struct Unit {
    int scenario, replicate, k;
  };
  std::vector<Unit> units;
  for (size_t s = 0; s < scenarios.size(); ++s) {
    for (int r = 0; r < scenarios[s].n_replicates; ++r) {
      for (int k = k_min; k <= k_max; ++k) {
        units.push_back({static_cast<int>(s), r, k});
      }
    }
  }

  SlackStudyResult result;
  result.ratios.resize(units.size());
  parallel_for(units.size(), threads, [&](std::size_t u) {
    const Unit unit = units[u];
    const SimScenario& scenario = scenarios[unit.scenario];
    const SimGraph sim = generate_graph(scenario, unit.replicate);

    FitConfig cfg = fit_proto;
    cfg.k = unit.k;
    cfg.restriction = Restriction::kFull;
    cfg.seed = RngStream(scenario.seed).substream(0x51ACu + unit.replicate).substream(unit.k).seed();
    const FitResult f = fit(sim.g, sim.x, cfg);

    const BlockProportions bp =
        block_proportions(f.params.z, unit.k, sim.g, &sim.p_true);
    const double stat = divergence_statistic(bp, *bp.pbar);
    const double bound = uniform_bound({scenario.n_nodes, unit.k, delta, 1});
    result.ratios[u] = {unit.replicate, unit.k, stat / bound, f.degenerate};
  });

  std::vector<double> sorted;
  for (const auto& r : result.ratios) sorted.push_back(r.ratio);
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * (sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  };
  result.max_ratio = sorted.empty() ? 0.0 : sorted.back();
  result.p50 = quantile(0.5);
  result.p95 = quantile(0.95);

  const int n_bins = 20;
  const double top = std::max(1.0, result.max_ratio);
  result.bin_edges.resize(n_bins + 1);
  result.bin_counts.assign(n_bins, 0);
  for (int b = 0; b <= n_bins; ++b) result.bin_edges[b] = top * b / n_bins;
  for (double v : sorted) {
    int b = static_cast<int>(v / top * n_bins);
    if (b >= n_bins) b = n_bins - 1;
    ++result.bin_counts[b];
  }
  return result;
}

}  // namespace resblock
