#include "resblock/netdata.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace resblock {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

int parse_int(const std::string& s, const std::string& what, int line_no,
              const std::string& file) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("netdata: malformed " + what + " '" + s + "' at " + file + ":" +
                             std::to_string(line_no));
  }
}

// Maps category strings to indices against a sorted level table.
IntVector encode_levels(const std::vector<std::string>& raw, std::vector<std::string>& levels) {
  std::set<std::string> uniq(raw.begin(), raw.end());
  levels.assign(uniq.begin(), uniq.end());
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < static_cast<int>(levels.size()); ++i) index[levels[i]] = i;
  IntVector out(static_cast<Eigen::Index>(raw.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = index[raw[i]];
  return out;
}

}  // namespace

std::pair<Sociomatrix, NodeCovariates> load_network(const std::string& edge_file,
                                                    const std::string& covariate_file,
                                                    Symmetrization rule) {
  std::ifstream cov(covariate_file);
  if (!cov) throw std::runtime_error("netdata: cannot open covariate file " + covariate_file);

  std::string line;
  if (!std::getline(cov, line)) {
    throw std::runtime_error("netdata: empty covariate file " + covariate_file);
  }
  {
    const auto header = split_csv(line);
    if (header.size() != 4 || lower(header[0]) != "id" || lower(header[1]) != "gender" ||
        lower(header[2]) != "race" || lower(header[3]) != "grade") {
      throw std::runtime_error("netdata: covariate header must be 'id,gender,race,grade' in " +
                               covariate_file);
    }
  }

  std::vector<std::string> ids;
  std::vector<std::string> gender_raw, race_raw;
  std::vector<int> grade_raw;
  std::unordered_map<std::string, int> id_index;
  int line_no = 1;
  while (std::getline(cov, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4) {
      throw std::runtime_error("netdata: malformed line at " + covariate_file + ":" +
                               std::to_string(line_no));
    }
    for (const auto& f : fields) {
      if (f.empty()) {
        throw std::runtime_error("netdata: missing covariate value at " + covariate_file + ":" +
                                 std::to_string(line_no));
      }
    }
    if (!id_index.emplace(fields[0], static_cast<int>(ids.size())).second) {
      throw std::runtime_error("netdata: duplicate node id '" + fields[0] + "' in " +
                               covariate_file);
    }
    ids.push_back(fields[0]);
    gender_raw.push_back(fields[1]);
    race_raw.push_back(fields[2]);
    grade_raw.push_back(parse_int(fields[3], "grade", line_no, covariate_file));
  }
  const int n = static_cast<int>(ids.size());
  if (n == 0) throw std::runtime_error("netdata: covariate file has no rows: " + covariate_file);

  std::ifstream edges(edge_file);
  if (!edges) throw std::runtime_error("netdata: cannot open edge file " + edge_file);

  BinaryMatrix nominated = BinaryMatrix::Zero(n, n);  // directed nominations
  line_no = 0;
  while (std::getline(edges, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::stringstream ss(line);
    std::string src, dst, extra;
    if (!(ss >> src)) continue;  // blank or comment-only line
    if (!(ss >> dst) || (ss >> extra)) {
      throw std::runtime_error("netdata: malformed line at " + edge_file + ":" +
                               std::to_string(line_no));
    }
    const auto si = id_index.find(src);
    const auto di = id_index.find(dst);
    if (si == id_index.end()) {
      throw std::runtime_error("netdata: unknown node id '" + src + "' at " + edge_file + ":" +
                               std::to_string(line_no));
    }
    if (di == id_index.end()) {
      throw std::runtime_error("netdata: unknown node id '" + dst + "' at " + edge_file + ":" +
                               std::to_string(line_no));
    }
    if (si->second == di->second) continue;  // self-nomination dropped
    nominated(si->second, di->second) = 1;
  }

  BinaryMatrix adj = BinaryMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool fwd = nominated(i, j) != 0;
      const bool bwd = nominated(j, i) != 0;
      const bool keep = rule == Symmetrization::kUnion ? (fwd || bwd) : (fwd && bwd);
      adj(i, j) = adj(j, i) = keep ? 1 : 0;
    }
  }

  NodeCovariates nodes;
  nodes.gender = encode_levels(gender_raw, nodes.gender_levels);
  nodes.race = encode_levels(race_raw, nodes.race_levels);
  nodes.grade = Eigen::Map<const IntVector>(grade_raw.data(), n);

  return {Sociomatrix(std::move(adj), std::move(ids)), std::move(nodes)};
}

namespace {

// Unordered level pairing (lo <= hi) used for the expanded scheme indicators.
using Pairing = std::pair<int, int>;

Pairing make_pairing(int a, int b) { return a <= b ? Pairing{a, b} : Pairing{b, a}; }

// Observed pairings in deterministic (sorted) order, plus notes for the rest.
std::vector<Pairing> observed_pairings(const IntVector& levels, int n_levels,
                                       const std::string& group,
                                       const std::vector<std::string>& level_names,
                                       std::vector<std::string>& notes) {
  const int n = static_cast<int>(levels.size());
  std::set<Pairing> seen;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      seen.insert(make_pairing(levels[i], levels[j]));
    }
  }
  std::vector<Pairing> out(seen.begin(), seen.end());
  for (int a = 0; a < n_levels; ++a) {
    for (int b = a; b < n_levels; ++b) {
      if (!seen.count({a, b})) {
        notes.push_back(group + " pairing (" + level_names[a] + "," + level_names[b] +
                        ") unobserved; indicator dropped");
      }
    }
  }
  return out;
}

std::vector<std::string> int_names(int lo, int hi) {
  std::vector<std::string> out;
  for (int v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
  return out;
}

}  // namespace

DyadCovariates build_dyad_covariates(const NodeCovariates& nodes, CovariateScheme scheme) {
  const int n = nodes.n_nodes();
  if (n < 2) throw std::invalid_argument("netdata: need at least two nodes for dyad covariates");
  const long m = dyad_count(n);

  DyadCovariates out;
  out.n_nodes = n;

  if (scheme == CovariateScheme::kBasic) {
    out.columns = {"intercept", "same_gender", "same_race", "grade_diff"};
    out.values.resize(m, 4);
    for_each_dyad(n, [&](int i, int j, long d) {
      out.values(d, 0) = 1.0;
      out.values(d, 1) = nodes.gender[i] == nodes.gender[j] ? 1.0 : 0.0;
      out.values(d, 2) = nodes.race[i] == nodes.race[j] ? 1.0 : 0.0;
      out.values(d, 3) = std::abs(nodes.grade[i] - nodes.grade[j]);
    });
    return out;
  }

  if (!nodes.has_degree_bins()) {
    throw std::invalid_argument("netdata: expanded scheme requires degree bins to be computed");
  }

  // Grades and degree bins are re-coded against their observed sorted values
  // so pairings enumerate cleanly.
  std::set<int> grade_set(nodes.grade.data(), nodes.grade.data() + n);
  std::vector<int> grade_values(grade_set.begin(), grade_set.end());
  IntVector grade_idx(n);
  for (int i = 0; i < n; ++i) {
    grade_idx[i] = static_cast<int>(
        std::lower_bound(grade_values.begin(), grade_values.end(), nodes.grade[i]) -
        grade_values.begin());
  }
  std::vector<std::string> grade_names;
  for (int v : grade_values) grade_names.push_back(std::to_string(v));

  const int max_bin = nodes.degree_bin.maxCoeff();
  const auto bin_names = int_names(0, max_bin);

  const auto race_pairs =
      observed_pairings(nodes.race, static_cast<int>(nodes.race_levels.size()), "race",
                        nodes.race_levels, out.notes);
  const auto grade_pairs = observed_pairings(grade_idx, static_cast<int>(grade_values.size()),
                                             "grade", grade_names, out.notes);
  const auto bin_pairs =
      observed_pairings(nodes.degree_bin, max_bin + 1, "degree_bin", bin_names, out.notes);

  out.columns = {"intercept", "same_gender"};
  for (const auto& p : race_pairs) {
    out.columns.push_back("race_pair(" + nodes.race_levels[p.first] + "," +
                          nodes.race_levels[p.second] + ")");
  }
  for (const auto& p : grade_pairs) {
    out.columns.push_back("grade_pair(" + grade_names[p.first] + "," + grade_names[p.second] +
                          ")");
  }
  for (const auto& p : bin_pairs) {
    out.columns.push_back("degbin_pair(" + bin_names[p.first] + "," + bin_names[p.second] + ")");
  }

  std::map<Pairing, int> race_col, grade_col, bin_col;
  int col = 2;
  for (const auto& p : race_pairs) race_col[p] = col++;
  for (const auto& p : grade_pairs) grade_col[p] = col++;
  for (const auto& p : bin_pairs) bin_col[p] = col++;

  out.values = Matrix::Zero(m, col);
  for_each_dyad(n, [&](int i, int j, long d) {
    out.values(d, 0) = 1.0;
    out.values(d, 1) = nodes.gender[i] == nodes.gender[j] ? 1.0 : 0.0;
    out.values(d, race_col.at(make_pairing(nodes.race[i], nodes.race[j]))) = 1.0;
    out.values(d, grade_col.at(make_pairing(grade_idx[i], grade_idx[j]))) = 1.0;
    out.values(d, bin_col.at(make_pairing(nodes.degree_bin[i], nodes.degree_bin[j]))) = 1.0;
  });
  return out;
}

IntVector compute_degree_bins(const Sociomatrix& g, const std::vector<int>& cutpoints) {
  for (size_t c = 1; c < cutpoints.size(); ++c) {
    if (cutpoints[c] <= cutpoints[c - 1]) {
      throw std::invalid_argument("netdata: degree bin cutpoints must be strictly increasing");
    }
  }
  const IntVector deg = g.degrees();
  IntVector bins(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i) {
    int b = 0;
    for (int c : cutpoints) {
      if (c < deg[i]) ++b;
    }
    bins[i] = b;
  }
  return bins;
}

}  // namespace resblock
