#include "termforge/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <set>
#include <sstream>

#include "termforge/couples.hpp"
#include "termforge/error.hpp"
#include "termforge/text_io.hpp"

namespace termforge {

namespace {

void require_shape(const Matrix& d, const Clustering& c) {
  if (d.rows() != c.labels.size() || d.cols() != c.labels.size()) {
    throw Error("dissimilarity matrix does not match the clustering");
  }
  if (c.n_clusters < 2) throw Error("internal index undefined for fewer than two clusters");
}

std::vector<std::vector<std::size_t>> members(const Clustering& c) {
  std::vector<std::vector<std::size_t>> out(c.n_clusters);
  for (std::size_t i = 0; i < c.assignment.size(); ++i) out[c.assignment[i]].push_back(i);
  return out;
}

double choose2(double n) { return n * (n - 1.0) / 2.0; }

// (cluster id, gold label id) for each clustered term the gold standard labels.
struct Matched {
  std::vector<std::size_t> cluster;
  std::vector<std::size_t> label;
};

Matched intersect(const Clustering& c, const GoldStandard& gold) {
  Matched m;
  std::map<std::string, std::size_t> label_id;
  for (const auto& l : gold.labels) label_id.emplace(l, label_id.size());
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    const auto it = gold.mapping.find(c.labels[i]);
    if (it == gold.mapping.end()) {
      if (missing.size() < 5) missing.push_back(c.labels[i]);
      continue;
    }
    m.cluster.push_back(c.assignment[i]);
    m.label.push_back(label_id.at(it->second));
  }
  if (m.cluster.empty()) {
    std::string sample;
    for (const auto& k : missing) sample += (sample.empty() ? "'" : ", '") + k + "'";
    throw Error("no clustered term appears in the gold standard (e.g. " + sample + ")");
  }
  return m;
}

}  // namespace

GoldStandard load_gold_standard(std::istream& in) {
  GoldStandard gold;
  std::set<std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected term<TAB>label");
    std::string label = line.substr(tab + 1);
    while (!label.empty() && (label.back() == ' ' || label.back() == '\t')) label.pop_back();
    if (label.empty()) throw ParseError(line_no, "empty label");
    std::string term;
    try {
      term = NounPhrase(line.substr(0, tab)).text();
    } catch (const Error&) {
      throw ParseError(line_no, "empty term");
    }
    const auto [it, fresh] = gold.mapping.emplace(term, label);
    if (!fresh && it->second != label) {
      throw Error("gold standard term '" + term + "' has conflicting labels '" + it->second +
                  "' and '" + label + "'");
    }
    labels.insert(label);
  }
  if (gold.mapping.empty()) throw Error("gold standard is empty");
  gold.labels.assign(labels.begin(), labels.end());
  return gold;
}

GoldStandard load_gold_standard(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("gold standard not found: " + path.string());
  try {
    return load_gold_standard(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<double> silhouette_values(const Matrix& d, const Clustering& c) {
  require_shape(d, c);
  const auto groups = members(c);
  const std::size_t n = c.labels.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = c.assignment[i];
    if (groups[own].size() == 1) continue;
    double a = 0.0;
    for (auto j : groups[own]) a += d(i, j);
    a /= static_cast<double>(groups[own].size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g == own || groups[g].empty()) continue;
      double sum = 0.0;
      for (auto j : groups[g]) sum += d(i, j);
      b = std::min(b, sum / static_cast<double>(groups[g].size()));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return s;
}

double silhouette_width(const Matrix& d, const Clustering& c) {
  const auto s = silhouette_values(d, c);
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum / static_cast<double>(s.size());
}

double dunn2(const Matrix& d, const Clustering& c) {
  require_shape(d, c);
  const auto groups = members(c);
  double min_between = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t h = g + 1; h < groups.size(); ++h) {
      double sum = 0.0;
      for (auto i : groups[g]) {
        for (auto j : groups[h]) sum += d(i, j);
      }
      min_between = std::min(min_between, sum / static_cast<double>(groups[g].size() * groups[h].size()));
    }
  }
  double max_within = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    double sum = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      for (std::size_t q = p + 1; q < g.size(); ++q) sum += d(g[p], g[q]);
    }
    max_within = std::max(max_within, sum / choose2(static_cast<double>(g.size())));
  }
  if (max_within == 0.0) return std::numeric_limits<double>::infinity();
  return min_between / max_within;
}

double purity(const Clustering& c, const GoldStandard& gold) {
  const auto m = intersect(c, gold);
  std::map<std::size_t, std::map<std::size_t, std::size_t>> table;
  for (std::size_t i = 0; i < m.cluster.size(); ++i) ++table[m.cluster[i]][m.label[i]];
  std::size_t correct = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [label, n] : counts) best = std::max(best, n);
    correct += best;
  }
  return static_cast<double>(correct) / static_cast<double>(m.cluster.size());
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw Error("adjusted Rand: labelings differ in length");
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, n] : cells) index += choose2(n);
  for (const auto& [key, n] : rows) sum_a += choose2(n);
  for (const auto& [key, n] : cols) sum_b += choose2(n);
  const double pairs = choose2(static_cast<double>(a.size()));
  const double expected = pairs > 0.0 ? sum_a * sum_b / pairs : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double adjusted_rand(const Clustering& c, const GoldStandard& gold) {
  const auto m = intersect(c, gold);
  return adjusted_rand_index(m.cluster, m.label);
}

double coverage(const Clustering& c, const GoldStandard& gold) {
  if (c.labels.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& l : c.labels) hit += gold.mapping.contains(l) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(c.labels.size());
}

IndexReport evaluate(const Matrix& d, const Clustering& c, const GoldStandard* gold) {
  IndexReport r;
  r.n_clusters = c.n_clusters;
  if (c.n_clusters >= 2) {
    r.silhouette = silhouette_width(d, c);
    r.dunn2 = dunn2(d, c);
  }
  if (gold != nullptr) {
    r.purity = purity(c, *gold);
    r.adjusted_rand = adjusted_rand(c, *gold);
    r.coverage = coverage(c, *gold);
  }
  return r;
}

std::string format_index(const std::optional<double>& v) {
  if (!v) return "NA";
  return format_real(*v);
}

std::string index_csv_row(const std::string& representation, const std::string& algorithm,
                          const IndexReport& report, std::optional<std::size_t> gold_labels) {
  std::optional<double> ratio;
  if (gold_labels && *gold_labels > 0) {
    ratio = static_cast<double>(report.n_clusters) / static_cast<double>(*gold_labels);
  }
  std::ostringstream row;
  row << csv_field(representation) << ',' << csv_field(algorithm) << ',' << report.n_clusters << ','
      << format_index(ratio) << ',' << format_index(report.purity) << ','
      << format_index(report.adjusted_rand) << ',' << format_index(report.dunn2) << ','
      << format_index(report.silhouette) << ',' << format_index(report.coverage);
  return row.str();
}

}  // namespace termforge
