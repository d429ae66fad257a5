#include "termforge/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "termforge/diagnostics.hpp"
#include "termforge/error.hpp"
#include "termforge/kernels.hpp"
#include "termforge/text_io.hpp"

namespace termforge {

namespace {

double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) acc += a[p] * b[p];
  return acc;
}

// Unit-length copy of every row. Throws on a zero row.
Matrix normalized_rows(const Matrix& x) {
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double norm = std::sqrt(dot(r, r));
    if (!(norm > 0.0)) throw Error("row " + std::to_string(i) + " is a zero vector");
    for (auto& v : r) v /= norm;
  }
  return out;
}

// Renumbers ids by first appearance; returns old id -> new id.
std::vector<std::size_t> renumber(std::vector<std::size_t>& assignment, std::size_t n_ids) {
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> map(n_ids, kUnset);
  std::size_t next = 0;
  for (auto& a : assignment) {
    if (map[a] == kUnset) map[a] = next++;
    a = map[a];
  }
  return map;
}

Matrix kmeanspp_seeds(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.rows();
  Matrix c(k, x.cols());
  std::vector<bool> chosen(n, false);
  auto take = [&](std::size_t i, std::size_t slot) {
    chosen[i] = true;
    const auto src = x.row(i);
    std::copy(src.begin(), src.end(), c.row(slot).begin());
  };
  take(std::min(n - 1, static_cast<std::size_t>(open_unit(rng) * static_cast<double>(n))), 0);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = std::clamp(1.0 - dot(x.row(i), c.row(0)), 0.0, 2.0);

  for (std::size_t slot = 1; slot < k; ++slot) {
    const double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = open_unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (nearest[i] <= 0.0) continue;
        acc += nearest[i];
        pick = i;
        if (acc > u) break;
      }
    } else {
      for (pick = 0; pick < n && chosen[pick]; ++pick) {
      }
    }
    take(pick, slot);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], std::clamp(1.0 - dot(x.row(i), c.row(slot)), 0.0, 2.0));
    }
  }
  return c;
}

// Best single-point move between clusters that lowers the spherical objective
// sum(|C| - |S_C|), where S_C is the sum of member rows. Applies it and returns
// true; returns false when no move gains more than a rounding margin.
bool first_variation(const Matrix& x, std::vector<std::size_t>& assignment, std::size_t k) {
  const std::size_t n = x.rows();
  Matrix sums(k, x.cols());
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto dst = sums.row(assignment[i]);
    const auto src = x.row(i);
    for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += src[p];
    ++counts[assignment[i]];
  }
  std::vector<double> norms(k);
  for (std::size_t c = 0; c < k; ++c) norms[c] = std::sqrt(dot(sums.row(c), sums.row(c)));

  double best_gain = 1e-12 * static_cast<double>(n);
  std::size_t best_i = n, best_c = k;
  std::vector<double> tmp(x.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t from = assignment[i];
    if (counts[from] < 2) continue;
    const auto xi = x.row(i);
    for (std::size_t p = 0; p < tmp.size(); ++p) tmp[p] = sums(from, p) - xi[p];
    const double left = std::sqrt(dot(tmp, tmp)) - norms[from];
    for (std::size_t c = 0; c < k; ++c) {
      if (c == from) continue;
      for (std::size_t p = 0; p < tmp.size(); ++p) tmp[p] = sums(c, p) + xi[p];
      const double gain = left + std::sqrt(dot(tmp, tmp)) - norms[c];
      if (gain > best_gain) {
        best_gain = gain;
        best_i = i;
        best_c = c;
      }
    }
  }
  if (best_i == n) return false;
  assignment[best_i] = best_c;
  return true;
}

}  // namespace

std::size_t distinct_directions(const Matrix& x) {
  const Matrix unit = normalized_rows(x);
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < unit.rows(); ++i) {
    const auto r = unit.row(i);
    seen.emplace(r.begin(), r.end());
  }
  return seen.size();
}

double cosine_dissimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine dissimilarity: length mismatch");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (!(na > 0.0) || !(nb > 0.0)) throw Error("cosine dissimilarity undefined for a zero vector");
  return std::clamp(1.0 - dot(a, b) / (na * nb), 0.0, 2.0);
}

Clustering kmeans(const Representation& rep, const KmeansConfig& config) {
  if (config.k < 2) throw Error("kmeans: k must be at least 2");
  const std::size_t distinct = distinct_directions(rep.matrix);
  if (config.k > distinct) {
    throw Error("kmeans: k = " + std::to_string(config.k) + " exceeds the " +
                std::to_string(distinct) + " distinct row directions");
  }
  const Matrix x = normalized_rows(rep.matrix);
  const std::size_t n = x.rows();
  const std::size_t k = config.k;

  std::mt19937_64 rng(config.seed);
  Matrix centroids = kmeanspp_seeds(x, k, rng);

  Clustering out;
  out.algorithm = "KM";
  out.labels = rep.labels;
  std::vector<std::size_t> previous;
  double prev_obj = std::numeric_limits<double>::infinity();

  for (std::size_t iter = 1;; ++iter) {
    auto a = kernels::omp::nearest_centroid(x, centroids);

    std::vector<std::size_t> counts(k, 0);
    for (auto c : a.cluster) ++counts[c];
    bool repaired = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[a.cluster[i]] > 1 && (far == n || a.dissimilarity[i] > a.dissimilarity[far])) far = i;
      }
      --counts[a.cluster[far]];
      a.cluster[far] = c;
      a.dissimilarity[far] = 0.0;
      counts[c] = 1;
      const auto src = x.row(far);
      std::copy(src.begin(), src.end(), centroids.row(c).begin());
      repaired = true;
    }

    const double obj = std::accumulate(a.dissimilarity.begin(), a.dissimilarity.end(), 0.0);
    out.objective_trace.push_back(obj);
    out.iterations = iter;
    const bool same = a.cluster == previous;
    const bool flat = std::isfinite(prev_obj) && std::abs(prev_obj - obj) <= config.rel_tol * prev_obj;
    out.assignment = std::move(a.cluster);
    bool moved = false;
    if (!repaired && (same || flat)) {
      moved = iter < config.max_iter && first_variation(x, out.assignment, k);
      if (!moved) {
        out.converged = true;
        out.objective = obj;
        break;
      }
    }
    if (iter >= config.max_iter) {
      out.objective = obj;
      break;
    }

    Matrix sums(k, x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(out.assignment[i]);
      const auto src = x.row(i);
      for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += src[p];
    }
    for (std::size_t c = 0; c < k; ++c) {
      auto r = sums.row(c);
      const double norm = std::sqrt(dot(r, r));
      if (!(norm > 0.0)) continue;  // members cancel out; keep the old centroid
      auto dst = centroids.row(c);
      for (std::size_t p = 0; p < r.size(); ++p) dst[p] = r[p] / norm;
    }
    previous = out.assignment;
    prev_obj = obj;
  }

  const auto map = renumber(out.assignment, k);
  Matrix ordered(k, x.cols());
  for (std::size_t c = 0; c < k; ++c) {
    const auto src = centroids.row(c);
    std::copy(src.begin(), src.end(), ordered.row(map[c]).begin());
  }
  out.centroids = std::move(ordered);
  out.n_clusters = k;
  return out;
}

Clustering affinity_propagation(const Representation& rep, const ApConfig& config) {
  if (!(config.damping >= 0.5 && config.damping < 1.0)) {
    throw Error("affinity propagation: damping must lie in [0.5, 1)");
  }
  const std::size_t n = rep.matrix.rows();
  if (n == 0) throw Error("affinity propagation: empty representation");

  Clustering out;
  out.algorithm = "AP";
  out.labels = rep.labels;
  const Matrix d = kernels::omp::pairwise_cosine_dissimilarity(rep.matrix);
  if (n == 1) {
    out.assignment = {0};
    out.n_clusters = 1;
    out.exemplars = {rep.labels[0]};
    out.objective = config.preference.value_or(0.0);
    out.converged = true;
    return out;
  }

  Matrix s(n, n);
  std::vector<double> off;
  off.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      s(i, j) = 1.0 - d(i, j);
      off.push_back(s(i, j));
    }
  }
  double preference;
  if (config.preference) {
    preference = *config.preference;
  } else {
    const std::size_t m = off.size();
    std::nth_element(off.begin(), off.begin() + m / 2, off.end());
    const double upper = off[m / 2];
    if (m % 2 == 1) {
      preference = upper;
    } else {
      const double lower = *std::max_element(off.begin(), off.begin() + m / 2);
      preference = 0.5 * (lower + upper);
    }
  }
  for (std::size_t i = 0; i < n; ++i) s(i, i) = preference;

  // Lexicographic rank of each key drives every tie-break.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return rep.labels[a] < rep.labels[b]; });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  double max_abs = 0.0;
  for (double v : s.data()) max_abs = std::max(max_abs, std::abs(v));
  const double bias = 1e-12 * (1.0 + max_abs);
  Matrix biased = s;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      biased(i, k) += bias * static_cast<double>(n - rank[k]) / static_cast<double>(n);
    }
  }

  Matrix resp(n, n);
  Matrix avail(n, n);
  std::vector<std::size_t> exemplars;
  std::size_t stable = 0;
  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    kernels::omp::ap_responsibilities(biased, avail, resp, config.damping);
    kernels::omp::ap_availabilities(resp, avail, config.damping);
    std::vector<std::size_t> current;
    for (std::size_t k = 0; k < n; ++k) {
      if (resp(k, k) + avail(k, k) > 0.0) current.push_back(k);
    }
    stable = current == exemplars ? stable + 1 : 1;
    exemplars = std::move(current);
    out.iterations = iter;
    if (stable >= config.convergence_window && !exemplars.empty()) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    warn("affinity propagation did not converge within " + std::to_string(config.max_iter) +
         " iterations");
  }
  if (exemplars.empty()) {
    std::size_t best = order[0];
    for (std::size_t k = 0; k < n; ++k) {
      const double v = resp(k, k) + avail(k, k);
      const double b = resp(best, best) + avail(best, best);
      if (v > b || (v == b && rank[k] < rank[best])) best = k;
    }
    exemplars = {best};
    warn("affinity propagation found no exemplar; using the single best candidate");
  }

  std::vector<std::size_t> exemplar_of(n);
  std::vector<bool> is_exemplar(n, false);
  for (auto e : exemplars) is_exemplar[e] = true;
  double objective = preference * static_cast<double>(exemplars.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (is_exemplar[i]) {
      exemplar_of[i] = i;
      continue;
    }
    std::size_t best = exemplars[0];
    for (auto e : exemplars) {
      if (s(i, e) > s(i, best) || (s(i, e) == s(i, best) && rank[e] < rank[best])) best = e;
    }
    exemplar_of[i] = best;
    objective += s(i, best);
  }

  out.assignment = exemplar_of;
  const auto map = renumber(out.assignment, n);
  out.n_clusters = exemplars.size();
  out.exemplars.assign(out.n_clusters, {});
  for (auto e : exemplars) out.exemplars[map[e]] = rep.labels[e];
  out.objective = objective;
  return out;
}

void write_clustering_csv(const Clustering& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "np_key,cluster_id\n";
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    out << csv_field(c.labels[i]) << ',' << c.assignment[i] << '\n';
  }
}

void write_clustering_metadata(const Clustering& c, const nlohmann::json& config,
                               const std::filesystem::path& path) {
  nlohmann::json meta;
  meta["algorithm"] = c.algorithm;
  meta["config"] = config;
  meta["n_clusters"] = c.n_clusters;
  meta["n_points"] = c.labels.size();
  meta["objective"] = c.objective ? nlohmann::json(*c.objective) : nlohmann::json();
  meta["iterations"] = c.iterations;
  meta["converged"] = c.converged;
  meta["exemplars"] = c.exemplars;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << meta.dump(2) << '\n';
}

Clustering read_clustering_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  Clustering c;
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line_no == 1 && line.rfind("np_key,", 0) == 0)) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2) throw ParseError(line_no, "expected np_key,cluster_id", path.string());
    const auto [it, fresh] = ids.emplace(fields[1], ids.size());
    c.labels.push_back(fields[0]);
    c.assignment.push_back(it->second);
  }
  renumber(c.assignment, ids.size());
  c.n_clusters = ids.size();
  return c;
}

Clustering align_clustering(const Clustering& c, const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < c.labels.size(); ++i) where.emplace(c.labels[i], i);
  Clustering out;
  out.algorithm = c.algorithm;
  for (const auto& l : labels) {
    const auto it = where.find(l);
    if (it == where.end()) throw Error("'" + l + "' has no cluster assignment");
    out.labels.push_back(l);
    out.assignment.push_back(c.assignment[it->second]);
  }
  if (out.assignment.empty()) return out;
  const std::set<std::size_t> used(out.assignment.begin(), out.assignment.end());
  renumber(out.assignment, *used.rbegin() + 1);
  out.n_clusters = used.size();
  return out;
}

}  // namespace termforge
