#pragma once

// Independent reference implementations used only by the tests. They favour
// the most literal formula over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Rows = std::vector<std::vector<double>>;
using Labels = std::vector<std::size_t>;

// Every set partition of {0..n-1} as a restricted growth string.
inline std::vector<Labels> partitions(std::size_t n) {
  std::vector<Labels> out;
  Labels a(n, 0);
  auto rec = [&](auto&& self, std::size_t i, std::size_t max_label) -> void {
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (std::size_t v = 0; v <= max_label + 1; ++v) {
      a[i] = v;
      self(self, i + 1, std::max(max_label, v));
    }
  };
  if (n == 0) return {Labels{}};
  a[0] = 0;
  rec(rec, 1, 0);
  return out;
}

inline std::size_t block_count(const Labels& a) {
  return std::set<std::size_t>(a.begin(), a.end()).size();
}

// Spherical objective of a partition with optimal centroids:
// sum over blocks of |C| - || sum of unit rows ||.
inline double spherical_cost(const Rows& x, const Labels& a) {
  std::map<std::size_t, std::vector<double>> sums;
  std::map<std::size_t, double> sizes;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double norm = 0.0;
    for (double v : x[i]) norm += v * v;
    norm = std::sqrt(norm);
    auto& s = sums[a[i]];
    s.resize(x[i].size(), 0.0);
    for (std::size_t j = 0; j < x[i].size(); ++j) s[j] += x[i][j] / norm;
    sizes[a[i]] += 1.0;
  }
  double cost = 0.0;
  for (const auto& [c, s] : sums) {
    double n2 = 0.0;
    for (double v : s) n2 += v * v;
    cost += sizes[c] - std::sqrt(n2);
  }
  return cost;
}

// Minimum spherical objective over all partitions into exactly k blocks.
inline double brute_force_spherical(const Rows& x, std::size_t k) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : partitions(x.size())) {
    if (block_count(p) == k) best = std::min(best, spherical_cost(x, p));
  }
  return best;
}

// Adjusted Rand index from the four pair counts; 1 when both partitions are
// the same trivial partition (zero denominator).
inline double pair_count_ari(const Labels& p, const Labels& q) {
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const bool sp = p[i] == p[j];
      const bool sq = q[i] == q[j];
      if (sp && sq) a += 1;
      else if (sp) b += 1;
      else if (sq) c += 1;
      else d += 1;
    }
  }
  const double den = (a + b) * (b + d) + (a + c) * (c + d);
  if (den == 0.0) return 1.0;
  return 2.0 * (a * d - b * c) / den;
}

// Mean silhouette straight from the definition.
inline double silhouette(const Rows& d, const Labels& a) {
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::size_t, double> sum, count;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[a[j]] += d[i][j];
      count[a[j]] += 1.0;
    }
    if (count[a[i]] == 0.0) continue;  // singleton
    const double ai = sum[a[i]] / count[a[i]];
    double bi = std::numeric_limits<double>::infinity();
    for (const auto& [c, s] : sum) {
      if (c != a[i]) bi = std::min(bi, s / count[c]);
    }
    const double m = std::max(ai, bi);
    total += m > 0.0 ? (bi - ai) / m : 0.0;
  }
  return total / static_cast<double>(n);
}

inline double purity(const Labels& cluster, const Labels& gold) {
  std::map<std::size_t, std::map<std::size_t, std::size_t>> t;
  for (std::size_t i = 0; i < cluster.size(); ++i) ++t[cluster[i]][gold[i]];
  std::size_t hit = 0;
  for (const auto& [c, m] : t) {
    std::size_t best = 0;
    for (const auto& [g, n] : m) best = std::max(best, n);
    hit += best;
  }
  return static_cast<double>(hit) / static_cast<double>(cluster.size());
}

// Lee-Seung multiplicative updates with plain loops. Initialization draws W
// (row-major) then H from one mt19937_64 stream mapped to (0, 1).
struct NmfResult {
  Rows w, h;
  std::vector<double> errors;
};

inline double frobenius(const Rows& v, const Rows& w, const Rows& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v[i].size(); ++j) {
      double wh = 0.0;
      for (std::size_t r = 0; r < h.size(); ++r) wh += w[i][r] * h[r][j];
      s += (v[i][j] - wh) * (v[i][j] - wh);
    }
  }
  return std::sqrt(s);
}

inline NmfResult nmf(const Rows& v, std::size_t rank, std::uint64_t seed, std::size_t iterations) {
  const std::size_t n = v.size(), m = v[0].size();
  std::mt19937_64 rng(seed);
  auto draw = [&] { return (static_cast<double>(rng() >> 11) + 0.5) / 9007199254740992.0; };
  NmfResult r{Rows(n, std::vector<double>(rank)), Rows(rank, std::vector<double>(m)), {}};
  for (auto& row : r.w) for (auto& x : row) x = draw();
  for (auto& row : r.h) for (auto& x : row) x = draw();
  r.errors.push_back(frobenius(v, r.w, r.h));
  for (std::size_t it = 0; it < iterations; ++it) {
    // H <- H * (W^T V) / (W^T W H)
    Rows h2 = r.h;
    for (std::size_t a = 0; a < rank; ++a) {
      for (std::size_t j = 0; j < m; ++j) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          num += r.w[i][a] * v[i][j];
          double wh = 0.0;
          for (std::size_t b = 0; b < rank; ++b) wh += r.w[i][b] * r.h[b][j];
          den += r.w[i][a] * wh;
        }
        if (den > 0.0) h2[a][j] = r.h[a][j] * num / den;
      }
    }
    r.h = h2;
    // W <- W * (V H^T) / (W H H^T)
    Rows w2 = r.w;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < rank; ++a) {
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          num += v[i][j] * r.h[a][j];
          double wh = 0.0;
          for (std::size_t b = 0; b < rank; ++b) wh += r.w[i][b] * r.h[b][j];
          den += wh * r.h[a][j];
        }
        if (den > 0.0) w2[i][a] = r.w[i][a] * num / den;
      }
    }
    r.w = w2;
    r.errors.push_back(frobenius(v, r.w, r.h));
  }
  return r;
}

// Best exemplar set by exhaustive search: maximizes the sum over points of the
// similarity to their exemplar (preference for exemplars themselves). Points
// join their most similar exemplar, ties to the lowest index. Returns the
// partition (labels = exemplar index) and the score.
struct ExemplarChoice {
  Labels exemplar_of;
  double score = -std::numeric_limits<double>::infinity();
};

inline ExemplarChoice best_exemplars(const Rows& s, double preference) {
  const std::size_t n = s.size();
  ExemplarChoice best;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    Labels e(n);
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        e[i] = i;
        score += preference;
        continue;
      }
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) {
        if ((mask >> k & 1) && s[i][k] > top) {
          top = s[i][k];
          e[i] = k;
        }
      }
      score += top;
    }
    if (score > best.score) best = {e, score};
  }
  return best;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Negative-sampling loss -log s(u.v) - sum log s(-n.v) for center v, context u.
inline double sgns_loss(const std::vector<double>& v, const std::vector<double>& u, const Rows& negs) {
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  };
  double loss = -std::log(sigmoid(dot(u, v)));
  for (const auto& n : negs) loss -= std::log(sigmoid(-dot(n, v)));
  return loss;
}

// Same partition up to relabeling.
inline bool same_partition(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) return false;
  std::map<std::size_t, std::size_t> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto x = ab.emplace(a[i], b[i]).first;
    const auto y = ba.emplace(b[i], a[i]).first;
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

}  // namespace oracle
