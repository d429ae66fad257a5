#pragma once

// Spherical K-Means and affinity propagation under cosine dissimilarity.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "termforge/feature_space.hpp"
#include "termforge/matrix.hpp"

namespace termforge {

struct Clustering {
  std::vector<std::string> labels;        // NP keys, representation row order
  std::vector<std::size_t> assignment;    // cluster id per label, 0..n_clusters-1
  std::size_t n_clusters = 0;
  std::optional<Matrix> centroids;        // K-Means: unit-length centroid per cluster
  std::vector<std::string> exemplars;     // AP: exemplar key per cluster id
  std::optional<double> objective;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;    // K-Means: objective after each assignment
  std::string algorithm;                  // "KM" or "AP"
};

// 1 - a.b / (|a||b|), in [0, 2]. Throws Error when either vector is zero.
double cosine_dissimilarity(std::span<const double> a, std::span<const double> b);

// Number of distinct rows after L2 normalization. Throws Error on a zero row.
std::size_t distinct_directions(const Matrix& x);

struct KmeansConfig {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  double rel_tol = 1e-6;
};

/// Spherical K-Means. Rows are L2-normalized; seeding is k-means++ where each
/// further seed is drawn with probability proportional to its cosine
/// dissimilarity to the nearest chosen seed (the squared Euclidean distance on
/// the unit sphere, halved). Centroids are normalized member means. An empty
/// cluster is reseeded with the point farthest from its own centroid.
/// When the assignment repeats or the objective changes by less than rel_tol
/// relative, the best single-point move that lowers the objective is applied
/// and iteration resumes; it stops when no such move exists or at max_iter. Objective = sum of
/// dissimilarities to the assigned centroids. Cluster ids are renumbered by
/// first appearance in row order.
/// Throws Error when k < 2, k exceeds distinct_directions, or a row is zero.
Clustering kmeans(const Representation& rep, const KmeansConfig& config);

struct ApConfig {
  std::optional<double> preference;  // nullopt: median off-diagonal similarity
  double damping = 0.9;
  std::size_t max_iter = 1000;
  std::size_t convergence_window = 50;
};

/// Affinity propagation on s(i, j) = 1 - cosine_dissimilarity(i, j) with the
/// preference on the diagonal. Exemplars are the points with r(k,k) + a(k,k) > 0;
/// the run converges once that set is unchanged for convergence_window
/// iterations. Other points join the exemplar of highest similarity.
///
/// Exact ties (duplicate rows) would leave the messages symmetric forever, so
/// every column k of the similarity matrix carries a bias of
/// 1e-12 * (1 + max|s|) * (n - rank(k)) / n, rank being the position of k's key in
/// lexicographic order: ties resolve toward the smallest key. Final
/// assignments use the unbiased similarities with the same tie rule.
/// Throws Error for an empty representation or a zero row.
Clustering affinity_propagation(const Representation& rep, const ApConfig& config);

// CSV "np_key,cluster_id" with a header line.
void write_clustering_csv(const Clustering& c, const std::filesystem::path& path);
// JSON sidecar: algorithm, config echo, objective, exemplars, convergence.
void write_clustering_metadata(const Clustering& c, const nlohmann::json& config,
                               const std::filesystem::path& path);
// Reads the CSV form; ids are renumbered densely in order of first appearance.
Clustering read_clustering_csv(const std::filesystem::path& path);

// Restricts/reorders `c` to the rows of `labels` (ids renumbered). Throws if a
// label is not clustered.
Clustering align_clustering(const Clustering& c, const std::vector<std::string>& labels);

}  // namespace termforge
