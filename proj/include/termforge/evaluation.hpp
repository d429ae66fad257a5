#pragma once

// Internal (silhouette width, Dunn2) and external (purity, adjusted Rand)
// cluster validity indices.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "termforge/clustering.hpp"
#include "termforge/matrix.hpp"

namespace termforge {

struct GoldStandard {
  std::map<std::string, std::string> mapping;  // normalized term -> core-concept label
  std::vector<std::string> labels;             // distinct labels, sorted
};

// TSV `term<TAB>label`. Terms are normalized like noun phrases. Blank lines and
// `#` comments are skipped. Throws Error on conflicting duplicates (naming the
// term) and on an empty file.
GoldStandard load_gold_standard(std::istream& in);
GoldStandard load_gold_standard(const std::filesystem::path& path);

// Per-point silhouette (b - a) / max(a, b); singleton clusters score 0.
// `dissimilarity` is the symmetric pairwise matrix in clustering row order.
std::vector<double> silhouette_values(const Matrix& dissimilarity, const Clustering& clustering);
// Mean silhouette. Throws Error when there are fewer than two clusters.
double silhouette_width(const Matrix& dissimilarity, const Clustering& clustering);

/// Minimum average between-cluster dissimilarity over cluster pairs divided by
/// the maximum average within-cluster dissimilarity over non-singleton
/// clusters; +infinity when that denominator is zero. Throws Error when there
/// are fewer than two clusters.
double dunn2(const Matrix& dissimilarity, const Clustering& clustering);

// Majority-label accuracy over the clustered terms that the gold standard
// labels. Throws Error (with sample keys) when no clustered term is labelled.
double purity(const Clustering& clustering, const GoldStandard& gold);

// Hubert-Arabie adjusted Rand index between the clustering and the gold
// classes, over the same intersection as purity.
double adjusted_rand(const Clustering& clustering, const GoldStandard& gold);

// Adjusted Rand index of two labelings of the same items. The degenerate case
// (expected index equal to its maximum) only arises for two identical trivial
// partitions and scores 1.
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

// Fraction of clustered terms present in the gold standard.
double coverage(const Clustering& clustering, const GoldStandard& gold);

struct IndexReport {
  std::optional<double> purity;
  std::optional<double> adjusted_rand;
  std::optional<double> dunn2;       // may hold +infinity
  std::optional<double> silhouette;
  std::size_t n_clusters = 0;
  std::optional<double> coverage;
};

// All four indices. Internal indices are missing for fewer than two clusters,
// external ones when `gold` is null.
IndexReport evaluate(const Matrix& dissimilarity, const Clustering& clustering,
                     const GoldStandard* gold);

// "inf" for infinity, "NA" for a missing value, else format_real.
std::string format_index(const std::optional<double>& v);

inline constexpr const char* kIndexCsvHeader =
    "representation,algorithm,n_clusters,ratio,purity,ari,dunn2,silhouette,coverage";

// One CSV row matching kIndexCsvHeader; ratio = n_clusters / gold label count.
std::string index_csv_row(const std::string& representation, const std::string& algorithm,
                          const IndexReport& report, std::optional<std::size_t> gold_labels);

}  // namespace termforge
