#pragma once

// K-Means sweeps over k with repetitions, optimal-k selection, and the
// end-to-end pipeline producing the comparison report.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "termforge/clustering.hpp"
#include "termforge/corpus.hpp"
#include "termforge/couples.hpp"
#include "termforge/evaluation.hpp"
#include "termforge/feature_space.hpp"
#include "termforge/nmf.hpp"
#include "termforge/skipgram.hpp"

namespace termforge {

inline constexpr const char* kVersion = "0.1.0";

enum class Selection { FirstPeak, Global };

const char* selection_name(Selection s);
Selection parse_selection(std::string_view name);  // "first-peak" | "global"

struct SweepConfig {
  std::size_t k_min = 2;
  std::size_t k_max = 50;
  std::size_t repetitions = 10;
  std::uint64_t master_seed = 0;
  Selection selection = Selection::FirstPeak;
  double peak_floor = 0.9;
  Thresholds thresholds;
  std::vector<Provenance> representations{Provenance::NpVpc, Provenance::NpVpcTfidf,
                                          Provenance::NpVpcNmf, Provenance::NpW2v};
  std::size_t kmeans_max_iter = 300;
  double kmeans_rel_tol = 1e-6;
  NmfConfig nmf;
  SkipgramConfig skipgram;
  ApConfig ap;
  ExtractionConfig extraction;

  void validate() const;
};

// Stable mix of (master seed, representation id, k, repetition).
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view representation,
                          std::size_t k, std::size_t repetition);

struct RepetitionRecord {
  std::size_t k = 0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  double objective = 0.0;
  IndexReport indices;
};

// Mean indices at one k. Undefined values (NA, and infinite Dunn2) are left
// out of the means and counted in `excluded`.
struct SweepRow {
  std::size_t k = 0;
  std::optional<double> purity;
  std::optional<double> adjusted_rand;
  std::optional<double> dunn2;
  std::optional<double> silhouette;
  std::size_t repetitions = 0;
  std::size_t excluded = 0;
};

struct SweepResult {
  std::string representation;
  std::vector<SweepRow> rows;  // one per k, ascending
  std::vector<RepetitionRecord> records;  // ordered by (k, repetition)
};

/// Runs K-Means for every k in [k_min, k_max] and every repetition with seed
/// derive_seed(master_seed, representation, k, r), scoring each run against
/// `dissimilarity` (the representation's pairwise cosine dissimilarities) and
/// `gold` when given. k values above the number of distinct rows are clipped
/// with a warning. The (k, repetition) grid runs in parallel; results do not
/// depend on the thread count.
SweepResult run_sweep(const Representation& rep, const Matrix& dissimilarity, const GoldStandard* gold,
                      const SweepConfig& config);
SweepResult run_sweep(const Representation& rep, const GoldStandard* gold, const SweepConfig& config);

/// Sum over the four index curves of each curve min-max normalized to [0, 1]
/// across k (a constant curve maps to 0.5, an undefined point adds 0). Curves
/// with no defined point are skipped; throws Error when all are.
std::vector<double> combined_curve(const SweepResult& result);

/// Index into `combined` chosen by the strategy. FirstPeak returns the first
/// interior strict local maximum (a plateau counts by its first point when
/// strictly above both neighbours) whose value reaches peak_floor times the
/// global maximum, falling back to Global; Global returns the first argmax.
std::size_t select_index(const std::vector<double>& combined, Selection strategy, double peak_floor);

// k chosen for a sweep.
std::size_t select_k(const SweepResult& result, Selection strategy, double peak_floor);

struct ReportRow {
  std::string algorithm;  // "KM" | "AP"
  Provenance representation = Provenance::NpVpc;
  IndexReport indices;
};

struct Report {
  std::vector<ReportRow> rows;
  std::optional<std::size_t> gold_labels;
};

void write_report_csv(const Report& report, const std::filesystem::path& path);
void write_curves_csv(const SweepResult& result, const std::filesystem::path& path);
void write_repetitions_csv(const SweepResult& result, const std::filesystem::path& path);

/// Full workflow: couple extraction, subject/object/merged matrices, sigma1
/// and sigma2 selection, the four representations, a K-Means sweep with k
/// selection and one affinity-propagation run per representation. Writes
/// every intermediate artifact, report.csv, curves_<rep>.csv,
/// repetitions_<rep>.csv and manifest.json under `out_dir`. With a null
/// `gold` the external columns are NA. `upstream_errors` are recorded in the
/// manifest. Stage failures surface as StageError.
Report run_pipeline(const Corpus& corpus, const GoldStandard* gold, const SweepConfig& config,
                    const std::filesystem::path& out_dir,
                    const std::vector<std::string>& upstream_errors = {});

}  // namespace termforge
