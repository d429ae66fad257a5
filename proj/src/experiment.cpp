#include "termforge/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "termforge/diagnostics.hpp"
#include "termforge/error.hpp"
#include "termforge/kernels.hpp"
#include "termforge/text_io.hpp"

namespace termforge {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;

  // Returns false when the value was excluded.
  bool add(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return false;
    sum += *v;
    ++n;
    return true;
  }
  std::optional<double> value() const {
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

nlohmann::json config_json(const SweepConfig& c) {
  nlohmann::json j;
  j["k_min"] = c.k_min;
  j["k_max"] = c.k_max;
  j["repetitions"] = c.repetitions;
  j["master_seed"] = c.master_seed;
  j["selection"] = selection_name(c.selection);
  j["peak_floor"] = c.peak_floor;
  j["sigma1"] = c.thresholds.sigma1;
  j["sigma2"] = c.thresholds.sigma2;
  auto& reps = j["representations"] = nlohmann::json::array();
  for (auto p : c.representations) reps.push_back(provenance_name(p));
  j["kmeans"] = {{"max_iter", c.kmeans_max_iter}, {"rel_tol", c.kmeans_rel_tol}};
  j["nmf"] = {{"rank", c.nmf.rank}, {"max_iter", c.nmf.max_iter}, {"tol", c.nmf.tol}, {"seed", c.nmf.seed}};
  j["skipgram"] = {{"dim", c.skipgram.dim},
                   {"window", c.skipgram.window},
                   {"negatives", c.skipgram.negatives},
                   {"epochs", c.skipgram.epochs},
                   {"min_count", c.skipgram.min_count},
                   {"learning_rate", c.skipgram.learning_rate},
                   {"min_learning_rate", c.skipgram.min_learning_rate},
                   {"seed", c.skipgram.seed},
                   {"workers", c.skipgram.workers}};
  nlohmann::json ap{{"damping", c.ap.damping},
                    {"max_iter", c.ap.max_iter},
                    {"convergence_window", c.ap.convergence_window}};
  ap["preference"] = c.ap.preference ? nlohmann::json(*c.ap.preference) : nlohmann::json("median");
  j["ap"] = ap;
  j["root_only"] = c.extraction.root_only;
  return j;
}

}  // namespace

const char* selection_name(Selection s) {
  return s == Selection::FirstPeak ? "first-peak" : "global";
}

Selection parse_selection(std::string_view name) {
  if (name == "first-peak") return Selection::FirstPeak;
  if (name == "global") return Selection::Global;
  throw Error("unknown selection strategy '" + std::string(name) + "' (expected first-peak or global)");
}

void SweepConfig::validate() const {
  if (k_min < 2) throw Error("sweep: k_min must be at least 2");
  if (k_max < k_min) throw Error("sweep: k_max must not be below k_min");
  if (repetitions == 0) throw Error("sweep: repetitions must be positive");
  if (!(peak_floor > 0.0 && peak_floor <= 1.0)) throw Error("sweep: peak floor must lie in (0, 1]");
  if (representations.empty()) throw Error("sweep: no representation requested");
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view representation, std::size_t k,
                          std::size_t repetition) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ fnv1a(representation));
  h = splitmix64(h ^ static_cast<std::uint64_t>(k));
  return splitmix64(h ^ static_cast<std::uint64_t>(repetition));
}

SweepResult run_sweep(const Representation& rep, const Matrix& dissimilarity, const GoldStandard* gold,
                      const SweepConfig& config) {
  config.validate();
  const std::string rep_id = provenance_name(rep.provenance);
  const std::size_t distinct = distinct_directions(rep.matrix);
  if (distinct < config.k_min) {
    throw Error(rep_id + ": only " + std::to_string(distinct) + " distinct row directions, below k_min = " +
                std::to_string(config.k_min));
  }
  const std::size_t k_max = std::min(config.k_max, distinct);
  if (k_max < config.k_max) {
    warn(rep_id + ": k range clipped to " + std::to_string(k_max) + " (distinct row directions)");
  }
  if (gold != nullptr) {
    const bool any = std::any_of(rep.labels.begin(), rep.labels.end(),
                                 [&](const std::string& l) { return gold->mapping.contains(l); });
    if (!any) throw Error(rep_id + ": no term of the representation appears in the gold standard");
  }

  const std::size_t n_k = k_max - config.k_min + 1;
  const std::size_t reps = config.repetitions;
  SweepResult result;
  result.representation = rep_id;
  result.records.resize(n_k * reps);

  std::vector<std::exception_ptr> failures(n_k * reps);
  const auto cells = static_cast<std::int64_t>(n_k * reps);
#pragma omp parallel for schedule(dynamic) num_threads(kernels::thread_count())
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    const auto idx = static_cast<std::size_t>(cell);
    auto& rec = result.records[idx];
    rec.k = config.k_min + idx / reps;
    rec.repetition = idx % reps;
    rec.seed = derive_seed(config.master_seed, rep_id, rec.k, rec.repetition);
    try {
      const KmeansConfig km{rec.k, rec.seed, config.kmeans_max_iter, config.kmeans_rel_tol};
      const Clustering c = kmeans(rep, km);
      rec.objective = c.objective.value_or(0.0);
      rec.indices = evaluate(dissimilarity, c, gold);
    } catch (...) {
      failures[idx] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  for (std::size_t ki = 0; ki < n_k; ++ki) {
    SweepRow row;
    row.k = config.k_min + ki;
    row.repetitions = reps;
    Mean purity, ari, dunn, sil;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& ix = result.records[ki * reps + r].indices;
      // External indices are legitimately absent without a gold standard.
      if (gold != nullptr) {
        row.excluded += purity.add(ix.purity) ? 0 : 1;
        row.excluded += ari.add(ix.adjusted_rand) ? 0 : 1;
      }
      row.excluded += dunn.add(ix.dunn2) ? 0 : 1;
      row.excluded += sil.add(ix.silhouette) ? 0 : 1;
    }
    row.purity = purity.value();
    row.adjusted_rand = ari.value();
    row.dunn2 = dunn.value();
    row.silhouette = sil.value();
    if (row.excluded > 0) {
      warn(rep_id + ": k = " + std::to_string(row.k) + ": " + std::to_string(row.excluded) +
           " undefined index values left out of the means");
    }
    result.rows.push_back(row);
  }
  return result;
}

SweepResult run_sweep(const Representation& rep, const GoldStandard* gold, const SweepConfig& config) {
  const Matrix d = kernels::omp::pairwise_cosine_dissimilarity(rep.matrix);
  return run_sweep(rep, d, gold, config);
}

std::vector<double> combined_curve(const SweepResult& result) {
  const std::size_t m = result.rows.size();
  if (m == 0) throw Error("combined curve: empty sweep");
  std::vector<double> combined(m, 0.0);
  bool any = false;
  using Field = std::optional<double> SweepRow::*;
  for (Field f : {&SweepRow::purity, &SweepRow::adjusted_rand, &SweepRow::dunn2, &SweepRow::silhouette}) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : result.rows) {
      if (const auto& v = row.*f) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    }
    if (lo > hi) continue;
    any = true;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& v = result.rows[i].*f;
      if (!v) continue;
      combined[i] += hi > lo ? (*v - lo) / (hi - lo) : 0.5;
    }
  }
  if (!any) throw Error(result.representation + ": every index curve is undefined");
  return combined;
}

std::size_t select_index(const std::vector<double>& c, Selection strategy, double peak_floor) {
  if (c.empty()) throw Error("select: empty curve");
  const auto global = static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin());
  if (strategy == Selection::Global) return global;
  const double floor = peak_floor * c[global];
  std::size_t s = 1;
  while (s + 1 < c.size()) {
    std::size_t e = s;
    while (e + 1 < c.size() && c[e + 1] == c[s]) ++e;
    if (e + 1 < c.size() && c[s - 1] < c[s] && c[e + 1] < c[s] && c[s] >= floor) return s;
    s = e + 1;
  }
  return global;
}

std::size_t select_k(const SweepResult& result, Selection strategy, double peak_floor) {
  return result.rows.at(select_index(combined_curve(result), strategy, peak_floor)).k;
}

void write_report_csv(const Report& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kIndexCsvHeader << '\n';
  for (const auto& row : report.rows) {
    out << index_csv_row(provenance_name(row.representation), row.algorithm, row.indices,
                         report.gold_labels)
        << '\n';
  }
}

void write_curves_csv(const SweepResult& result, const std::filesystem::path& path) {
  auto out = open_out(path);
  std::vector<double> combined;
  try {
    combined = combined_curve(result);
  } catch (const Error&) {
    combined.clear();
  }
  out << "k,purity,ari,dunn2,silhouette,repetitions,excluded,combined\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    out << r.k << ',' << format_index(r.purity) << ',' << format_index(r.adjusted_rand) << ','
        << format_index(r.dunn2) << ',' << format_index(r.silhouette) << ',' << r.repetitions << ','
        << r.excluded << ',' << (combined.empty() ? std::string("NA") : format_real(combined[i])) << '\n';
  }
}

void write_repetitions_csv(const SweepResult& result, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "k,repetition,seed,objective,n_clusters,purity,ari,dunn2,silhouette,coverage\n";
  for (const auto& r : result.records) {
    const auto& ix = r.indices;
    out << r.k << ',' << r.repetition << ',' << r.seed << ',' << format_real(r.objective) << ','
        << ix.n_clusters << ',' << format_index(ix.purity) << ',' << format_index(ix.adjusted_rand) << ','
        << format_index(ix.dunn2) << ',' << format_index(ix.silhouette) << ','
        << format_index(ix.coverage) << '\n';
  }
}

Report run_pipeline(const Corpus& corpus, const GoldStandard* gold, const SweepConfig& config,
                    const std::filesystem::path& out_dir, const std::vector<std::string>& upstream_errors) {
  config.validate();
  config.skipgram.validate();
  std::filesystem::create_directories(out_dir);
  const std::size_t mark = warning_mark();

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = config_json(config);
  const auto stats = corpus_stats(corpus);
  manifest["corpus"] = {{"documents", stats.n_documents},
                        {"sentences", stats.n_sentences},
                        {"words", stats.n_words}};
  nlohmann::json artifacts = nlohmann::json::array();
  auto record = [&](const std::string& name) { artifacts.push_back(name); };

  const CoupleSet couples = stage("extract", [&] {
    CoupleSet cs = extract_corpus(corpus, config.extraction);
    if (cs.empty()) throw Error("no couples extracted from the corpus");
    auto out = open_out(out_dir / "couples.tsv");
    write_couples(cs, out, true);
    record("couples.tsv");
    return cs;
  });
  manifest["couples"] = couples.size();

  struct Spaces {
    CooccurrenceMatrix frequency;
    CooccurrenceMatrix tfidf;
  };
  const Spaces spaces = stage("featurize", [&] {
    const auto subject = build_role_matrix(couples, Role::Subject);
    const auto object = build_role_matrix(couples, Role::Object);
    const auto merged = merge_matrices(subject, object);
    Spaces s{apply_frequency_threshold(merged, config.thresholds),
             apply_value_threshold(tfidf_weight(merged), config.thresholds)};
    const std::pair<const char*, const CooccurrenceMatrix*> files[] = {
        {"subject.mtx", &subject},
        {"object.mtx", &object},
        {"merged.mtx", &merged},
        {"np_vpc.mtx", &s.frequency},
        {"np_vpc_tfidf.mtx", &s.tfidf}};
    for (const auto& [name, m] : files) {
      write_matrix_market(*m, out_dir / name);
      record(name);
    }
    return s;
  });
  manifest["matrices"] = {{"NP_VPC", {spaces.frequency.rows(), spaces.frequency.cols()}},
                          {"NP_VPC_tfidf", {spaces.tfidf.rows(), spaces.tfidf.cols()}}};

  std::vector<Representation> reps = stage("encode", [&] {
    std::vector<Representation> out;
    for (auto p : config.representations) {
      const std::string file = std::string("rep_") + provenance_name(p) + ".txt";
      Representation rep;
      switch (p) {
        case Provenance::NpVpc:
          rep = to_representation(spaces.frequency, p);
          break;
        case Provenance::NpVpcTfidf:
          rep = to_representation(spaces.tfidf, p);
          break;
        case Provenance::NpVpcNmf: {
          const FactorPair f = nmf(spaces.frequency, config.nmf);
          write_dense(f.w, out_dir / "nmf_W.txt");
          write_dense(f.h, out_dir / "nmf_H.txt");
          record("nmf_W.txt");
          record("nmf_H.txt");
          manifest["nmf"] = {{"rank", f.w.cols()},
                             {"iterations", f.iterations_run},
                             {"final_error", f.final_error}};
          rep = make_representation(spaces.frequency.row_labels(), f.w, p);
          break;
        }
        case Provenance::NpW2v: {
          const EmbeddingTable table = train_skipgram(corpus, config.skipgram);
          write_embeddings(table, out_dir / "embeddings.txt");
          record("embeddings.txt");
          std::vector<NounPhrase> nps;
          for (const auto& l : spaces.frequency.row_labels()) nps.emplace_back(l);
          rep = np_vectors(table, nps);
          manifest["w2v"] = {{"vocabulary", table.words.size()}, {"dropped_terms", rep.dropped.size()}};
          break;
        }
      }
      write_representation(rep, out_dir / file);
      record(file);
      out.push_back(std::move(rep));
    }
    return out;
  });
  Report report;
  if (gold != nullptr) report.gold_labels = gold->labels.size();
  std::vector<ReportRow> ap_rows;
  nlohmann::json selected = nlohmann::json::object();

  for (const auto& rep : reps) {
    const std::string id = provenance_name(rep.provenance);
    const Matrix d = kernels::omp::pairwise_cosine_dissimilarity(rep.matrix);

    const SweepResult sweep = stage("cluster", [&] { return run_sweep(rep, d, gold, config); });
    write_curves_csv(sweep, out_dir / ("curves_" + id + ".csv"));
    write_repetitions_csv(sweep, out_dir / ("repetitions_" + id + ".csv"));
    record("curves_" + id + ".csv");
    record("repetitions_" + id + ".csv");

    const std::size_t k = stage("evaluate", [&] { return select_k(sweep, config.selection, config.peak_floor); });
    const SweepRow& at_k = sweep.rows[k - sweep.rows.front().k];
    selected[id] = k;

    ReportRow km{"KM", rep.provenance, {}};
    km.indices.n_clusters = k;
    km.indices.purity = at_k.purity;
    km.indices.adjusted_rand = at_k.adjusted_rand;
    km.indices.dunn2 = at_k.dunn2;
    km.indices.silhouette = at_k.silhouette;

    stage("cluster", [&] {
      const KmeansConfig kc{k, derive_seed(config.master_seed, id, k, 0), config.kmeans_max_iter,
                            config.kmeans_rel_tol};
      const Clustering c = kmeans(rep, kc);
      if (gold != nullptr) km.indices.coverage = coverage(c, *gold);
      write_clustering_csv(c, out_dir / ("clusters_KM_" + id + ".csv"));
      write_clustering_metadata(c, {{"k", k}, {"seed", kc.seed}, {"max_iter", kc.max_iter}, {"rel_tol", kc.rel_tol}},
                                out_dir / ("clusters_KM_" + id + ".json"));
      record("clusters_KM_" + id + ".csv");
      record("clusters_KM_" + id + ".json");
      return 0;
    });
    report.rows.push_back(km);

    const Clustering ap = stage("cluster", [&] { return affinity_propagation(rep, config.ap); });
    write_clustering_csv(ap, out_dir / ("clusters_AP_" + id + ".csv"));
    write_clustering_metadata(ap, manifest["config"]["ap"], out_dir / ("clusters_AP_" + id + ".json"));
    record("clusters_AP_" + id + ".csv");
    record("clusters_AP_" + id + ".json");
    ap_rows.push_back({"AP", rep.provenance, stage("evaluate", [&] { return evaluate(d, ap, gold); })});
  }
  report.rows.insert(report.rows.end(), ap_rows.begin(), ap_rows.end());

  write_report_csv(report, out_dir / "report.csv");
  record("report.csv");
  record("manifest.json");

  manifest["selected_k"] = selected;
  manifest["gold_labels"] = gold != nullptr ? nlohmann::json(gold->labels.size()) : nlohmann::json(nullptr);
  manifest["errors"] = upstream_errors;
  manifest["artifacts"] = artifacts;
  auto warnings = warnings_since(mark);
  std::sort(warnings.begin(), warnings.end());
  manifest["warnings"] = warnings;
  auto out = open_out(out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  return report;
}

}  // namespace termforge
