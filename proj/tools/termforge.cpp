// termforge command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "termforge/clustering.hpp"
#include "termforge/corpus.hpp"
#include "termforge/couples.hpp"
#include "termforge/diagnostics.hpp"
#include "termforge/error.hpp"
#include "termforge/evaluation.hpp"
#include "termforge/experiment.hpp"
#include "termforge/feature_space.hpp"
#include "termforge/kernels.hpp"
#include "termforge/nmf.hpp"
#include "termforge/skipgram.hpp"
#include "termforge/text_io.hpp"

namespace fs = std::filesystem;
using namespace termforge;

namespace {

// Guesses the provenance of a representation file: rep_<NAME>.txt carries it
// in the name, a Tf-Idf .mtx is NP_VPC_tfidf, anything else NP_VPC.
Provenance guess_provenance(const fs::path& path) {
  const std::string stem = path.stem().string();
  if (stem.rfind("rep_", 0) == 0) {
    try {
      return parse_provenance(stem.substr(4));
    } catch (const Error&) {
    }
  }
  if (path.extension() == ".mtx") {
    return read_matrix_market(path).kind() == MatrixKind::TfIdf ? Provenance::NpVpcTfidf
                                                                 : Provenance::NpVpc;
  }
  return Provenance::NpVpc;
}

Representation load_rep(const fs::path& path, const std::string& provenance) {
  return read_representation(path, provenance.empty() ? guess_provenance(path) : parse_provenance(provenance));
}

ExtractionConfig extraction_config(const std::string& scheme, bool root_only) {
  ExtractionConfig c;
  if (scheme == "spacy") {
    c = ExtractionConfig::spacy();
  } else if (scheme == "ud") {
    c = ExtractionConfig::universal_dependencies();
  } else {
    throw Error("unknown label scheme '" + scheme + "' (expected spacy or ud)");
  }
  c.root_only = root_only;
  return c;
}

void add_sweep_options(CLI::App* app, SweepConfig& cfg, std::string& select) {
  app->add_option("--k-min", cfg.k_min, "Smallest k")->capture_default_str();
  app->add_option("--k-max", cfg.k_max, "Largest k")->capture_default_str();
  app->add_option("--reps", cfg.repetitions, "Repetitions per k")->capture_default_str();
  app->add_option("--seed", cfg.master_seed, "Master seed")->capture_default_str();
  app->add_option("--select", select, "k selection: first-peak | global")->capture_default_str();
  app->add_option("--peak-floor", cfg.peak_floor, "First-peak floor as a fraction of the maximum")
      ->capture_default_str();
}

std::string corpus_name(const fs::path& path) {
  fs::path p = path.lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  return p.extension() == ".conllu" ? p.stem().string() : p.filename().string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster domain terms by their syntactic co-occurrence context"};
  app.set_version_flag("--version", std::string("termforge ") + kVersion);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides TERMFORGE_THREADS)");

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics, one CSV row per corpus");
  std::vector<std::string> stats_dirs;
  stats->add_option("corpora", stats_dirs, "CoNLL-U directories or files")->required();

  // extract
  auto* extract = app.add_subcommand("extract", "Extract (VPC, role, NP) couples");
  std::string extract_dir, extract_out, scheme = "spacy";
  bool header = false, root_only = false;
  extract->add_option("corpus", extract_dir, "CoNLL-U directory or file")->required();
  extract->add_option("-o,--out", extract_out, "Output TSV (stdout if omitted)");
  extract->add_flag("--header", header, "Write a header line");
  extract->add_flag("--root-only", root_only, "Only the sentence root verb");
  extract->add_option("--scheme", scheme, "Dependency label scheme: spacy | ud")->capture_default_str();

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Build subject/object/merged matrices and thresholds");
  std::string couples_path, feat_out;
  Thresholds thresholds;
  featurize->add_option("couples", couples_path, "Couples TSV")->required();
  featurize->add_option("--sigma1", thresholds.sigma1, "Frequency-sum cutoff")->capture_default_str();
  featurize->add_option("--sigma2", thresholds.sigma2, "Tf-Idf-sum cutoff")->capture_default_str();
  featurize->add_option("-o,--out", feat_out, "Output directory")->required();

  // encode
  auto* encode = app.add_subcommand("encode", "Dense encodings");
  encode->require_subcommand(1);
  auto* enc_nmf = encode->add_subcommand("nmf", "Factorize a count matrix");
  std::string nmf_in, enc_out;
  NmfConfig nmf_cfg;
  enc_nmf->add_option("matrix", nmf_in, "MatrixMarket file")->required();
  enc_nmf->add_option("--rank", nmf_cfg.rank)->capture_default_str();
  enc_nmf->add_option("--max-iter", nmf_cfg.max_iter)->capture_default_str();
  enc_nmf->add_option("--tol", nmf_cfg.tol)->capture_default_str();
  enc_nmf->add_option("--seed", nmf_cfg.seed)->capture_default_str();
  enc_nmf->add_option("-o,--out", enc_out, "Output directory")->required();

  auto* enc_w2v = encode->add_subcommand("w2v", "Train skip-gram embeddings and compose NP vectors");
  std::string w2v_corpus, w2v_terms;
  SkipgramConfig sg;
  enc_w2v->add_option("corpus", w2v_corpus, "CoNLL-U directory or file")->required();
  enc_w2v->add_option("--terms", w2v_terms, "MatrixMarket file whose rows are the NPs to encode");
  enc_w2v->add_option("--dim", sg.dim)->capture_default_str();
  enc_w2v->add_option("--window", sg.window)->capture_default_str();
  enc_w2v->add_option("--negatives", sg.negatives)->capture_default_str();
  enc_w2v->add_option("--epochs", sg.epochs)->capture_default_str();
  enc_w2v->add_option("--min-count", sg.min_count)->capture_default_str();
  enc_w2v->add_option("--learning-rate", sg.learning_rate)->capture_default_str();
  enc_w2v->add_option("--seed", sg.seed)->capture_default_str();
  enc_w2v->add_option("--workers", sg.workers, "Hogwild workers; >1 is not reproducible")
      ->capture_default_str();
  enc_w2v->add_option("-o,--out", enc_out, "Output directory")->required();

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Cluster a representation");
  cluster->require_subcommand(1);
  std::string rep_path, provenance, cluster_out;
  auto* cl_km = cluster->add_subcommand("kmeans", "Spherical K-Means");
  KmeansConfig km_cfg;
  cl_km->add_option("rep", rep_path, "Representation file (.txt or .mtx)")->required();
  cl_km->add_option("-k", km_cfg.k)->required();
  cl_km->add_option("--seed", km_cfg.seed)->capture_default_str();
  cl_km->add_option("--max-iter", km_cfg.max_iter)->capture_default_str();
  cl_km->add_option("--rel-tol", km_cfg.rel_tol)->capture_default_str();
  auto* cl_ap = cluster->add_subcommand("ap", "Affinity propagation");
  ApConfig ap_cfg;
  double preference = 0.0;
  cl_ap->add_option("rep", rep_path, "Representation file (.txt or .mtx)")->required();
  auto* pref_opt = cl_ap->add_option("--preference", preference, "Diagonal similarity (default: median)");
  cl_ap->add_option("--damping", ap_cfg.damping)->capture_default_str();
  cl_ap->add_option("--max-iter", ap_cfg.max_iter)->capture_default_str();
  cl_ap->add_option("--window", ap_cfg.convergence_window, "Iterations of a stable exemplar set")
      ->capture_default_str();
  for (auto* sub : {cl_km, cl_ap}) {
    sub->add_option("--provenance", provenance, "Representation id (guessed from the file if omitted)");
    sub->add_option("-o,--out", cluster_out, "Output prefix; writes <prefix>.csv and <prefix>.json")
        ->required();
  }

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Validity indices of a clustering");
  std::string clustering_path, gold_path, algorithm;
  evaluate_cmd->add_option("clustering", clustering_path, "Clustering CSV")->required();
  evaluate_cmd->add_option("rep", rep_path, "Representation file")->required();
  evaluate_cmd->add_option("gold", gold_path, "Gold standard TSV")->required();
  evaluate_cmd->add_option("--provenance", provenance, "Representation id");
  evaluate_cmd->add_option("--algorithm", algorithm, "Algorithm column (read from the JSON sidecar if omitted)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "K-Means sweep over k with repetitions");
  SweepConfig sweep_cfg;
  std::string select = "first-peak", sweep_out;
  sweep->add_option("rep", rep_path, "Representation file")->required();
  sweep->add_option("--gold", gold_path, "Gold standard TSV");
  sweep->add_option("--provenance", provenance, "Representation id");
  sweep->add_option("-o,--out", sweep_out, "Output directory")->required();
  add_sweep_options(sweep, sweep_cfg, select);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Full workflow and comparison report");
  SweepConfig pipe_cfg;
  std::string corpus_dir, pipe_out;
  pipeline->add_option("--corpus", corpus_dir, "CoNLL-U directory or file")->required();
  pipeline->add_option("--gold", gold_path, "Gold standard TSV")->required();
  pipeline->add_option("--out", pipe_out, "Output directory")->required();
  pipeline->add_option("--sigma1", pipe_cfg.thresholds.sigma1, "Frequency-sum cutoff")->capture_default_str();
  pipeline->add_option("--sigma2", pipe_cfg.thresholds.sigma2, "Tf-Idf-sum cutoff")->capture_default_str();
  add_sweep_options(pipeline, pipe_cfg, select);
  pipeline->add_flag("--root-only", root_only, "Only the sentence root verb");
  pipeline->add_option("--scheme", scheme, "Dependency label scheme: spacy | ud")->capture_default_str();
  pipeline->add_option("--rank", pipe_cfg.nmf.rank, "NMF rank")->capture_default_str();
  pipeline->add_option("--dim", pipe_cfg.skipgram.dim, "Embedding dimension")->capture_default_str();
  pipeline->add_option("--epochs", pipe_cfg.skipgram.epochs, "Skip-gram epochs")->capture_default_str();
  pipeline->add_option("--min-count", pipe_cfg.skipgram.min_count, "Skip-gram minimum count")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) kernels::set_thread_limit(threads);
  set_warning_echo(true);

  try {
    if (stats->parsed()) {
      std::cout << "corpus,n_documents,n_sentences,n_words,words_per_document\n";
      for (const auto& dir : stats_dirs) {
        const auto s = corpus_stats(load_corpus(dir));
        std::ostringstream wpd;
        wpd << std::fixed << std::setprecision(2) << s.words_per_document;
        std::cout << csv_field(corpus_name(dir))
                  << ',' << s.n_documents << ',' << s.n_sentences << ',' << s.n_words << ',' << wpd.str()
                  << '\n';
      }
    } else if (extract->parsed()) {
      const auto couples = extract_corpus(load_corpus(extract_dir), extraction_config(scheme, root_only));
      if (extract_out.empty()) {
        write_couples(couples, std::cout, header);
      } else {
        std::ofstream out(extract_out);
        if (!out) throw Error("cannot write " + extract_out);
        write_couples(couples, out, header);
      }
      std::cerr << couples.size() << " couples\n";
    } else if (featurize->parsed()) {
      const auto couples = read_couples(fs::path(couples_path));
      fs::create_directories(feat_out);
      const auto subject = build_role_matrix(couples, Role::Subject);
      const auto object = build_role_matrix(couples, Role::Object);
      const auto merged = merge_matrices(subject, object);
      const auto np_vpc = apply_frequency_threshold(merged, thresholds);
      const auto tfidf = apply_value_threshold(tfidf_weight(merged), thresholds);
      const fs::path dir(feat_out);
      write_matrix_market(subject, dir / "subject.mtx");
      write_matrix_market(object, dir / "object.mtx");
      write_matrix_market(merged, dir / "merged.mtx");
      write_matrix_market(np_vpc, dir / "np_vpc.mtx");
      write_matrix_market(tfidf, dir / "np_vpc_tfidf.mtx");
      std::cerr << "merged " << merged.rows() << "x" << merged.cols() << ", NP_VPC " << np_vpc.rows() << "x"
                << np_vpc.cols() << ", NP_VPC_tfidf " << tfidf.rows() << "x" << tfidf.cols() << '\n';
    } else if (enc_nmf->parsed()) {
      const auto v = read_matrix_market(nmf_in);
      const auto f = nmf(v, nmf_cfg);
      const fs::path dir(enc_out);
      fs::create_directories(dir);
      write_dense(f.w, dir / "nmf_W.txt");
      write_dense(f.h, dir / "nmf_H.txt");
      write_representation(make_representation(v.row_labels(), f.w, Provenance::NpVpcNmf),
                           dir / "rep_NP_VPC_NMF.txt");
      std::cerr << "nmf: " << f.iterations_run << " iterations, error " << format_real(f.final_error) << '\n';
    } else if (enc_w2v->parsed()) {
      const auto corpus = load_corpus(w2v_corpus);
      const auto table = train_skipgram(corpus, sg);
      const fs::path dir(enc_out);
      fs::create_directories(dir);
      write_embeddings(table, dir / "embeddings.txt");
      if (!w2v_terms.empty()) {
        std::vector<NounPhrase> nps;
        const auto terms = read_matrix_market(w2v_terms);
        for (const auto& l : terms.row_labels()) nps.emplace_back(l);
        write_representation(np_vectors(table, nps), dir / "rep_NP_w2v.txt");
      }
      std::cerr << "w2v: vocabulary " << table.words.size() << '\n';
    } else if (cl_km->parsed() || cl_ap->parsed()) {
      const auto rep = load_rep(rep_path, provenance);
      Clustering c;
      nlohmann::json config;
      if (cl_km->parsed()) {
        c = kmeans(rep, km_cfg);
        config = {{"k", km_cfg.k}, {"seed", km_cfg.seed}, {"max_iter", km_cfg.max_iter}, {"rel_tol", km_cfg.rel_tol}};
      } else {
        if (pref_opt->count() > 0) ap_cfg.preference = preference;
        c = affinity_propagation(rep, ap_cfg);
        config = {{"damping", ap_cfg.damping},
                  {"max_iter", ap_cfg.max_iter},
                  {"convergence_window", ap_cfg.convergence_window}};
        config["preference"] = ap_cfg.preference ? nlohmann::json(*ap_cfg.preference) : nlohmann::json("median");
      }
      config["representation"] = provenance_name(rep.provenance);
      write_clustering_csv(c, cluster_out + ".csv");
      write_clustering_metadata(c, config, cluster_out + ".json");
      std::cerr << c.algorithm << ": " << c.n_clusters << " clusters" << (c.converged ? "" : " (not converged)")
                << '\n';
    } else if (evaluate_cmd->parsed()) {
      const auto rep = load_rep(rep_path, provenance);
      std::optional<GoldStandard> gold;
      try {
        gold = load_gold_standard(fs::path(gold_path));
      } catch (const Error& e) {
        std::cerr << "error: " << StageError("evaluate", e.what()).what() << '\n';
      }
      Clustering c = align_clustering(read_clustering_csv(clustering_path), rep.labels);
      if (algorithm.empty()) {
        fs::path sidecar(clustering_path);
        sidecar.replace_extension(".json");
        std::ifstream in(sidecar);
        algorithm = in ? nlohmann::json::parse(in).value("algorithm", "NA") : "NA";
      }
      const Matrix d = kernels::omp::pairwise_cosine_dissimilarity(rep.matrix);
      const auto report = evaluate(d, c, gold ? &*gold : nullptr);
      const auto n_labels = gold ? std::optional<std::size_t>(gold->labels.size()) : std::nullopt;
      std::cout << kIndexCsvHeader << '\n'
                << index_csv_row(provenance_name(rep.provenance), algorithm, report, n_labels) << '\n';
      if (!gold) return 2;
    } else if (sweep->parsed()) {
      sweep_cfg.selection = parse_selection(select);
      const auto rep = load_rep(rep_path, provenance);
      std::optional<GoldStandard> gold;
      if (!gold_path.empty()) gold = load_gold_standard(fs::path(gold_path));
      const auto result = run_sweep(rep, gold ? &*gold : nullptr, sweep_cfg);
      const fs::path dir(sweep_out);
      fs::create_directories(dir);
      write_curves_csv(result, dir / ("curves_" + result.representation + ".csv"));
      write_repetitions_csv(result, dir / ("repetitions_" + result.representation + ".csv"));
      std::cout << "selected k = " << select_k(result, sweep_cfg.selection, sweep_cfg.peak_floor) << '\n';
    } else if (pipeline->parsed()) {
      pipe_cfg.selection = parse_selection(select);
      pipe_cfg.extraction = extraction_config(scheme, root_only);
      std::optional<GoldStandard> gold;
      std::vector<std::string> errors;
      try {
        gold = load_gold_standard(fs::path(gold_path));
      } catch (const Error& e) {
        errors.push_back(StageError("evaluate", e.what()).what());
        std::cerr << "error: " << errors.back() << '\n';
      }
      const auto corpus = load_corpus(corpus_dir);
      const auto report = run_pipeline(corpus, gold ? &*gold : nullptr, pipe_cfg, pipe_out, errors);
      std::cerr << report.rows.size() << " report rows written to " << (fs::path(pipe_out) / "report.csv").string()
                << '\n';
      if (!errors.empty()) return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
