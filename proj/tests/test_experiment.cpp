#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "support.hpp"
#include "termforge/diagnostics.hpp"
#include "termforge/error.hpp"
#include "termforge/experiment.hpp"
#include "termforge/text_io.hpp"

using namespace termforge;

namespace {

std::vector<std::vector<double>> blobs(std::mt19937_64& rng, std::size_t per, std::size_t groups) {
  std::normal_distribution<double> noise(0.0, 0.15);
  std::vector<std::vector<double>> rows;
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t i = 0; i < per; ++i) {
      std::vector<double> v(groups, 0.0);
      v[g] = 1.0;
      for (auto& x : v) x += noise(rng);
      rows.push_back(v);
    }
  }
  return rows;
}

GoldStandard blob_gold(const Representation& rep, std::size_t per) {
  GoldStandard g;
  for (std::size_t i = 0; i < rep.labels.size(); ++i) g.mapping[rep.labels[i]] = "L" + std::to_string(i / per);
  for (std::size_t i = 0; i * per < rep.labels.size(); ++i) g.labels.push_back("L" + std::to_string(i));
  return g;
}

SweepConfig small(std::size_t k_min, std::size_t k_max, std::size_t reps) {
  SweepConfig c;
  c.k_min = k_min;
  c.k_max = k_max;
  c.repetitions = reps;
  c.master_seed = 77;
  return c;
}

SweepResult curve(const std::vector<double>& silhouettes) {
  SweepResult r;
  r.representation = "NP_VPC";
  for (std::size_t i = 0; i < silhouettes.size(); ++i) {
    SweepRow row;
    row.k = 2 + i;
    row.silhouette = silhouettes[i];
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST_CASE("seed derivation is stable and sensitive to every input") {
  const auto s = derive_seed(1, "NP_VPC", 5, 0);
  CHECK(s == derive_seed(1, "NP_VPC", 5, 0));
  CHECK(s != derive_seed(2, "NP_VPC", 5, 0));
  CHECK(s != derive_seed(1, "NP_w2v", 5, 0));
  CHECK(s != derive_seed(1, "NP_VPC", 6, 0));
  CHECK(s != derive_seed(1, "NP_VPC", 5, 1));
}

TEST_CASE("selection rules") {
  CHECK(select_index({0.2, 0.9, 0.5, 0.8}, Selection::FirstPeak, 0.9) == 1);        // k = 3
  CHECK(select_index({0.1, 0.2, 0.3, 0.4}, Selection::FirstPeak, 0.9) == 3);        // falls back
  CHECK(select_index({0.2, 0.5, 0.3, 1.0, 0.9}, Selection::FirstPeak, 0.9) == 3);   // k = 5
  CHECK(select_index({0.2, 0.5, 0.3, 1.0, 0.9}, Selection::FirstPeak, 0.4) == 1);
  CHECK(select_index({0.1, 0.7, 0.7, 0.2, 0.7}, Selection::FirstPeak, 0.9) == 1);   // plateau start
  CHECK(select_index({0.1, 0.7, 0.7, 0.9}, Selection::FirstPeak, 0.5) == 3);        // plateau not a peak
  CHECK(select_index({0.3, 1.0, 0.2, 1.0}, Selection::Global, 0.9) == 1);           // smallest k on ties

  CHECK(select_k(curve({0.2, 0.9, 0.5, 0.8}), Selection::FirstPeak, 0.9) == 3);
  SweepResult undefined = curve({0, 0});
  for (auto& r : undefined.rows) r.silhouette.reset();
  CHECK_THROWS_AS(select_k(undefined, Selection::Global, 0.9), Error);
}

TEST_CASE("combined curve normalizes each index") {
  SweepResult r = curve({0.1, 0.3, 0.2});
  r.rows[0].dunn2 = 5.0;
  r.rows[1].dunn2 = 5.0;
  r.rows[2].dunn2 = 5.0;
  r.rows[2].purity = 0.4;
  const auto c = combined_curve(r);
  CHECK(c[0] == doctest::Approx(0.0 + 0.5));
  CHECK(c[1] == doctest::Approx(1.0 + 0.5));
  CHECK(c[2] == doctest::Approx(0.5 + 0.5 + 0.5));
}

TEST_CASE("global selection dominates first peak") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> c(2 + t % 9);
    for (auto& x : c) x = u(rng);
    const auto f = select_index(c, Selection::FirstPeak, 0.9);
    const auto g = select_index(c, Selection::Global, 0.9);
    CHECK(c[g] >= c[f]);
    CHECK(c[f] >= 0.9 * c[g]);
  }
}

TEST_CASE("sweep rows are means of the repetitions") {
  std::mt19937_64 rng(10);
  const auto rep = testing::rep_of(blobs(rng, 4, 3));
  const auto gold = blob_gold(rep, 4);
  const auto cfg = small(2, 4, 2);
  const auto a = run_sweep(rep, &gold, cfg);
  REQUIRE(a.rows.size() == 3);
  CHECK(a.records.size() == 6);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& row = a.rows[i];
    CHECK(row.k == 2 + i);
    CHECK(row.repetitions == 2);
    const auto& r0 = a.records[2 * i].indices;
    const auto& r1 = a.records[2 * i + 1].indices;
    CHECK(*row.purity == (*r0.purity + *r1.purity) / 2.0);
    CHECK(*row.adjusted_rand == (*r0.adjusted_rand + *r1.adjusted_rand) / 2.0);
    CHECK(*row.silhouette == (*r0.silhouette + *r1.silhouette) / 2.0);
  }
  // Three clean blobs: k = 3 is perfect.
  CHECK(*a.rows[1].purity == 1.0);
  CHECK(*a.rows[1].adjusted_rand == 1.0);

  const auto b = run_sweep(rep, &gold, cfg);
  const auto dir = testing::scratch("sweep");
  write_curves_csv(a, dir / "a.csv");
  write_curves_csv(b, dir / "b.csv");
  write_repetitions_csv(a, dir / "ra.csv");
  write_repetitions_csv(b, dir / "rb.csv");
  CHECK(testing::slurp(dir / "a.csv") == testing::slurp(dir / "b.csv"));
  CHECK(testing::slurp(dir / "ra.csv") == testing::slurp(dir / "rb.csv"));
}

TEST_CASE("means can be recomputed from the repetition log") {
  std::mt19937_64 rng(12);
  const auto rep = testing::rep_of(blobs(rng, 5, 3));
  const auto gold = blob_gold(rep, 5);
  const auto result = run_sweep(rep, &gold, small(2, 6, 3));
  const auto dir = testing::scratch("replog");
  write_repetitions_csv(result, dir / "r.csv");
  std::ifstream in(dir / "r.csv");
  std::string line;
  std::getline(in, line);
  std::map<std::size_t, std::vector<double>> sil;
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    sil[std::stoul(f[0])].push_back(parse_real(f[8]));
  }
  for (const auto& row : result.rows) {
    double s = 0.0;
    for (double v : sil[row.k]) s += v;
    CHECK(*row.silhouette == s / static_cast<double>(sil[row.k].size()));
  }
}

TEST_CASE("k range is clipped to the distinct rows") {
  take_warnings();
  const auto rep = testing::rep_of({{1, 0}, {0, 1}, {1, 1}, {1, 0}});
  const auto result = run_sweep(rep, nullptr, small(2, 10, 1));
  CHECK(result.rows.back().k == 3);
  bool warned = false;
  for (const auto& w : take_warnings()) warned |= w.find("clipped") != std::string::npos;
  CHECK(warned);
  CHECK(!result.rows[0].purity);
  CHECK_THROWS_AS(run_sweep(testing::rep_of({{1, 0}, {2, 0}}), nullptr, small(2, 3, 1)), Error);
}

TEST_CASE("undefined values are excluded and counted") {
  // k = n: every cluster a singleton, Dunn2 is infinite.
  const auto rep = testing::rep_of({{1, 0}, {0, 1}, {1, 1}});
  const auto result = run_sweep(rep, nullptr, small(2, 3, 2));
  CHECK(!result.rows[1].dunn2);
  CHECK(result.rows[1].excluded == 2);
  CHECK(result.rows[1].silhouette);
}

TEST_CASE("empty gold intersection is an error") {
  const auto rep = testing::rep_of({{1, 0}, {0, 1}, {1, 1}});
  GoldStandard g;
  g.mapping["elsewhere"] = "X";
  g.labels = {"X"};
  CHECK_THROWS_AS(run_sweep(rep, &g, small(2, 2, 1)), Error);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(small(1, 3, 1).validate(), Error);
  CHECK_THROWS_AS(small(4, 3, 1).validate(), Error);
  CHECK_THROWS_AS(small(2, 3, 0).validate(), Error);
  auto c = small(2, 3, 1);
  c.peak_floor = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(parse_selection("global") == Selection::Global);
  CHECK_THROWS_AS(parse_selection("best"), Error);
}

TEST_CASE("pipeline on the mini corpus") {
  const Corpus corpus = load_corpus(testing::mini_corpus());
  const GoldStandard gold = load_gold_standard(testing::mini_corpus() / "gold.tsv");
  SweepConfig cfg = small(2, 8, 3);
  const auto a = testing::scratch("pipe_a"), b = testing::scratch("pipe_b");
  const Report r = run_pipeline(corpus, &gold, cfg, a);
  run_pipeline(corpus, &gold, cfg, b);
  REQUIRE(r.rows.size() == 8);
  CHECK(r.gold_labels == 3u);
  for (const char* f : {"report.csv", "curves_NP_VPC.csv", "curves_NP_w2v.csv", "repetitions_NP_VPC_NMF.csv",
                        "manifest.json", "couples.tsv", "np_vpc.mtx"}) {
    CHECK_MESSAGE(testing::slurp(a / f) == testing::slurp(b / f), f);
  }
  for (const auto& row : r.rows) {
    CHECK(row.indices.purity);
    CHECK(row.indices.n_clusters >= 1);
  }

  const auto c = testing::scratch("pipe_nogold");
  run_pipeline(corpus, nullptr, cfg, c, {"[evaluate] gold standard not found: x"});
  std::ifstream in(c / "report.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == kIndexCsvHeader);
  std::getline(in, line);
  const auto f = split_csv(line);
  CHECK(f[3] == "NA");
  CHECK(f[4] == "NA");
  CHECK(f[5] == "NA");
  CHECK(f[7] != "NA");
  CHECK(testing::slurp(c / "manifest.json").find("gold standard not found") != std::string::npos);
}

TEST_CASE("stage failures name their stage") {
  const Corpus verbless = parse_conllu(std::string("1\tdogs\tdog\tNOUN\t_\t_\t0\tROOT\t_\t_\n"));
  try {
    run_pipeline(verbless, nullptr, small(2, 3, 1), testing::scratch("pipe_fail"));
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "extract");
  }
}
