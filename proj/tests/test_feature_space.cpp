#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "support.hpp"
#include "termforge/error.hpp"
#include "termforge/feature_space.hpp"

using namespace termforge;
using Triplets = std::vector<std::tuple<std::size_t, std::size_t, double>>;

namespace {

Couple couple(const std::string& verb, Role role, const std::string& np) {
  return Couple{Vpc{verb, std::nullopt}, role, NounPhrase(np), "s"};
}

CooccurrenceMatrix counts(MatrixKind kind, std::vector<std::string> rows, std::vector<std::string> cols,
                          const std::vector<std::vector<double>>& values) {
  Triplets t;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values[i].size(); ++j) {
      if (values[i][j] != 0.0) t.emplace_back(i, j, values[i][j]);
    }
  }
  return CooccurrenceMatrix::from_triplets(kind, std::move(rows), std::move(cols), std::move(t));
}

CooccurrenceMatrix random_counts(std::mt19937_64& rng, MatrixKind kind, std::size_t max_dim = 20) {
  std::uniform_int_distribution<std::size_t> dim(1, max_dim), pool(0, 29), count(1, 6);
  std::bernoulli_distribution filled(0.35);
  std::set<std::string> rs, cs;
  const std::size_t nr = dim(rng), nc = dim(rng);
  while (rs.size() < nr) rs.insert("np" + std::to_string(pool(rng)));
  while (cs.size() < nc) cs.insert("v" + std::to_string(pool(rng)));
  std::vector<std::string> rows(rs.begin(), rs.end()), cols(cs.begin(), cs.end());
  Triplets t;
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) {
      if (filled(rng)) t.emplace_back(i, j, static_cast<double>(count(rng)));
    }
  }
  return CooccurrenceMatrix::from_triplets(kind, rows, cols, t);
}

std::set<std::string> labels(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("role matrices count couples") {
  const CoupleSet cs{couple("v1", Role::Subject, "a"), couple("v1", Role::Subject, "a"),
                     couple("v2", Role::Subject, "a")};
  const auto subj = build_role_matrix(cs, Role::Subject);
  REQUIRE(subj.rows() == 1);
  REQUIRE(subj.cols() == 2);
  CHECK(subj.at("a", "v1") == 2.0);
  CHECK(subj.at("a", "v2") == 1.0);
  CHECK(subj.kind() == MatrixKind::SubjectCounts);
  const auto obj = build_role_matrix(cs, Role::Object);
  CHECK(obj.rows() == 0);
  CHECK(obj.cols() == 0);
  CHECK(build_role_matrix({}, Role::Subject).rows() == 0);
}

TEST_CASE("merge sums overlapping cells") {
  const auto subj = counts(MatrixKind::SubjectCounts, {"a", "b"}, {"v"}, {{2}, {1}});
  const auto obj = counts(MatrixKind::ObjectCounts, {"b"}, {"v"}, {{3}});
  const auto m = merge_matrices(subj, obj);
  CHECK(m.kind() == MatrixKind::MergedCounts);
  CHECK(m.at("a", "v") == 2.0);
  CHECK(m.at("b", "v") == 4.0);
}

TEST_CASE("merge of disjoint keys is block diagonal") {
  const auto subj = counts(MatrixKind::SubjectCounts, {"a"}, {"v"}, {{2}});
  const auto obj = counts(MatrixKind::ObjectCounts, {"b"}, {"w"}, {{5}});
  const auto m = merge_matrices(subj, obj);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m.at("a", "v") == 2.0);
  CHECK(m.at("b", "w") == 5.0);
  CHECK(m.at("a", "w") == 0.0);
  CHECK(m.at("b", "v") == 0.0);
}

TEST_CASE("merge with an empty subject matrix reproduces the object matrix") {
  std::mt19937_64 rng(3);
  const auto obj = random_counts(rng, MatrixKind::ObjectCounts);
  const auto m = merge_matrices(CooccurrenceMatrix(MatrixKind::SubjectCounts), obj);
  CHECK(m.row_labels() == obj.row_labels());
  CHECK(m.col_labels() == obj.col_labels());
  CHECK(m.to_dense() == obj.to_dense());
}

TEST_CASE("merge additivity on random matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_counts(rng, MatrixKind::SubjectCounts);
    const auto o = random_counts(rng, MatrixKind::ObjectCounts);
    const auto m = merge_matrices(s, o);
    auto rows = labels(s.row_labels()), cols = labels(s.col_labels());
    rows.merge(labels(o.row_labels()));
    cols.merge(labels(o.col_labels()));
    CHECK(labels(m.row_labels()) == rows);
    CHECK(labels(m.col_labels()) == cols);
    for (const auto& r : rows) {
      for (const auto& c : cols) CHECK(m.at(r, c) == s.at(r, c) + o.at(r, c));
    }
  }
}

TEST_CASE("frequency threshold is strict and single-pass") {
  const auto m = counts(MatrixKind::MergedCounts, {"a", "b", "c"}, {"v"}, {{9}, {8}, {3}});
  const auto kept = apply_frequency_threshold(m, {8.0, 0.0});
  CHECK(kept.row_labels() == std::vector<std::string>{"a"});

  const auto sparse = counts(MatrixKind::MergedCounts, {"a", "b", "c"}, {"v", "w", "x"},
                             {{1, 0, 0}, {0, 2, 0}, {0, 0, 0}});
  const auto all = apply_frequency_threshold(sparse, {0.0, 0.0});
  CHECK(all.row_labels() == std::vector<std::string>{"a", "b"});
  CHECK(all.col_labels() == std::vector<std::string>{"v", "w"});

  CHECK_THROWS_AS(apply_frequency_threshold(m, {100.0, 0.0}), Error);
  CHECK_THROWS_AS(apply_frequency_threshold(tfidf_weight(m), {0.0, 0.0}), Error);
}

TEST_CASE("threshold monotonicity") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_counts(rng, MatrixKind::MergedCounts);
    std::set<std::string> prev_rows, prev_cols;
    bool first = true;
    for (double sigma : {0.0, 1.0, 2.0, 4.0, 7.0, 11.0}) {
      CooccurrenceMatrix k;
      try {
        k = apply_frequency_threshold(m, {sigma, 0.0});
      } catch (const Error&) {
        break;
      }
      const auto rows = labels(k.row_labels()), cols = labels(k.col_labels());
      if (!first) {
        CHECK(std::includes(prev_rows.begin(), prev_rows.end(), rows.begin(), rows.end()));
        CHECK(std::includes(prev_cols.begin(), prev_cols.end(), cols.begin(), cols.end()));
      }
      prev_rows = rows;
      prev_cols = cols;
      first = false;
    }
  }
}

TEST_CASE("tf-idf weighting") {
  const auto m = counts(MatrixKind::MergedCounts, {"a", "b"}, {"v", "w"}, {{2, 0}, {1, 1}});
  const auto t = tfidf_weight(m);
  CHECK(t.kind() == MatrixKind::TfIdf);
  CHECK(t.at(0, 0) == doctest::Approx(1.3862943611198906).epsilon(1e-15));
  CHECK(t.at(0, 1) == 0.0);
  CHECK(t.at(1, 0) == 0.0);
  CHECK(t.at(1, 1) == 0.0);

  const auto one = counts(MatrixKind::MergedCounts, {"a"}, {"v"}, {{7}});
  CHECK(tfidf_weight(one).at(0, 0) == 0.0);
}

TEST_CASE("tf-idf keeps the sparsity pattern except for full rows") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_counts(rng, MatrixKind::MergedCounts);
    const auto t = tfidf_weight(m);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const bool full = m.row(i).size() == m.cols();
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (full || m.at(i, j) == 0.0) {
          CHECK(t.at(i, j) == 0.0);
        } else {
          CHECK(t.at(i, j) > 0.0);
          CHECK(t.at(i, j) == m.at(i, j) * std::log(static_cast<double>(m.cols()) /
                                                    static_cast<double>(m.row(i).size())));
        }
      }
    }
  }
}

TEST_CASE("value threshold") {
  const auto t = counts(MatrixKind::TfIdf, {"a", "b", "c"}, {"v"}, {{7.5}, {7.0}, {2.1}});
  CHECK(apply_value_threshold(t, {0.0, 7.0}).row_labels() == std::vector<std::string>{"a"});
  CHECK(apply_value_threshold(t, {0.0, 0.0}).rows() == 3);
  CHECK_THROWS_AS(apply_value_threshold(counts(MatrixKind::MergedCounts, {"a"}, {"v"}, {{1}}), {0, 0}), Error);
}

TEST_CASE("negative counts are rejected") {
  CHECK_THROWS_AS(counts(MatrixKind::MergedCounts, {"a"}, {"v"}, {{-1}}), Error);
}

TEST_CASE("MatrixMarket round-trip") {
  std::mt19937_64 rng(23);
  const auto dir = testing::scratch("mtx");
  for (int trial = 0; trial < 10; ++trial) {
    auto m = random_counts(rng, MatrixKind::MergedCounts);
    if (trial % 2) m = tfidf_weight(m);
    write_matrix_market(m, dir / "m.mtx");
    CHECK(read_matrix_market(dir / "m.mtx") == m);
  }
  CHECK(std::filesystem::exists(dir / "m.rows"));
  CHECK(std::filesystem::exists(dir / "m.cols"));
}

TEST_CASE("representations") {
  const auto m = counts(MatrixKind::MergedCounts, {"a", "b"}, {"v", "w"}, {{1, 0}, {0, 2}});
  const auto rep = to_representation(m, Provenance::NpVpc);
  CHECK(rep.labels == std::vector<std::string>{"a", "b"});
  CHECK(rep.matrix == testing::dense({{1, 0}, {0, 2}}));

  const auto dropped = make_representation({"x", "y"}, testing::dense({{0, 0}, {1, 2}}), Provenance::NpW2v);
  CHECK(dropped.labels == std::vector<std::string>{"y"});
  CHECK(dropped.dropped == std::vector<std::string>{"x"});

  const auto dir = testing::scratch("rep");
  const auto r = make_representation({"a b", "c"}, testing::dense({{0.1, -2.5}, {1e-300, 3}}), Provenance::NpW2v);
  write_representation(r, dir / "r.txt");
  const auto back = read_representation(dir / "r.txt", Provenance::NpW2v);
  CHECK(back.labels == r.labels);
  CHECK(back.matrix == r.matrix);

  for (auto p : {Provenance::NpVpc, Provenance::NpVpcTfidf, Provenance::NpVpcNmf, Provenance::NpW2v}) {
    CHECK(parse_provenance(provenance_name(p)) == p);
  }
}
