#pragma once

// NP x VPC co-occurrence matrices and the row/column selection applied to them.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "termforge/couples.hpp"
#include "termforge/matrix.hpp"

namespace termforge {

enum class MatrixKind { SubjectCounts, ObjectCounts, MergedCounts, TfIdf };

const char* kind_name(MatrixKind kind);
MatrixKind parse_kind(std::string_view name);

// Sparse matrix in CSR form with labelled axes. Rows and columns are sorted
// lexicographically by key; no explicit zeros are stored.
class CooccurrenceMatrix {
 public:
  struct Entry {
    std::size_t col;
    double value;
    bool operator==(const Entry&) const = default;
  };

  CooccurrenceMatrix() = default;
  explicit CooccurrenceMatrix(MatrixKind kind) : kind_(kind) {}

  // Builds from (row, col, value) triplets; duplicates are summed and zeros
  // dropped. Labels must be unique and sorted. Negative values throw.
  static CooccurrenceMatrix from_triplets(MatrixKind kind, std::vector<std::string> row_labels,
                                          std::vector<std::string> col_labels,
                                          std::vector<std::tuple<std::size_t, std::size_t, double>> triplets);

  MatrixKind kind() const noexcept { return kind_; }
  std::size_t rows() const noexcept { return row_labels_.size(); }
  std::size_t cols() const noexcept { return col_labels_.size(); }
  std::size_t nnz() const noexcept { return entries_.size(); }

  const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
  const std::vector<std::string>& col_labels() const noexcept { return col_labels_; }

  std::span<const Entry> row(std::size_t i) const {
    return {entries_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  // Value at (i, j), zero when absent.
  double at(std::size_t i, std::size_t j) const;
  // Value by label, zero when either label is absent.
  double at(const std::string& row_label, const std::string& col_label) const;

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  Matrix to_dense() const;

  bool operator==(const CooccurrenceMatrix&) const = default;

 private:
  MatrixKind kind_ = MatrixKind::MergedCounts;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Entry> entries_;
};

struct Thresholds {
  double sigma1 = 0.0;  // cutoff on frequency sums
  double sigma2 = 0.0;  // cutoff on Tf-Idf value sums
};

// Count of couples per (np, vpc) for one role.
CooccurrenceMatrix build_role_matrix(const CoupleSet& couples, Role role);

// Union of both label spaces; cells present in both are summed.
CooccurrenceMatrix merge_matrices(const CooccurrenceMatrix& subject, const CooccurrenceMatrix& object);

/// Keeps rows whose sum is strictly greater than `cutoff` and columns whose
/// sum is strictly greater than `cutoff`, both sums taken on the input in a
/// single pass, then drops rows and columns left without any nonzero entry.
/// Throws Error when no row survives.
CooccurrenceMatrix select_by_sum(const CooccurrenceMatrix& m, double cutoff, const std::string& what);

// select_by_sum on a counts matrix with sigma1.
CooccurrenceMatrix apply_frequency_threshold(const CooccurrenceMatrix& m, const Thresholds& t);
// select_by_sum on a TfIdf matrix with sigma2.
CooccurrenceMatrix apply_value_threshold(const CooccurrenceMatrix& m, const Thresholds& t);

// NPs act as terms and VPCs as documents: w = f * ln(M / df), where M is the
// column count and df the number of VPCs the NP occurs with.
CooccurrenceMatrix tfidf_weight(const CooccurrenceMatrix& m);

// MatrixMarket coordinate file plus <stem>.rows / <stem>.cols label sidecars.
void write_matrix_market(const CooccurrenceMatrix& m, const std::filesystem::path& mtx_path);
CooccurrenceMatrix read_matrix_market(const std::filesystem::path& mtx_path);

enum class Provenance { NpVpc, NpVpcTfidf, NpVpcNmf, NpW2v };

const char* provenance_name(Provenance p);  // "NP_VPC", "NP_VPC_tfidf", ...
Provenance parse_provenance(std::string_view name);

// Dense NP x feature matrix ready for clustering.
struct Representation {
  std::vector<std::string> labels;
  Matrix matrix;
  Provenance provenance = Provenance::NpVpc;
  // Labels removed during construction (all-zero rows, out-of-vocabulary NPs).
  std::vector<std::string> dropped;
};

// Densifies `m`, dropping all-zero rows with a warning.
Representation to_representation(const CooccurrenceMatrix& m, Provenance provenance);

// Keeps only nonzero rows of `matrix`; dropped labels are recorded and warned.
Representation make_representation(std::vector<std::string> labels, Matrix matrix,
                                   Provenance provenance);

// Text form: header "rows cols", then one "<label>\t<v1> <v2> ..." line per row.
void write_representation(const Representation& rep, const std::filesystem::path& path);
// Reads the text form above, or a .mtx file (densified) when the path ends in .mtx.
Representation read_representation(const std::filesystem::path& path, Provenance provenance);

}  // namespace termforge
