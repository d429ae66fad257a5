#include "termforge/feature_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "termforge/diagnostics.hpp"
#include "termforge/error.hpp"
#include "termforge/text_io.hpp"

namespace termforge {

namespace {

using Triplet = std::tuple<std::size_t, std::size_t, double>;

// Sorts labels and returns old-index -> new-index. Throws on duplicates.
std::vector<std::size_t> canonical_order(std::vector<std::string>& labels, const char* axis) {
  std::vector<std::size_t> perm(labels.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](auto a, auto b) { return labels[a] < labels[b]; });
  std::vector<std::string> sorted(labels.size());
  std::vector<std::size_t> remap(labels.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    sorted[k] = std::move(labels[perm[k]]);
    remap[perm[k]] = k;
    if (k > 0 && sorted[k] == sorted[k - 1]) {
      throw Error(std::string("duplicate ") + axis + " label '" + sorted[k] + "'");
    }
  }
  labels = std::move(sorted);
  return remap;
}

std::map<std::string, std::size_t> index_of(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.emplace(labels[i], i);
  return out;
}

std::filesystem::path sidecar(const std::filesystem::path& mtx, const char* ext) {
  auto p = mtx;
  p.replace_extension(ext);
  return p;
}

void write_labels(const std::vector<std::string>& labels, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& l : labels) out << l << '\n';
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open label file " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) labels.push_back(line);
  }
  return labels;
}

}  // namespace

const char* kind_name(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::SubjectCounts: return "SubjectCounts";
    case MatrixKind::ObjectCounts: return "ObjectCounts";
    case MatrixKind::MergedCounts: return "MergedCounts";
    case MatrixKind::TfIdf: return "TfIdf";
  }
  return "?";
}

MatrixKind parse_kind(std::string_view name) {
  for (auto k : {MatrixKind::SubjectCounts, MatrixKind::ObjectCounts, MatrixKind::MergedCounts,
                 MatrixKind::TfIdf}) {
    if (name == kind_name(k)) return k;
  }
  throw Error("unknown matrix kind '" + std::string(name) + "'");
}

CooccurrenceMatrix CooccurrenceMatrix::from_triplets(MatrixKind kind,
                                                     std::vector<std::string> row_labels,
                                                     std::vector<std::string> col_labels,
                                                     std::vector<Triplet> triplets) {
  CooccurrenceMatrix m(kind);
  const auto row_map = canonical_order(row_labels, "row");
  const auto col_map = canonical_order(col_labels, "column");
  for (auto& [i, j, v] : triplets) {
    if (i >= row_map.size() || j >= col_map.size()) throw Error("triplet index out of range");
    if (v < 0.0 || std::isnan(v)) throw Error("co-occurrence values must be non-negative");
    i = row_map[i];
    j = col_map[j];
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });

  m.row_labels_ = std::move(row_labels);
  m.col_labels_ = std::move(col_labels);
  m.row_ptr_.assign(m.row_labels_.size() + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const auto [i, j, v0] = triplets[k];
    double v = v0;
    std::size_t next = k + 1;
    while (next < triplets.size() && std::get<0>(triplets[next]) == i &&
           std::get<1>(triplets[next]) == j) {
      v += std::get<2>(triplets[next]);
      ++next;
    }
    if (v != 0.0) {
      m.entries_.push_back(Entry{j, v});
      ++m.row_ptr_[i + 1];
    }
    k = next;
  }
  std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
  return m;
}

double CooccurrenceMatrix::at(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  const auto it = std::lower_bound(r.begin(), r.end(), j,
                                   [](const Entry& e, std::size_t col) { return e.col < col; });
  return it != r.end() && it->col == j ? it->value : 0.0;
}

double CooccurrenceMatrix::at(const std::string& row_label, const std::string& col_label) const {
  const auto ri = std::lower_bound(row_labels_.begin(), row_labels_.end(), row_label);
  const auto ci = std::lower_bound(col_labels_.begin(), col_labels_.end(), col_label);
  if (ri == row_labels_.end() || *ri != row_label) return 0.0;
  if (ci == col_labels_.end() || *ci != col_label) return 0.0;
  return at(static_cast<std::size_t>(ri - row_labels_.begin()),
            static_cast<std::size_t>(ci - col_labels_.begin()));
}

std::vector<double> CooccurrenceMatrix::row_sums() const {
  std::vector<double> sums(rows(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const auto& e : row(i)) sums[i] += e.value;
  }
  return sums;
}

std::vector<double> CooccurrenceMatrix::col_sums() const {
  std::vector<double> sums(cols(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const auto& e : row(i)) sums[e.col] += e.value;
  }
  return sums;
}

Matrix CooccurrenceMatrix::to_dense() const {
  Matrix d(rows(), cols());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const auto& e : row(i)) d(i, e.col) = e.value;
  }
  return d;
}

CooccurrenceMatrix build_role_matrix(const CoupleSet& couples, Role role) {
  std::map<std::pair<std::string, std::string>, double> counts;
  std::set<std::string> nps;
  std::set<std::string> vpcs;
  for (const auto& c : couples) {
    if (c.role != role) continue;
    auto key = c.vpc.key();
    nps.insert(c.np.text());
    vpcs.insert(key);
    counts[{c.np.text(), std::move(key)}] += 1.0;
  }
  std::vector<std::string> rows(nps.begin(), nps.end());
  std::vector<std::string> cols(vpcs.begin(), vpcs.end());
  const auto ri = index_of(rows);
  const auto ci = index_of(cols);
  std::vector<Triplet> triplets;
  triplets.reserve(counts.size());
  for (const auto& [key, n] : counts) triplets.emplace_back(ri.at(key.first), ci.at(key.second), n);
  const auto kind = role == Role::Subject ? MatrixKind::SubjectCounts : MatrixKind::ObjectCounts;
  return CooccurrenceMatrix::from_triplets(kind, std::move(rows), std::move(cols), std::move(triplets));
}

CooccurrenceMatrix merge_matrices(const CooccurrenceMatrix& subject, const CooccurrenceMatrix& object) {
  std::set<std::string> row_set(subject.row_labels().begin(), subject.row_labels().end());
  row_set.insert(object.row_labels().begin(), object.row_labels().end());
  std::set<std::string> col_set(subject.col_labels().begin(), subject.col_labels().end());
  col_set.insert(object.col_labels().begin(), object.col_labels().end());
  std::vector<std::string> rows(row_set.begin(), row_set.end());
  std::vector<std::string> cols(col_set.begin(), col_set.end());
  const auto ri = index_of(rows);
  const auto ci = index_of(cols);

  std::vector<Triplet> triplets;
  for (const auto* part : {&subject, &object}) {
    for (std::size_t i = 0; i < part->rows(); ++i) {
      const auto r = ri.at(part->row_labels()[i]);
      for (const auto& e : part->row(i)) {
        triplets.emplace_back(r, ci.at(part->col_labels()[e.col]), e.value);
      }
    }
  }
  return CooccurrenceMatrix::from_triplets(MatrixKind::MergedCounts, std::move(rows),
                                           std::move(cols), std::move(triplets));
}

CooccurrenceMatrix select_by_sum(const CooccurrenceMatrix& m, double cutoff, const std::string& what) {
  const auto rs = m.row_sums();
  const auto cs = m.col_sums();
  std::vector<bool> keep_col(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) keep_col[j] = cs[j] > cutoff;

  // Surviving cells; rows and columns with none of them vanish.
  std::vector<bool> row_used(m.rows(), false);
  std::vector<bool> col_used(m.cols(), false);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!(rs[i] > cutoff)) continue;
    for (const auto& e : m.row(i)) {
      if (keep_col[e.col]) {
        row_used[i] = true;
        col_used[e.col] = true;
      }
    }
  }

  std::vector<std::size_t> col_new(m.cols(), 0);
  std::vector<std::string> cols;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (col_used[j]) {
      col_new[j] = cols.size();
      cols.push_back(m.col_labels()[j]);
    }
  }
  std::vector<std::string> rows;
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!row_used[i]) continue;
    for (const auto& e : m.row(i)) {
      if (col_used[e.col]) triplets.emplace_back(rows.size(), col_new[e.col], e.value);
    }
    rows.push_back(m.row_labels()[i]);
  }
  if (rows.empty()) {
    throw Error("threshold " + what + " > " + format_real(cutoff) +
                " eliminates every row; choose a lower " + what);
  }
  return CooccurrenceMatrix::from_triplets(m.kind(), std::move(rows), std::move(cols),
                                           std::move(triplets));
}

CooccurrenceMatrix apply_frequency_threshold(const CooccurrenceMatrix& m, const Thresholds& t) {
  if (m.kind() == MatrixKind::TfIdf) throw Error("frequency threshold expects a counts matrix");
  return select_by_sum(m, t.sigma1, "sigma1");
}

CooccurrenceMatrix apply_value_threshold(const CooccurrenceMatrix& m, const Thresholds& t) {
  if (m.kind() != MatrixKind::TfIdf) throw Error("value threshold expects a TfIdf matrix");
  return select_by_sum(m, t.sigma2, "sigma2");
}

CooccurrenceMatrix tfidf_weight(const CooccurrenceMatrix& m) {
  if (m.kind() == MatrixKind::TfIdf) throw Error("matrix is already Tf-Idf weighted");
  const double n_docs = static_cast<double>(m.cols());
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    const double idf = std::log(n_docs / static_cast<double>(r.size()));
    for (const auto& e : r) triplets.emplace_back(i, e.col, e.value * idf);
  }
  return CooccurrenceMatrix::from_triplets(MatrixKind::TfIdf, m.row_labels(), m.col_labels(),
                                           std::move(triplets));
}

void write_matrix_market(const CooccurrenceMatrix& m, const std::filesystem::path& mtx_path) {
  std::ofstream out(mtx_path);
  if (!out) throw Error("cannot write " + mtx_path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << "% kind: " << kind_name(m.kind()) << '\n';
  out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (const auto& e : m.row(i)) {
      out << i + 1 << ' ' << e.col + 1 << ' ' << format_real(e.value) << '\n';
    }
  }
  write_labels(m.row_labels(), sidecar(mtx_path, ".rows"));
  write_labels(m.col_labels(), sidecar(mtx_path, ".cols"));
}

CooccurrenceMatrix read_matrix_market(const std::filesystem::path& mtx_path) {
  std::ifstream in(mtx_path);
  if (!in) throw Error("cannot open " + mtx_path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0) {
    throw ParseError(1, "not a MatrixMarket coordinate real general file", mtx_path.string());
  }
  MatrixKind kind = MatrixKind::MergedCounts;
  std::size_t rows = 0, cols = 0, nnz = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("% kind:", 0) == 0) {
      std::istringstream k(line.substr(7));
      std::string name;
      k >> name;
      kind = parse_kind(name);
      continue;
    }
    if (line.empty() || line[0] == '%') continue;
    std::istringstream dims(line);
    if (!(dims >> rows >> cols >> nnz)) throw ParseError(line_no, "bad size line", mtx_path.string());
    break;
  }
  auto row_labels = read_labels(sidecar(mtx_path, ".rows"));
  auto col_labels = read_labels(sidecar(mtx_path, ".cols"));
  if (row_labels.size() != rows || col_labels.size() != cols) {
    throw Error(mtx_path.string() + ": label sidecars do not match matrix dimensions");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(nnz);
  while (triplets.size() < nnz && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream e(line);
    std::size_t i = 0, j = 0;
    std::string value;
    if (!(e >> i >> j >> value) || i == 0 || j == 0 || i > rows || j > cols) {
      throw ParseError(line_no, "bad entry", mtx_path.string());
    }
    triplets.emplace_back(i - 1, j - 1, parse_real(value));
  }
  if (triplets.size() != nnz) throw Error(mtx_path.string() + ": fewer entries than declared");
  return CooccurrenceMatrix::from_triplets(kind, std::move(row_labels), std::move(col_labels),
                                           std::move(triplets));
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::NpVpc: return "NP_VPC";
    case Provenance::NpVpcTfidf: return "NP_VPC_tfidf";
    case Provenance::NpVpcNmf: return "NP_VPC_NMF";
    case Provenance::NpW2v: return "NP_w2v";
  }
  return "?";
}

Provenance parse_provenance(std::string_view name) {
  for (auto p : {Provenance::NpVpc, Provenance::NpVpcTfidf, Provenance::NpVpcNmf, Provenance::NpW2v}) {
    if (name == provenance_name(p)) return p;
  }
  throw Error("unknown representation '" + std::string(name) + "'");
}

Representation make_representation(std::vector<std::string> labels, Matrix matrix,
                                   Provenance provenance) {
  if (labels.size() != matrix.rows()) throw Error("representation label count differs from row count");
  Representation rep;
  rep.provenance = provenance;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto r = matrix.row(i);
    if (std::any_of(r.begin(), r.end(), [](double v) { return v != 0.0; })) {
      keep.push_back(i);
    } else {
      rep.dropped.push_back(labels[i]);
    }
  }
  if (keep.size() == matrix.rows()) {
    rep.labels = std::move(labels);
    rep.matrix = std::move(matrix);
    return rep;
  }
  warn(std::string(provenance_name(provenance)) + ": dropped " + std::to_string(rep.dropped.size()) +
       " all-zero row(s)");
  rep.matrix = Matrix(keep.size(), matrix.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto src = matrix.row(keep[k]);
    std::copy(src.begin(), src.end(), rep.matrix.row(k).begin());
    rep.labels.push_back(std::move(labels[keep[k]]));
  }
  return rep;
}

Representation to_representation(const CooccurrenceMatrix& m, Provenance provenance) {
  return make_representation(m.row_labels(), m.to_dense(), provenance);
}

void write_representation(const Representation& rep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << rep.matrix.rows() << ' ' << rep.matrix.cols() << '\n';
  for (std::size_t i = 0; i < rep.matrix.rows(); ++i) {
    out << rep.labels[i] << '\t';
    const auto r = rep.matrix.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ' ';
      out << format_real(r[j]);
    }
    out << '\n';
  }
}

Representation read_representation(const std::filesystem::path& path, Provenance provenance) {
  if (path.extension() == ".mtx") return to_representation(read_matrix_market(path), provenance);
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t rows = 0, cols = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> rows >> cols)) {
    throw ParseError(1, "expected header 'rows cols'", path.string());
  }
  std::vector<std::string> labels;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw Error(path.string() + ": fewer rows than declared");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(i + 2, "missing tab after label", path.string());
    labels.push_back(line.substr(0, tab));
    std::istringstream values(line.substr(tab + 1));
    std::string tok;
    std::size_t j = 0;
    while (values >> tok) {
      if (j >= cols) throw ParseError(i + 2, "too many values", path.string());
      m(i, j++) = parse_real(tok);
    }
    if (j != cols) throw ParseError(i + 2, "too few values", path.string());
  }
  return make_representation(std::move(labels), std::move(m), provenance);
}

}  // namespace termforge
