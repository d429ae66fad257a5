#include "termforge/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "termforge/diagnostics.hpp"
#include "termforge/error.hpp"
#include "termforge/kernels.hpp"
#include "termforge/text_io.hpp"

namespace termforge {

namespace {

double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// x <- x .* num ./ den, leaving cells with den == 0 untouched.
void scale_in_place(Matrix& x, const Matrix& num, const Matrix& den) {
  auto& xd = x.data();
  const auto& nd = num.data();
  const auto& dd = den.data();
  for (std::size_t k = 0; k < xd.size(); ++k) {
    if (dd[k] > 0.0) xd[k] *= nd[k] / dd[k];
  }
}

}  // namespace

void nmf_update(const Matrix& v, Matrix& w, Matrix& h) {
  namespace kx = kernels::omp;
  {
    const Matrix num = kx::gemm_tn(w, v);
    const Matrix den = kx::gemm_nn(kx::gemm_tn(w, w), h);
    scale_in_place(h, num, den);
  }
  const Matrix num = kx::gemm_nt(v, h);
  const Matrix den = kx::gemm_nn(w, kx::gemm_nt(h, h));
  scale_in_place(w, num, den);
}

double reconstruction_error(const Matrix& v, const Matrix& w, const Matrix& h) {
  if (w.rows() != v.rows() || h.cols() != v.cols() || w.cols() != h.rows()) {
    throw Error("reconstruction_error: shapes do not conform");
  }
  const Matrix wh = kernels::omp::gemm_nn(w, h);
  double sq = 0.0;
  for (std::size_t k = 0; k < wh.data().size(); ++k) {
    const double d = v.data()[k] - wh.data()[k];
    sq += d * d;
  }
  return std::sqrt(sq);
}

FactorPair nmf(const Matrix& v, const NmfConfig& config) {
  if (v.empty()) throw Error("nmf: matrix has a zero dimension");
  for (double x : v.data()) {
    if (x < 0.0 || std::isnan(x)) throw Error("nmf: matrix has a negative entry");
  }
  if (config.rank == 0) throw Error("nmf: rank must be at least 1");
  const std::size_t rank = std::min({config.rank, v.rows(), v.cols()});
  if (rank < config.rank) {
    warn("nmf: rank " + std::to_string(config.rank) + " clamped to " + std::to_string(rank) +
         " for a " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) + " matrix");
  }

  FactorPair f{Matrix(v.rows(), rank), Matrix(rank, v.cols()), 0, 0.0, {}};
  std::mt19937_64 rng(config.seed);
  for (auto& x : f.w.data()) x = open_unit(rng);
  for (auto& x : f.h.data()) x = open_unit(rng);

  double err = reconstruction_error(v, f.w, f.h);
  f.error_trace.push_back(err);
  while (f.iterations_run < config.max_iter && err > 0.0) {
    nmf_update(v, f.w, f.h);
    ++f.iterations_run;
    const double prev = err;
    err = reconstruction_error(v, f.w, f.h);
    f.error_trace.push_back(err);
    if ((prev - err) / prev < config.tol) break;
  }
  f.final_error = err;
  return f;
}

FactorPair nmf(const CooccurrenceMatrix& v, const NmfConfig& config) {
  return nmf(v.to_dense(), config);
}

void write_dense(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ' ';
      out << format_real(r[j]);
    }
    out << '\n';
  }
}

Matrix read_dense(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw ParseError(1, "expected header 'rows cols'", path.string());
  Matrix m(rows, cols);
  std::string tok;
  for (auto& x : m.data()) {
    if (!(in >> tok)) throw Error(path.string() + ": fewer values than declared");
    x = parse_real(tok);
  }
  return m;
}

}  // namespace termforge
