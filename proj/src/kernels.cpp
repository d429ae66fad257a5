#include "termforge/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "termforge/error.hpp"

namespace termforge::kernels {

namespace {

std::atomic<int> g_thread_limit{0};

std::vector<double> row_norms(const Matrix& x) {
  std::vector<double> norms(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double sq = 0.0;
    for (double v : x.row(i)) sq += v * v;
    norms[i] = std::sqrt(sq);
    if (!(norms[i] > 0.0)) {
      throw Error("cosine dissimilarity undefined: row " + std::to_string(i) + " is a zero vector");
    }
  }
  return norms;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) acc += a[p] * b[p];
  return acc;
}

inline double clamp_dissimilarity(double d) { return std::clamp(d, 0.0, 2.0); }

// Per-output-row bodies shared by the serial and OpenMP drivers.

inline void pairwise_row(const Matrix& x, const std::vector<double>& norms, Matrix& out,
                         std::size_t i) {
  out(i, i) = 0.0;
  for (std::size_t j = i + 1; j < x.rows(); ++j) {
    const double d = clamp_dissimilarity(1.0 - dot(x.row(i), x.row(j)) / (norms[i] * norms[j]));
    out(i, j) = d;
    out(j, i) = d;
  }
}

inline void gemm_nn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  for (std::size_t p = 0; p < a.cols(); ++p) {
    const double av = a(i, p);
    if (av == 0.0) continue;
    auto brow = b.row(p);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += av * brow[j];
  }
}

inline void gemm_tn_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  auto out = c.row(i);
  for (std::size_t p = 0; p < a.rows(); ++p) {
    const double av = a(p, i);
    if (av == 0.0) continue;
    auto brow = b.row(p);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += av * brow[j];
  }
}

inline void gemm_nt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
  for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
}

inline void responsibility_row(const Matrix& s, const Matrix& a, Matrix& r, double damping,
                               std::size_t i) {
  const std::size_t n = s.cols();
  double max1 = -std::numeric_limits<double>::infinity();
  double max2 = max1;
  std::size_t arg1 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = a(i, k) + s(i, k);
    if (v > max1) {
      max2 = max1;
      max1 = v;
      arg1 = k;
    } else if (v > max2) {
      max2 = v;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double fresh = s(i, k) - (k == arg1 ? max2 : max1);
    r(i, k) = damping * r(i, k) + (1.0 - damping) * fresh;
  }
}

inline void availability_col(const Matrix& r, Matrix& a, double damping, std::size_t k) {
  const std::size_t n = r.rows();
  double positive = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != k) positive += std::max(0.0, r(i, k));
  }
  for (std::size_t i = 0; i < n; ++i) {
    double fresh;
    if (i == k) {
      fresh = positive;
    } else {
      fresh = std::min(0.0, r(k, k) + positive - std::max(0.0, r(i, k)));
    }
    a(i, k) = damping * a(i, k) + (1.0 - damping) * fresh;
  }
}

inline void nearest_row(const Matrix& x, const Matrix& centroids, Assignment& out, std::size_t i) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = clamp_dissimilarity(1.0 - dot(x.row(i), centroids.row(c)));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  out.cluster[i] = best;
  out.dissimilarity[i] = best_d;
}

void require_inner(std::size_t lhs, std::size_t rhs, const char* op) {
  if (lhs != rhs) throw Error(std::string(op) + ": inner dimensions do not conform");
}

}  // namespace

int thread_count() {
  if (const int limit = g_thread_limit.load(); limit > 0) return limit;
  if (const char* env = std::getenv("TERMFORGE_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<int>(std::min<long>(n, 1024));
  }
  return omp_get_max_threads();
}

void set_thread_limit(int n) { g_thread_limit.store(n > 0 ? n : 0); }

namespace serial {

Matrix pairwise_cosine_dissimilarity(const Matrix& x) {
  const auto norms = row_norms(x);
  Matrix out(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) pairwise_row(x, norms, out, i);
  return out;
}

Matrix gemm_nn(const Matrix& a, const Matrix& b) {
  require_inner(a.cols(), b.rows(), "gemm_nn");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_nn_row(a, b, c, i);
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  require_inner(a.rows(), b.rows(), "gemm_tn");
  Matrix c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) gemm_tn_row(a, b, c, i);
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  require_inner(a.cols(), b.cols(), "gemm_nt");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) gemm_nt_row(a, b, c, i);
  return c;
}

void ap_responsibilities(const Matrix& s, const Matrix& a, Matrix& r, double damping) {
  for (std::size_t i = 0; i < s.rows(); ++i) responsibility_row(s, a, r, damping, i);
}

void ap_availabilities(const Matrix& r, Matrix& a, double damping) {
  for (std::size_t k = 0; k < r.cols(); ++k) availability_col(r, a, damping, k);
}

Assignment nearest_centroid(const Matrix& x, const Matrix& centroids) {
  Assignment out{std::vector<std::size_t>(x.rows()), std::vector<double>(x.rows())};
  for (std::size_t i = 0; i < x.rows(); ++i) nearest_row(x, centroids, out, i);
  return out;
}

}  // namespace serial

namespace omp {

Matrix pairwise_cosine_dissimilarity(const Matrix& x) {
  const auto norms = row_norms(x);
  Matrix out(x.rows(), x.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) pairwise_row(x, norms, out, static_cast<std::size_t>(i));
  return out;
}

Matrix gemm_nn(const Matrix& a, const Matrix& b) {
  require_inner(a.cols(), b.rows(), "gemm_nn");
  Matrix c(a.rows(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) gemm_nn_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
  require_inner(a.rows(), b.rows(), "gemm_tn");
  Matrix c(a.cols(), b.cols());
  const auto n = static_cast<std::ptrdiff_t>(a.cols());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) gemm_tn_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
  require_inner(a.cols(), b.cols(), "gemm_nt");
  Matrix c(a.rows(), b.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) gemm_nt_row(a, b, c, static_cast<std::size_t>(i));
  return c;
}

void ap_responsibilities(const Matrix& s, const Matrix& a, Matrix& r, double damping) {
  const auto n = static_cast<std::ptrdiff_t>(s.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    responsibility_row(s, a, r, damping, static_cast<std::size_t>(i));
  }
}

void ap_availabilities(const Matrix& r, Matrix& a, double damping) {
  const auto n = static_cast<std::ptrdiff_t>(r.cols());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    availability_col(r, a, damping, static_cast<std::size_t>(k));
  }
}

Assignment nearest_centroid(const Matrix& x, const Matrix& centroids) {
  Assignment out{std::vector<std::size_t>(x.rows()), std::vector<double>(x.rows())};
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    nearest_row(x, centroids, out, static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace omp

}  // namespace termforge::kernels
