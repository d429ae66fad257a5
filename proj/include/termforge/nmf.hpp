#pragma once

// Non-negative matrix factorization V ~ W H under the Frobenius objective,
// solved with Lee-Seung multiplicative updates.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "termforge/feature_space.hpp"
#include "termforge/matrix.hpp"

namespace termforge {

struct NmfConfig {
  std::size_t rank = 100;
  std::size_t max_iter = 500;
  double tol = 1e-5;  // stop when the relative error improvement falls below
  std::uint64_t seed = 0;
};

struct FactorPair {
  Matrix w;  // rows x rank
  Matrix h;  // rank x cols
  std::size_t iterations_run = 0;
  double final_error = 0.0;
  // ||V - WH||_F before the first update, then after each update.
  std::vector<double> error_trace;
};

/// Factorizes a non-negative matrix. The rank is clamped to min(rows, cols)
/// with a warning. W and H start from seeded uniform draws in (0, 1): one
/// std::mt19937_64 stream, W row-major first, then H, each draw mapped as
/// ((x >> 11) + 0.5) * 2^-53. Throws Error for negative entries or an empty
/// matrix.
FactorPair nmf(const Matrix& v, const NmfConfig& config);
FactorPair nmf(const CooccurrenceMatrix& v, const NmfConfig& config);

/// One multiplicative update: H <- H .* (W'V) ./ (W'WH), then
/// W <- W .* (VH') ./ (WHH'). Cells whose denominator is zero keep their value
/// (their numerator is zero too, and the cell does not affect the objective).
void nmf_update(const Matrix& v, Matrix& w, Matrix& h);

// ||V - WH||_F. Throws Error when shapes do not conform.
double reconstruction_error(const Matrix& v, const Matrix& w, const Matrix& h);

// Text form: header "rows cols", then one row per line of space-separated reals.
void write_dense(const Matrix& m, const std::filesystem::path& path);
Matrix read_dense(const std::filesystem::path& path);

}  // namespace termforge
