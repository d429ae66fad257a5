#pragma once

// Numeric inner loops shared by the encoders, clusterers and indices.
//
// Every kernel exists twice: `serial::` is the plain reference loop and
// `omp::` the OpenMP version. The OpenMP versions split work by output element
// only and keep each element's reduction order identical to the serial loop,
// so both produce bitwise-identical results for any thread count. Tests hold
// them to that; bench/ compares their speed.

#include <cstddef>
#include <vector>

#include "termforge/matrix.hpp"

namespace termforge::kernels {

// Worker threads for parallel regions: TERMFORGE_THREADS if set and positive,
// otherwise the OpenMP default. set_thread_limit(n > 0) overrides both.
int thread_count();
void set_thread_limit(int n);

struct Assignment {
  std::vector<std::size_t> cluster;  // nearest centroid per row
  std::vector<double> dissimilarity; // cosine dissimilarity to that centroid
};

namespace serial {

// n x n matrix of 1 - cos(x_i, x_j), clamped to [0, 2], zero diagonal.
// Rows must be nonzero.
Matrix pairwise_cosine_dissimilarity(const Matrix& x);

Matrix gemm_nn(const Matrix& a, const Matrix& b);  // A B
Matrix gemm_tn(const Matrix& a, const Matrix& b);  // A^T B
Matrix gemm_nt(const Matrix& a, const Matrix& b);  // A B^T

// Damped affinity-propagation message updates, in place.
void ap_responsibilities(const Matrix& s, const Matrix& a, Matrix& r, double damping);
void ap_availabilities(const Matrix& r, Matrix& a, double damping);

// Rows of `x` and `centroids` must be unit length. Ties go to the lowest id.
Assignment nearest_centroid(const Matrix& x, const Matrix& centroids);

}  // namespace serial

namespace omp {

Matrix pairwise_cosine_dissimilarity(const Matrix& x);
Matrix gemm_nn(const Matrix& a, const Matrix& b);
Matrix gemm_tn(const Matrix& a, const Matrix& b);
Matrix gemm_nt(const Matrix& a, const Matrix& b);
void ap_responsibilities(const Matrix& s, const Matrix& a, Matrix& r, double damping);
void ap_availabilities(const Matrix& r, Matrix& a, double damping);
Assignment nearest_centroid(const Matrix& x, const Matrix& centroids);

}  // namespace omp

}  // namespace termforge::kernels
