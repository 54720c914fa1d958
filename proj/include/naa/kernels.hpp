#pragma once

// Data-parallel inner loops shared by the solvers, the EM fit and retrieval.
//
// naa::kernels holds the OpenMP versions used by the library. Every output
// element is computed by the same instruction sequence whatever thread owns
// it, so results are bit-identical for any OMP_NUM_THREADS. Reductions over
// columns are left to the caller and done serially.
//
// naa::kernels::serial holds plain-loop reference versions. They are kept for
// tests and for bench_kernels, not called from library code.

#include "naa/common.hpp"

#include <utility>
#include <vector>

namespace naa::kernels {

/// r_t = ||Q x_t - y_t||^2 for every column t.
Vector column_sq_residuals(const Matrix& Q, const Matrix& X, const Matrix& Y);

/// r_t = ||y_t - mu||^2 for every column t.
Vector column_sq_distances(const Matrix& Y, const Vector& mu);

/// Y * diag(w) * X^T, the (weighted) cross-covariance fed to Procrustes.
Matrix weighted_cross_covariance(const Matrix& Y, const Matrix& X, const Vector& w);

/// Per-column inner products targets.col(j) . query. Columns flagged invalid
/// get -infinity so they never win a max.
Vector dot_scores(const Matrix& targets, const std::vector<char>& valid, const Vector& query);

/// Negative squared Euclidean distance to every valid column.
Vector neg_sq_distance_scores(const Matrix& targets, const std::vector<char>& valid,
                              const Vector& query);

/// For each query column, index of the highest-scoring valid target
/// (ties -> lowest index), or -1 when no target is valid. `cosine` selects dot
/// products on pre-normalized inputs; otherwise negative squared distance.
std::vector<Index> best_match(const Matrix& targets, const std::vector<char>& valid,
                              const Matrix& queries, bool cosine);

namespace serial {

Vector column_sq_residuals(const Matrix& Q, const Matrix& X, const Matrix& Y);
Vector column_sq_distances(const Matrix& Y, const Vector& mu);
Matrix weighted_cross_covariance(const Matrix& Y, const Matrix& X, const Vector& w);
Vector dot_scores(const Matrix& targets, const std::vector<char>& valid, const Vector& query);
std::vector<Index> best_match(const Matrix& targets, const std::vector<char>& valid,
                              const Matrix& queries, bool cosine);

}  // namespace serial

}  // namespace naa::kernels
