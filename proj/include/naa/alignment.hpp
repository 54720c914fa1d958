#pragma once

#include "naa/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace naa {

/// A d x d map y ~ Q x. `orthogonal` is set only by the solvers that
/// guarantee Q^T Q = I.
struct TranslationMatrix {
  Matrix Q;
  bool orthogonal = false;
  std::optional<std::string> warning;

  Index dim() const { return Q.rows(); }
  /// ||Q^T Q - I||_F
  double orthogonality_residual() const;
};

struct SgdConfig {
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Orthogonal Procrustes: Q = U V^T where U S V^T is the SVD of Y X^T.
/// Reflections are allowed (no determinant correction).
TranslationMatrix procrustes(const Matrix& X, const Matrix& Y);

/// Procrustes on the weighted cross-covariance Y diag(w) X^T; minimizes
/// sum_t w_t ||Q x_t - y_t||^2 over orthogonal Q.
TranslationMatrix weighted_procrustes(const Matrix& X, const Matrix& Y, const Vector& w);

/// Unconstrained least squares min ||QX - Y||_F^2 by shuffled mini-batch SGD
/// starting from Q = 0. A batch_size >= n gives full-batch gradient descent.
TranslationMatrix sgd_align(const Matrix& X, const Matrix& Y, const SgdConfig& config = {});

/// Gradient of ||QX - Y||_F^2 with respect to Q: 2 (QX - Y) X^T.
Matrix least_squares_gradient(const Matrix& Q, const Matrix& X, const Matrix& Y);

/// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with
/// the columns of Q sign-corrected by sign(diag R).
TranslationMatrix random_orthogonal(Index d, std::uint64_t seed);

/// sum_t ||Q x_t - y_t||^2 over all columns.
double alignment_error(const Matrix& Q, const Matrix& X, const Matrix& Y);
/// Same sum restricted to `columns`; throws DataError on an empty mask.
double alignment_error(const Matrix& Q, const Matrix& X, const Matrix& Y,
                       std::span<const Index> columns);

std::vector<Index> mask_to_columns(const std::vector<bool>& mask);

/// Text format: first line d, then d rows of d reals (17 significant digits).
void save_translation_matrix(const std::filesystem::path& path, const TranslationMatrix& tm);
TranslationMatrix load_translation_matrix(const std::filesystem::path& path);

namespace detail {
void check_same_shape(const Matrix& X, const Matrix& Y, const char* who);
void write_square_block(std::ostream& out, const Matrix& Q);
Matrix read_square_block(std::istream& in, const std::string& origin);
}  // namespace detail

}  // namespace naa
