#include "naa/kernels.hpp"

#include <algorithm>
#include <limits>

namespace naa::kernels {

namespace {
// Fixed column chunk: the GEMM shape (and so its rounding) for a given column
// never depends on how many threads are running.
constexpr Index kChunk = 128;
}  // namespace

Vector column_sq_residuals(const Matrix& Q, const Matrix& X, const Matrix& Y) {
  const Index n = X.cols();
  const Index chunks = (n + kChunk - 1) / kChunk;
  Vector r(n);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kChunk;
    const Index width = std::min(kChunk, n - begin);
    Matrix diff = Q * X.middleCols(begin, width);
    diff -= Y.middleCols(begin, width);
    r.segment(begin, width) = diff.colwise().squaredNorm().transpose();
  }
  return r;
}

Vector column_sq_distances(const Matrix& Y, const Vector& mu) {
  Vector r(Y.cols());
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < Y.cols(); ++t) r(t) = (Y.col(t) - mu).squaredNorm();
  return r;
}

Matrix weighted_cross_covariance(const Matrix& Y, const Matrix& X, const Vector& w) {
  Matrix M(Y.rows(), X.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < Y.rows(); ++i) {
    const Eigen::RowVectorXd wy = Y.row(i).cwiseProduct(w.transpose());
    M.row(i).noalias() = wy * X.transpose();
  }
  return M;
}

Vector dot_scores(const Matrix& targets, const std::vector<char>& valid, const Vector& query) {
  Vector s(targets.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < targets.cols(); ++j) {
    s(j) = valid[static_cast<std::size_t>(j)] ? targets.col(j).dot(query)
                                              : -std::numeric_limits<double>::infinity();
  }
  return s;
}

Vector neg_sq_distance_scores(const Matrix& targets, const std::vector<char>& valid,
                              const Vector& query) {
  Vector s(targets.cols());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < targets.cols(); ++j) {
    s(j) = valid[static_cast<std::size_t>(j)] ? -(targets.col(j) - query).squaredNorm()
                                              : -std::numeric_limits<double>::infinity();
  }
  return s;
}

std::vector<Index> best_match(const Matrix& targets, const std::vector<char>& valid,
                              const Matrix& queries, bool cosine) {
  std::vector<Index> out(static_cast<std::size_t>(queries.cols()), -1);
#pragma omp parallel for schedule(dynamic, 16)
  for (Index q = 0; q < queries.cols(); ++q) {
    double best = -std::numeric_limits<double>::infinity();
    Index arg = -1;
    for (Index j = 0; j < targets.cols(); ++j) {
      if (!valid[static_cast<std::size_t>(j)]) continue;
      const double s = cosine ? targets.col(j).dot(queries.col(q))
                              : -(targets.col(j) - queries.col(q)).squaredNorm();
      if (arg < 0 || s > best) {
        best = s;
        arg = j;
      }
    }
    out[static_cast<std::size_t>(q)] = arg;
  }
  return out;
}

}  // namespace naa::kernels
