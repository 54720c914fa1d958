#include "naa/kernels.hpp"

#include <limits>

namespace naa::kernels::serial {

Vector column_sq_residuals(const Matrix& Q, const Matrix& X, const Matrix& Y) {
  const Index d = Q.rows();
  Vector r(X.cols());
  for (Index t = 0; t < X.cols(); ++t) {
    double acc = 0.0;
    for (Index i = 0; i < d; ++i) {
      double qx = 0.0;
      for (Index k = 0; k < Q.cols(); ++k) qx += Q(i, k) * X(k, t);
      const double diff = qx - Y(i, t);
      acc += diff * diff;
    }
    r(t) = acc;
  }
  return r;
}

Vector column_sq_distances(const Matrix& Y, const Vector& mu) {
  Vector r(Y.cols());
  for (Index t = 0; t < Y.cols(); ++t) {
    double acc = 0.0;
    for (Index i = 0; i < Y.rows(); ++i) {
      const double diff = Y(i, t) - mu(i);
      acc += diff * diff;
    }
    r(t) = acc;
  }
  return r;
}

Matrix weighted_cross_covariance(const Matrix& Y, const Matrix& X, const Vector& w) {
  Matrix M = Matrix::Zero(Y.rows(), X.rows());
  for (Index t = 0; t < X.cols(); ++t) {
    for (Index i = 0; i < Y.rows(); ++i) {
      const double wy = w(t) * Y(i, t);
      for (Index j = 0; j < X.rows(); ++j) M(i, j) += wy * X(j, t);
    }
  }
  return M;
}

Vector dot_scores(const Matrix& targets, const std::vector<char>& valid, const Vector& query) {
  Vector s(targets.cols());
  for (Index j = 0; j < targets.cols(); ++j) {
    if (!valid[static_cast<std::size_t>(j)]) {
      s(j) = -std::numeric_limits<double>::infinity();
      continue;
    }
    double acc = 0.0;
    for (Index i = 0; i < targets.rows(); ++i) acc += targets(i, j) * query(i);
    s(j) = acc;
  }
  return s;
}

std::vector<Index> best_match(const Matrix& targets, const std::vector<char>& valid,
                              const Matrix& queries, bool cosine) {
  std::vector<Index> out(static_cast<std::size_t>(queries.cols()), -1);
  for (Index q = 0; q < queries.cols(); ++q) {
    double best = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < targets.cols(); ++j) {
      if (!valid[static_cast<std::size_t>(j)]) continue;
      double acc = 0.0;
      for (Index i = 0; i < targets.rows(); ++i) {
        if (cosine) {
          acc += targets(i, j) * queries(i, q);
        } else {
          const double diff = targets(i, j) - queries(i, q);
          acc -= diff * diff;
        }
      }
      if (out[static_cast<std::size_t>(q)] < 0 || acc > best) {
        best = acc;
        out[static_cast<std::size_t>(q)] = j;
      }
    }
  }
  return out;
}

}  // namespace naa::kernels::serial
