#pragma once

// Independent reference computations used to freeze expected values. None of
// these call into the library code paths they check.

#include "naa/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace naa::testing::oracle {

inline double naive_error(const Matrix& Q, const Matrix& X, const Matrix& Y) {
  double total = 0.0;
  for (Index t = 0; t < X.cols(); ++t) {
    for (Index i = 0; i < Q.rows(); ++i) {
      double qx = 0.0;
      for (Index k = 0; k < Q.cols(); ++k) qx += Q(i, k) * X(k, t);
      total += (qx - Y(i, t)) * (qx - Y(i, t));
    }
  }
  return total;
}

inline double objective(const Matrix& Q, const Matrix& X, const Matrix& Y) {
  return naive_error(Q, X, Y);
}

inline double weighted_objective(const Matrix& Q, const Matrix& X, const Matrix& Y, const Vector& w) {
  double total = 0.0;
  for (Index t = 0; t < X.cols(); ++t) total += w(t) * (Q * X.col(t) - Y.col(t)).squaredNorm();
  return total;
}

/// Minimum of ||QX - Y||^2 over rotations and reflections of the plane,
/// scanning the angle on a uniform grid.
inline double grid_search_o2(const Matrix& X, const Matrix& Y, double step) {
  double best = std::numeric_limits<double>::infinity();
  for (double theta = 0.0; theta < 2.0 * std::numbers::pi; theta += step) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Matrix rot(2, 2), ref(2, 2);
    rot << c, -s, s, c;
    ref << c, s, s, -c;
    best = std::min({best, objective(rot, X, Y), objective(ref, X, Y)});
  }
  return best;
}

/// Closed-form unconstrained least squares Y X^T (X X^T)^{-1}.
inline Matrix normal_equations(const Matrix& X, const Matrix& Y) {
  const Matrix gram = X * X.transpose();
  return (Y * X.transpose()) * gram.inverse();
}

inline Matrix finite_difference_gradient(const Matrix& Q, const Matrix& X, const Matrix& Y, double h) {
  Matrix G(Q.rows(), Q.cols());
  for (Index i = 0; i < Q.rows(); ++i) {
    for (Index j = 0; j < Q.cols(); ++j) {
      Matrix plus = Q, minus = Q;
      plus(i, j) += h;
      minus(i, j) -= h;
      G(i, j) = (objective(plus, X, Y) - objective(minus, X, Y)) / (2.0 * h);
    }
  }
  return G;
}

inline double cosine(const Vector& a, const Vector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    dot += a(i) * b(i);
    na += a(i) * a(i);
    nb += b(i) * b(i);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Full sort of every target by cosine to q (descending, ties by index).
inline std::vector<std::pair<Index, double>> sorted_by_cosine(const Matrix& targets, const Vector& q) {
  std::vector<std::pair<Index, double>> all;
  for (Index j = 0; j < targets.cols(); ++j) {
    if (targets.col(j).squaredNorm() == 0.0) continue;
    all.emplace_back(j, cosine(targets.col(j), q));
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return all;
}

}  // namespace naa::testing::oracle
