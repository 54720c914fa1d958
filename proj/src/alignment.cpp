#include "naa/alignment.hpp"

#include "naa/kernels.hpp"
#include "naa/text_format.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace naa {

namespace detail {

void check_same_shape(const Matrix& X, const Matrix& Y, const char* who) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    std::ostringstream msg;
    msg << who << ": shape mismatch X " << X.rows() << "x" << X.cols() << " vs Y " << Y.rows()
        << "x" << Y.cols();
    throw DataError(msg.str());
  }
  if (X.cols() < 1) throw DataError(std::string(who) + ": no columns");
  if (!X.allFinite() || !Y.allFinite()) throw DataError(std::string(who) + ": non-finite input");
}

void write_square_block(std::ostream& out, const Matrix& Q) {
  out << Q.rows() << '\n';
  for (Index i = 0; i < Q.rows(); ++i) {
    for (Index j = 0; j < Q.cols(); ++j) {
      if (j) out << ' ';
      out << text::format_real(Q(i, j));
    }
    out << '\n';
  }
}

Matrix read_square_block(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(origin + ": missing dimension line");
  const auto d = text::parse_integer(text::trim(line));
  if (!d || *d < 1) throw FormatError(origin + ": bad dimension line");
  Matrix Q(*d, *d);
  for (Index i = 0; i < *d; ++i) {
    if (!std::getline(in, line)) throw FormatError(origin + ": truncated matrix");
    const auto fields = text::split_whitespace(line);
    if (static_cast<Index>(fields.size()) != *d) {
      throw FormatError(origin + ": row " + std::to_string(i) + " has wrong width");
    }
    for (Index j = 0; j < *d; ++j) {
      const auto v = text::parse_real(fields[static_cast<std::size_t>(j)]);
      if (!v || !std::isfinite(*v)) throw FormatError(origin + ": bad matrix entry");
      Q(i, j) = *v;
    }
  }
  return Q;
}

}  // namespace detail

namespace {

TranslationMatrix procrustes_from_covariance(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  TranslationMatrix tm{svd.matrixU() * svd.matrixV().transpose(), true, std::nullopt};
  const auto& s = svd.singularValues();
  if (s.size() > 0 && s.minCoeff() < 1e-12 * s.maxCoeff()) {
    tm.warning = "rank-deficient cross-covariance; Procrustes solution is not unique";
  }
  return tm;
}

}  // namespace

double TranslationMatrix::orthogonality_residual() const {
  return (Q.transpose() * Q - Matrix::Identity(Q.cols(), Q.cols())).norm();
}

void SgdConfig::validate() const {
  if (!(learning_rate > 0.0) || epochs < 1 || batch_size < 1) {
    throw UsageError("SGD config: learning rate, epochs and batch size must be positive");
  }
}

TranslationMatrix procrustes(const Matrix& X, const Matrix& Y) {
  detail::check_same_shape(X, Y, "procrustes");
  return procrustes_from_covariance(kernels::weighted_cross_covariance(Y, X, Vector::Ones(X.cols())));
}

TranslationMatrix weighted_procrustes(const Matrix& X, const Matrix& Y, const Vector& w) {
  detail::check_same_shape(X, Y, "weighted_procrustes");
  if (w.size() != X.cols()) throw DataError("weighted_procrustes: weight vector length mismatch");
  if (!w.allFinite() || (w.array() < 0.0).any()) {
    throw DataError("weighted_procrustes: weights must be finite and non-negative");
  }
  if (!(w.sum() > 0.0)) throw DataError("weighted_procrustes: all-zero weights");
  return procrustes_from_covariance(kernels::weighted_cross_covariance(Y, X, w));
}

Matrix least_squares_gradient(const Matrix& Q, const Matrix& X, const Matrix& Y) {
  return 2.0 * (Q * X - Y) * X.transpose();
}

TranslationMatrix sgd_align(const Matrix& X, const Matrix& Y, const SgdConfig& config) {
  detail::check_same_shape(X, Y, "sgd_align");
  config.validate();

  const Index d = X.rows();
  const Index n = X.cols();
  Matrix Q = Matrix::Zero(d, d);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(config.seed);
  const Index batch = std::min<Index>(config.batch_size, n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < n) std::shuffle(order.begin(), order.end(), rng);
    for (Index start = 0; start < n; start += batch) {
      const Index width = std::min(batch, n - start);
      const std::span<const Index> idx(order.data() + start, static_cast<std::size_t>(width));
      const Matrix Xb = X(Eigen::all, idx);
      const Matrix Yb = Y(Eigen::all, idx);
      Q -= config.learning_rate * least_squares_gradient(Q, Xb, Yb);
    }
    if (!std::isfinite(alignment_error(Q, X, Y))) {
      throw DataError("SGD diverged at epoch " + std::to_string(epoch + 1) +
                      " with learning rate " + text::format_real(config.learning_rate) +
                      "; lower --lr");
    }
  }
  return TranslationMatrix{std::move(Q), false, std::nullopt};
}

TranslationMatrix random_orthogonal(Index d, std::uint64_t seed) {
  if (d < 1) throw DataError("random_orthogonal: dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) G(i, j) = normal(rng);

  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix& R = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  }
  return TranslationMatrix{std::move(Q), true, std::nullopt};
}

double alignment_error(const Matrix& Q, const Matrix& X, const Matrix& Y) {
  if (Q.rows() != Y.rows() || Q.cols() != X.rows() || X.cols() != Y.cols()) {
    throw DataError("alignment_error: shape mismatch");
  }
  return kernels::column_sq_residuals(Q, X, Y).sum();
}

double alignment_error(const Matrix& Q, const Matrix& X, const Matrix& Y,
                       std::span<const Index> columns) {
  if (columns.empty()) throw DataError("alignment_error: empty mask");
  if (Q.rows() != Y.rows() || Q.cols() != X.rows() || X.cols() != Y.cols()) {
    throw DataError("alignment_error: shape mismatch");
  }
  const Matrix Xs = X(Eigen::all, columns);
  const Matrix Ys = Y(Eigen::all, columns);
  return kernels::column_sq_residuals(Q, Xs, Ys).sum();
}

std::vector<Index> mask_to_columns(const std::vector<bool>& mask) {
  std::vector<Index> cols;
  for (std::size_t t = 0; t < mask.size(); ++t)
    if (mask[t]) cols.push_back(static_cast<Index>(t));
  return cols;
}

void save_translation_matrix(const std::filesystem::path& path, const TranslationMatrix& tm) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  detail::write_square_block(out, tm.Q);
  if (!out) throw DataError("write failed: " + path.string());
}

TranslationMatrix load_translation_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path.string());
  TranslationMatrix tm{detail::read_square_block(in, path.string()), false, std::nullopt};
  tm.orthogonal = tm.orthogonality_residual() <= 1e-8;
  return tm;
}

}  // namespace naa
