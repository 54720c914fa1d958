#include "naa/alignment.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace naa;
using naa::testing::random_normal;
using naa::testing::TempDir;
namespace oracle = naa::testing::oracle;

TEST_CASE("procrustes: identity and planted rotation") {
  const Matrix X = random_normal(4, 30, 1);
  const auto same = procrustes(X, X);
  CHECK(same.orthogonal);
  CHECK((same.Q - Matrix::Identity(4, 4)).norm() < 1e-12);

  const Matrix X2 = random_normal(2, 10, 2);
  const auto R = random_orthogonal(2, 99);
  const auto fit = procrustes(X2, R.Q * X2);
  CHECK((fit.Q - R.Q).norm() < 1e-10);
}

TEST_CASE("procrustes: 2-D solution matches grid search over O(2)") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix X = random_normal(2, 12, 100 + seed);
    const Matrix Y = random_orthogonal(2, 200 + seed).Q * X + 0.3 * random_normal(2, 12, 300 + seed);
    const auto fit = procrustes(X, Y);
    const double found = oracle::objective(fit.Q, X, Y);
    const double grid = oracle::grid_search_o2(X, Y, 1e-4);
    CHECK(found <= grid + 1e-12);
    CHECK(std::abs(found - grid) < 1e-6);
  }
}

TEST_CASE("procrustes: shape and finiteness errors") {
  CHECK_THROWS_AS(procrustes(Matrix::Ones(2, 3), Matrix::Ones(2, 4)), DataError);
  CHECK_THROWS_AS(procrustes(Matrix::Ones(2, 0), Matrix::Ones(2, 0)), DataError);
  Matrix bad = Matrix::Ones(2, 3);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(procrustes(bad, Matrix::Ones(2, 3)), DataError);
}

TEST_CASE("procrustes: rank-deficient input warns but stays orthogonal") {
  Matrix X = Matrix::Zero(3, 5);
  X.row(0) = random_normal(1, 5, 4);
  const auto fit = procrustes(X, X);
  CHECK(fit.warning.has_value());
  CHECK(fit.orthogonality_residual() < 1e-8);
}

TEST_CASE("weighted_procrustes reductions") {
  const Matrix X = random_normal(3, 15, 5);
  const Matrix Y = random_normal(3, 15, 6);
  const auto plain = procrustes(X, Y);
  const auto ones = weighted_procrustes(X, Y, Vector::Ones(15));
  CHECK((plain.Q - ones.Q).norm() < 1e-12);

  Vector indicator = Vector::Zero(15);
  std::vector<Index> subset{0, 2, 3, 7, 11, 14};
  for (Index t : subset) indicator(t) = 1.0;
  const auto sub = procrustes(X(Eigen::all, subset), Y(Eigen::all, subset));
  CHECK((weighted_procrustes(X, Y, indicator).Q - sub.Q).norm() < 1e-12);

  CHECK_THROWS_AS(weighted_procrustes(X, Y, Vector::Zero(15)), DataError);
  CHECK_THROWS_AS(weighted_procrustes(X, Y, Vector::Ones(14)), DataError);
}

TEST_CASE("weighted_procrustes beats 1000 random orthogonal matrices") {
  const Matrix X = random_normal(3, 20, 7);
  const Matrix Y = random_normal(3, 20, 8);
  const Vector w = (random_normal(20, 1, 9).array().abs() / 3.0).min(1.0).matrix();
  const auto fit = weighted_procrustes(X, Y, w);
  const double best = oracle::weighted_objective(fit.Q, X, Y, w);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    CHECK(best <= oracle::weighted_objective(random_orthogonal(3, 5000 + s).Q, X, Y, w) + 1e-12);
  }
}

TEST_CASE("procrustes: left-rotation equivariance") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix X = random_normal(5, 40, 10 + seed);
    const Matrix Y = random_normal(5, 40, 20 + seed);
    const auto R = random_orthogonal(5, 30 + seed);
    const auto lhs = procrustes(X, R.Q * Y);
    const auto rhs = procrustes(X, Y);
    CHECK((lhs.Q - R.Q * rhs.Q).norm() < 1e-8);
  }
}

TEST_CASE("orthogonality holds up to d = 300, n = 10000") {
  const Matrix X = random_normal(300, 2000, 41);
  const Matrix Y = random_normal(300, 2000, 42);
  CHECK(procrustes(X, Y).orthogonality_residual() <= 1e-8);
  CHECK(random_orthogonal(300, 43).orthogonality_residual() <= 1e-8);

  const Matrix Xl = random_normal(20, 10000, 44);
  const Matrix Yl = random_normal(20, 10000, 45);
  CHECK(weighted_procrustes(Xl, Yl, random_normal(10000, 1, 46).cwiseAbs()).orthogonality_residual() <= 1e-8);
}

TEST_CASE("random_orthogonal: defining property, d = 1, determinism") {
  for (Index d : {1, 2, 5, 31}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto R = random_orthogonal(d, seed);
      CHECK(R.orthogonal);
      CHECK(R.orthogonality_residual() < 1e-10);
    }
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double v = random_orthogonal(1, seed).Q(0, 0);
    CHECK((v == 1.0 || v == -1.0));
  }
  CHECK(random_orthogonal(6, 77).Q == random_orthogonal(6, 77).Q);
  CHECK_THROWS_AS(random_orthogonal(0, 1), DataError);
}

TEST_CASE("random_orthogonal: Monte-Carlo mean of Q[0,0] is ~0") {
  double sum = 0.0;
  int positive_det = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto R = random_orthogonal(3, seed);
    sum += R.Q(0, 0);
    positive_det += R.Q.determinant() > 0.0 ? 1 : 0;
  }
  CHECK(std::abs(sum / 10000.0) < 0.05);
  // Haar on O(3): both components equally likely.
  CHECK(std::abs(positive_det / 10000.0 - 0.5) < 0.03);
}

TEST_CASE("sgd_align: planted noise-free map with mini-batches") {
  const auto R = random_orthogonal(10, 3);
  const Matrix X = random_normal(10, 500, 4);
  const Matrix Y = R.Q * X;
  SgdConfig cfg;
  cfg.epochs = 200;
  const auto fit = sgd_align(X, Y, cfg);
  CHECK_FALSE(fit.orthogonal);
  CHECK((fit.Q - R.Q).norm() < 1e-3);
}

TEST_CASE("sgd_align: converges to the normal-equations solution") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Index d = 2 + static_cast<Index>(seed) * 2;
    const Matrix X = random_normal(d, 60, 50 + seed);
    const Matrix Y = random_normal(d, 60, 60 + seed);
    SgdConfig cfg;
    cfg.batch_size = 60;
    cfg.epochs = 4000;
    const auto fit = sgd_align(X, Y, cfg);
    CHECK((fit.Q - oracle::normal_equations(X, Y)).norm() < 1e-3);
  }
}

TEST_CASE("sgd_align: deterministic per seed, divergence reported") {
  const Matrix X = random_normal(4, 100, 70);
  const Matrix Y = random_normal(4, 100, 71);
  SgdConfig cfg;
  cfg.seed = 5;
  CHECK(sgd_align(X, Y, cfg).Q == sgd_align(X, Y, cfg).Q);

  cfg.learning_rate = 10.0;
  CHECK_THROWS_WITH_AS(sgd_align(X, Y, cfg), doctest::Contains("learning rate 10"), DataError);

  SgdConfig bad;
  bad.epochs = 0;
  CHECK_THROWS_AS(sgd_align(X, Y, bad), UsageError);
}

TEST_CASE("least-squares gradient matches central finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix Q = random_normal(3, 3, 80 + seed);
    const Matrix X = random_normal(3, 7, 90 + seed);
    const Matrix Y = random_normal(3, 7, 100 + seed);
    const Matrix analytic = least_squares_gradient(Q, X, Y);
    const Matrix numeric = oracle::finite_difference_gradient(Q, X, Y, 1e-5);
    CHECK((analytic - numeric).norm() / analytic.norm() < 1e-4);
  }
}

TEST_CASE("alignment_error") {
  const Matrix X = random_normal(4, 9, 110);
  const auto R = random_orthogonal(4, 111);
  CHECK(alignment_error(R.Q, X, R.Q * X) < 1e-24);

  Matrix x(2, 1), y(2, 1);
  x << 1, 0;
  y << 0, 1;
  CHECK(alignment_error(Matrix::Identity(2, 2), x, y) == doctest::Approx(2.0));

  const Matrix Y = random_normal(4, 9, 112);
  const Matrix Q = random_normal(4, 4, 113);
  CHECK(alignment_error(Q, X, Y) == doctest::Approx(oracle::naive_error(Q, X, Y)).epsilon(1e-12));

  const std::vector<Index> a{0, 3, 4};
  const std::vector<Index> b{1, 2, 5, 6, 7, 8};
  CHECK(alignment_error(Q, X, Y, a) + alignment_error(Q, X, Y, b) ==
        doctest::Approx(alignment_error(Q, X, Y)).epsilon(1e-12));
  CHECK_THROWS_AS(alignment_error(Q, X, Y, std::vector<Index>{}), DataError);
}

TEST_CASE("translation matrix text round trip") {
  TempDir dir("tm");
  const auto R = random_orthogonal(7, 120);
  save_translation_matrix(dir.path() / "q.txt", R);
  const auto back = load_translation_matrix(dir.path() / "q.txt");
  CHECK(back.Q == R.Q);
  CHECK(back.orthogonal);
  const auto first_line = naa::testing::read_file(dir.path() / "q.txt").substr(0, 2);
  CHECK(first_line == "7\n");
  CHECK_THROWS_AS(load_translation_matrix(dir.write("bad.txt", "2\n1 0\n")), FormatError);
}
