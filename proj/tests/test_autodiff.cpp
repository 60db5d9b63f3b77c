#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "czsl/autodiff.hpp"
#include "czsl/linalg.hpp"

using namespace czsl;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, Scalar scale = 1.0) {
  std::normal_distribution<Scalar> dist(0.0, scale);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

// Triple-loop product, kept deliberately independent of Eigen's kernels.
Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      for (Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

// Checks d(weighted sum of op(x)) / dx against central differences, where the
// weights make the seeded adjoint generic.
void gradcheck_unary(const std::function<Var(Tape&, Var)>& op, const Matrix& x,
                     std::mt19937_64& rng, Scalar tol = 1e-4) {
  Tape probe_tape;
  Var probe = op(probe_tape, probe_tape.leaf(x, true));
  const Matrix weights = random_matrix(rng, probe.rows(), probe.cols());

  auto scalar_loss = [&](const Matrix& input) {
    Tape t;
    Var in = t.leaf(input, true);
    Var out = op(t, in);
    return t.sum(t.hadamard(out, t.constant(weights))).value()(0, 0);
  };

  Tape t;
  Var in = t.leaf(x, true);
  Var out = op(t, in);
  Var loss = t.sum(t.hadamard(out, t.constant(weights)));
  GradientMap grads = t.backward(loss);
  const Matrix analytic = grads.at(in.id());
  const Matrix numeric = finite_difference_gradient(scalar_loss, x, 1e-5);
  CHECK(max_relative_error(analytic, numeric) <= tol);
}

}  // namespace

TEST_CASE("matmul identity and analytic cases") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(matmul(a, Matrix::Identity(2, 2)) == a);

  Matrix row(1, 2), col(2, 1);
  row << 1, 2;
  col << 3, 4;
  Matrix prod = matmul(row, col);
  CHECK(prod.rows() == 1);
  CHECK(prod.cols() == 1);
  CHECK(prod(0, 0) == 11.0);
}

TEST_CASE("matmul matches triple-loop oracle") {
  std::mt19937_64 rng(12);
  const Matrix a = random_matrix(rng, 5, 4);
  const Matrix b = random_matrix(rng, 4, 3);
  const Matrix expect = naive_matmul(a, b);
  const Matrix got = matmul(a, b);
  CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
  const Matrix a = Matrix::Zero(2, 3);
  const Matrix b = Matrix::Zero(4, 2);
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), DimensionError);
  try {
    matmul(a, b);
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("4x2") != std::string::npos);
  }
}

TEST_CASE("matmul associativity on random conformable triples") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<Index> d(1, 6);
    const Matrix a = random_matrix(rng, d(rng), d(rng));
    const Matrix b = random_matrix(rng, a.cols(), d(rng));
    const Matrix c = random_matrix(rng, b.cols(), d(rng));
    const Matrix lhs = matmul(matmul(a, b), c);
    const Matrix rhs = matmul(a, matmul(b, c));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("l2_normalize_rows basics") {
  Matrix m(1, 2);
  m << 3, 4;
  Matrix n = l2_normalize_rows(m);
  CHECK(n(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(n(0, 1) == doctest::Approx(0.8).epsilon(1e-12));

  // Unit rows are fixed points.
  CHECK((l2_normalize_rows(n) - n).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix z = Matrix::Zero(1, 3);
  CHECK_THROWS_AS(l2_normalize_rows(z), DegenerateVectorError);
}

TEST_CASE("l2_normalize_rows norm and idempotence properties") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix x = random_matrix(rng, 4, 6);
    const Matrix y = l2_normalize_rows(x);
    for (Index r = 0; r < y.rows(); ++r) {
      CHECK(std::abs(y.row(r).norm() - 1.0) <= 1e-10);
    }
    CHECK((l2_normalize_rows(y) - y).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("backward on linear and quadratic losses") {
  {
    Tape t;
    Var x = t.leaf(Matrix::Constant(1, 3, 2.5), true);
    GradientMap g = t.backward(t.sum(x));
    CHECK((g.at(x.id()) - Matrix::Ones(1, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  {
    Tape t;
    Matrix x0(1, 2);
    x0 << 1, -2;
    Var x = t.leaf(x0, true);
    GradientMap g = t.backward(t.sum_squares(x));
    Matrix expect(1, 2);
    expect << 2, -4;
    CHECK((g.at(x.id()) - expect).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  Var x = t.leaf(Matrix::Ones(2, 2), true);
  CHECK_THROWS_AS(t.backward(x), ContractError);
}

TEST_CASE("frozen leaves receive no gradient entry") {
  Tape t;
  Var a = t.leaf(Matrix::Ones(1, 2), true);
  Var b = t.leaf(Matrix::Ones(1, 2), false);
  GradientMap g = t.backward(t.sum(t.add(a, b)));
  CHECK(g.size() == 1);
  CHECK(g.count(a.id()) == 1);
  CHECK(g.count(b.id()) == 0);
}

TEST_CASE("trainable leaf off the loss path gets a zero gradient of its shape") {
  Tape t;
  Var a = t.leaf(Matrix::Ones(1, 2), true);
  Var unused = t.leaf(Matrix::Ones(3, 4), true);
  GradientMap g = t.backward(t.sum(a));
  CHECK(g.at(unused.id()).rows() == 3);
  CHECK(g.at(unused.id()).cols() == 4);
  CHECK(g.at(unused.id()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite differences on analytic functions") {
  auto square = [](const Matrix& m) { return m(0, 0) * m(0, 0); };
  Matrix x(1, 1);
  x << 3.0;
  Matrix g = finite_difference_gradient(square, x, 1e-5);
  CHECK(std::abs(g(0, 0) - 6.0) <= 1e-6);

  auto constant = [](const Matrix&) { return 42.0; };
  Matrix gz = finite_difference_gradient(constant, Matrix::Ones(2, 3), 1e-5);
  CHECK(gz.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("softmax cross entropy agrees with finite differences") {
  std::mt19937_64 rng(5);
  const Matrix logits = random_matrix(rng, 1, 3);
  const std::vector<int> target{1};

  auto f = [&](const Matrix& z) {
    Tape t;
    return t.softmax_cross_entropy(t.leaf(z, true), target).value()(0, 0);
  };

  Tape t;
  Var z = t.leaf(logits, true);
  GradientMap g = t.backward(t.softmax_cross_entropy(z, target));
  const Matrix numeric = finite_difference_gradient(f, logits, 1e-5);
  CHECK(max_relative_error(g.at(z.id()), numeric) <= 1e-5);
}

TEST_CASE("every differentiable op agrees with finite differences on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<Index> d(1, 5);

  // 100 instances spread over the op set, as the numerics contract demands.
  for (int trial = 0; trial < 10; ++trial) {
    const Index r = d(rng), c = d(rng);
    const Matrix x = random_matrix(rng, r, c);
    const Matrix other = random_matrix(rng, r, c);
    const Matrix rhs = random_matrix(rng, c, d(rng));

    gradcheck_unary([&](Tape& t, Var v) { return t.matmul(v, t.constant(rhs)); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.add(v, t.constant(other)); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.subtract(t.constant(other), v); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.hadamard(v, t.constant(other)); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.scale(v, -1.7); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.transpose(v); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.row_softmax(v); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.layer_norm_rows(v); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.sum_squares(v); }, x, rng);
    // relu: nudge away from the kink so finite differences stay valid.
    Matrix away = x;
    for (Index i = 0; i < away.rows(); ++i)
      for (Index j = 0; j < away.cols(); ++j)
        if (std::abs(away(i, j)) < 1e-3) away(i, j) = 0.1;
    gradcheck_unary([&](Tape& t, Var v) { return t.relu(v); }, away, rng);
  }

  // Shape-changing ops on fixed-size inputs.
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix x = random_matrix(rng, 5, 4);
    gradcheck_unary([&](Tape& t, Var v) { return t.slice_rows(v, 1, 3); }, x, rng);
    gradcheck_unary([&](Tape& t, Var v) { return t.slice_cols(v, 0, 2); }, x, rng);
    gradcheck_unary(
        [&](Tape& t, Var v) {
          return t.concat_rows({v, t.constant(Matrix::Ones(2, 4)), v});
        },
        x, rng);
    gradcheck_unary(
        [&](Tape& t, Var v) {
          return t.concat_cols({t.constant(Matrix::Ones(5, 2)), v});
        },
        x, rng);
    Matrix safe = x;
    safe.array() += 3.0;  // keep rows away from the degenerate-norm region
    gradcheck_unary([&](Tape& t, Var v) { return t.l2_normalize_rows(v); }, safe, rng);
    const std::vector<int> targets{0, 2, 1, 3, 0};
    gradcheck_unary(
        [&](Tape& t, Var v) {
          // embed in a longer chain so the fused op sees a non-trivial adjoint
          return t.softmax_cross_entropy(t.scale(v, 2.0), targets);
        },
        x, rng);
  }
}

TEST_CASE("chained ops propagate through deep compositions") {
  std::mt19937_64 rng(123);
  const Matrix x = random_matrix(rng, 3, 4);
  const Matrix w1 = random_matrix(rng, 4, 4);
  const Matrix w2 = random_matrix(rng, 4, 2);

  auto build = [&](Tape& t, Var v) {
    Var h = t.relu(t.matmul(v, t.constant(w1)));
    Var n = t.layer_norm_rows(h);
    return t.l2_normalize_rows(t.matmul(n, t.constant(w2)));
  };
  gradcheck_unary(build, x, rng);
}
