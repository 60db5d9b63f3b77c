#include "czsl/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace czsl {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner extents differ: " + shape_str(a) + " * " +
                         shape_str(b));
  }
  return a * b;
}

Matrix l2_normalize_rows(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    const Scalar norm = a.row(r).norm();
    if (norm <= kNormEps) {
      throw DegenerateVectorError("l2_normalize_rows: row " + std::to_string(r) +
                                  " has norm " + std::to_string(norm));
    }
    out.row(r) = a.row(r) / norm;
  }
  return out;
}

Matrix row_softmax(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    const Scalar m = a.row(r).maxCoeff();
    Eigen::RowVectorXd e = (a.row(r).array() - m).exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

Matrix finite_difference_gradient(const std::function<Scalar(const Matrix&)>& f,
                                  const Matrix& x, Scalar h) {
  Matrix grad = Matrix::Zero(x.rows(), x.cols());
  Matrix probe = x;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      const Scalar orig = probe(r, c);
      probe(r, c) = orig + h;
      const Scalar up = f(probe);
      probe(r, c) = orig - h;
      const Scalar down = f(probe);
      probe(r, c) = orig;
      grad(r, c) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

Scalar max_relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_relative_error: " + shape_str(a) + " vs " + shape_str(b));
  }
  Scalar worst = 0.0;
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) {
      const Scalar denom =
          std::max({Scalar(1), std::abs(a(r, c)), std::abs(b(r, c))});
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)) / denom);
    }
  }
  return worst;
}

}  // namespace czsl
