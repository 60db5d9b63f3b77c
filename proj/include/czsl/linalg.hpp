#pragma once

#include <functional>

#include "czsl/types.hpp"

namespace czsl {

inline constexpr Scalar kNormEps = 1e-12;

// Checked matrix product. Eigen would assert on a shape mismatch; callers get
// an exception naming both operand shapes instead.
Matrix matmul(const Matrix& a, const Matrix& b);

// Rescales every row to unit Euclidean norm. Rows with norm <= kNormEps are
// rejected rather than clamped.
Matrix l2_normalize_rows(const Matrix& a);

// Numerically stable softmax applied to each row independently.
Matrix row_softmax(const Matrix& a);

// Central-difference gradient estimate of f at x, one coordinate at a time:
// (f(x + h e_i) - f(x - h e_i)) / (2h).
Matrix finite_difference_gradient(const std::function<Scalar(const Matrix&)>& f,
                                  const Matrix& x, Scalar h = 1e-5);

// max |a-b| scaled by max(1, |a|, |b|); used by gradient-agreement tests.
Scalar max_relative_error(const Matrix& a, const Matrix& b);

}  // namespace czsl
