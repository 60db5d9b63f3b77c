#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace czsl {

using Scalar = double;
using Index = Eigen::Index;

// Row-major so that serialized buffers match the on-disk layout directly.
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateVectorError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Violated call contract (non-scalar loss, label outside the seen set, ...).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VocabularyError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace czsl
