#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "czsl/types.hpp"

namespace czsl {

// Streaming SHA-256 (OpenSSL-backed); used for freeze-invariance checks,
// dataset fingerprints and determinism tests.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;
  void update(const void* data, std::size_t len);
  void update(const std::string& s) { update(s.data(), s.size()); }
  void update(const Matrix& m) { update(m.data(), sizeof(Scalar) * static_cast<std::size_t>(m.size())); }
  std::string hex();  // finalizes; the object must not be reused afterwards

 private:
  void* ctx_;
};

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

// Shortest round-trip decimal form; keeps generated files byte-stable.
std::string format_double(Scalar v);

using Rng = std::mt19937_64;

Matrix gaussian_matrix(Rng& rng, Index rows, Index cols, Scalar stddev = 1.0);
Matrix glorot_uniform_matrix(Rng& rng, Index fan_in, Index fan_out);

}  // namespace czsl
