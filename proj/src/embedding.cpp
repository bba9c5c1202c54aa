#include "semask/embedding.hpp"

#include <cmath>

namespace semask {

EmbeddingVector EmbeddingVector::normalized(std::vector<float> values) {
  double sq = 0.0;
  for (float v : values) sq += static_cast<double>(v) * v;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (float& v : values) v = static_cast<float>(v * inv);
  }
  return EmbeddingVector(std::move(values));
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<float> values) {
  EmbeddingVector e(std::move(values));
  const double n = e.norm();
  if (n != 0.0 && std::abs(n - 1.0) > 1e-6) {
    throw std::invalid_argument("embedding is neither unit-norm nor zero");
  }
  return e;
}

bool EmbeddingVector::is_zero() const noexcept {
  for (float v : values_) {
    if (v != 0.0f) return false;
  }
  return true;
}

double EmbeddingVector::norm() const noexcept {
  double sq = 0.0;
  for (float v : values_) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

float dot(std::span<const float> a, std::span<const float> b) noexcept {
  // Eight independent partial sums in a fixed order: vectorisable and
  // bit-reproducible.
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  float tail = 0.0f;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

}  // namespace semask
