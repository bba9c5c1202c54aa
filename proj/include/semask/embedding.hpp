#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace semask {

/// Fixed-dimension float vector that is either unit-norm or all zeros.
/// Normalisation happens once, at construction, so cosine is a dot product.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  /// L2-normalises `values`; an all-zero input stays all zeros.
  static EmbeddingVector normalized(std::vector<float> values);

  /// Adopts values that are already unit-norm (or zero); throws otherwise.
  static EmbeddingVector from_unit(std::vector<float> values);

  static EmbeddingVector zeros(std::size_t dim) { return EmbeddingVector(std::vector<float>(dim, 0.0f)); }

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  bool is_zero() const noexcept;
  double norm() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  explicit EmbeddingVector(std::vector<float> v) : values_(std::move(v)) {}
  std::vector<float> values_;
};

/// Plain dot product; equals cosine similarity for unit vectors.
float dot(std::span<const float> a, std::span<const float> b) noexcept;

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("embedding dimension mismatch");
  return dot(a.values(), b.values());
}

}  // namespace semask
