#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semask/embedding.hpp"
#include "semask/rng.hpp"

namespace semask {

struct HnswParams {
  std::size_t M = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 128;
  /// Level multiplier; 0 selects 1/ln(M).
  double level_mult = 0.0;
  std::uint64_t rng_seed = 42;
  /// Filtered searches whose allowed set is smaller than this scan exactly.
  std::size_t exact_scan_threshold = 1000;

  void validate() const;
  double effective_level_mult() const;
};

struct ScoredHit {
  std::string id;
  double similarity = 0.0;

  friend bool operator==(const ScoredHit&, const ScoredHit&) = default;
};

/// Orders hits by similarity descending, then id ascending.
bool hit_before(const ScoredHit& a, const ScoredHit& b) noexcept;

using IdPredicate = std::function<bool(std::string_view)>;

/// Hierarchical navigable small-world graph over unit vectors, scored by
/// cosine (dot product). Build-then-query: insertions are single-writer and
/// must not overlap with searches; const searches may run concurrently.
class HnswIndex {
 public:
  explicit HnswIndex(std::size_t dim, HnswParams params = {});

  /// Throws std::invalid_argument on dimension mismatch or duplicate id.
  void insert(std::string id, const EmbeddingVector& vector);

  /// Up to k approximately nearest ids. Scans exactly when the candidate set
  /// is below params().exact_scan_threshold, when k covers it, or for a zero
  /// query.
  std::vector<ScoredHit> knn(const EmbeddingVector& query, std::size_t k) const;
  std::vector<ScoredHit> knn(const EmbeddingVector& query, std::size_t k, const IdPredicate& allow) const;
  /// Restricts the search to the given ids; unknown ids are ignored.
  std::vector<ScoredHit> knn_within(const EmbeddingVector& query, std::size_t k,
                                    std::span<const std::string> allowed_ids) const;

  /// Exact top-k over the allowed ids (all ids when `allow` is empty).
  std::vector<ScoredHit> brute_force_knn(const EmbeddingVector& query, std::size_t k,
                                         const IdPredicate& allow = {}) const;

  /// Graph traversal only, never the exact fallback.
  std::vector<ScoredHit> search_graph(const EmbeddingVector& query, std::size_t k,
                                      const IdPredicate& allow = {}) const;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const HnswParams& params() const noexcept { return params_; }
  bool contains(std::string_view id) const;

  /// Every node reachable from the entry point over layer-0 edges.
  bool layer0_connected() const;
  /// Highest layer in the graph, -1 when empty.
  int max_level() const noexcept { return max_level_; }
  /// Layer-0 out-degree of each node, in insertion order.
  std::vector<std::size_t> layer0_degrees() const;

  /// Binary snapshot; layout documented in docs/formats.md.
  void save(const std::filesystem::path& path) const;
  static HnswIndex load(const std::filesystem::path& path);

 private:
  using Mask = std::vector<char>;
  struct Neighbor {
    float dist;
    std::uint32_t node;
  };

  std::span<const float> vec(std::uint32_t node) const {
    return {data_.data() + static_cast<std::size_t>(node) * dim_, dim_};
  }
  float distance(std::span<const float> q, std::uint32_t node) const { return 1.0f - dot(q, vec(node)); }
  std::size_t max_links(int level) const { return level == 0 ? 2 * params_.M : params_.M; }

  int draw_level();
  std::uint32_t greedy_descend(std::span<const float> q, std::uint32_t entry, int from_level, int to_level) const;
  std::vector<Neighbor> search_layer(std::span<const float> q, std::uint32_t entry, std::size_t ef, int level,
                                     const Mask* allowed, std::vector<std::uint32_t>& visited,
                                     std::uint32_t& epoch) const;
  std::vector<std::uint32_t> select_neighbors(std::vector<Neighbor> candidates, std::size_t m) const;
  void link(std::uint32_t from, std::uint32_t to, int level);

  std::vector<ScoredHit> exact_scan(std::span<const float> q, std::size_t k, const Mask* allowed) const;
  std::vector<ScoredHit> graph_knn(std::span<const float> q, std::size_t k, const Mask* allowed,
                                   std::size_t allowed_count) const;
  std::vector<ScoredHit> dispatch(const EmbeddingVector& query, std::size_t k, const Mask* allowed,
                                  std::size_t allowed_count) const;
  std::vector<ScoredHit> finish(std::vector<ScoredHit> hits, std::size_t k) const;
  void check_query(const EmbeddingVector& query) const;

  std::size_t dim_;
  HnswParams params_;
  SeededRng rng_;
  std::vector<float> data_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_of_;
  std::vector<int> levels_;
  // links_[node][level] -> neighbor nodes
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::int64_t entry_ = -1;
  int max_level_ = -1;

  // Construction-only scratch; guarded by the single-writer rule.
  std::vector<std::uint32_t> build_visited_;
  std::uint32_t build_epoch_ = 0;
};

}  // namespace semask
