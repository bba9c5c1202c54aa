#include "semask/hnsw.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace semask {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'A', 'S', 'K', 'H', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated index snapshot");
  return v;
}

}  // namespace

void HnswParams::validate() const {
  if (M < 2) throw std::invalid_argument("HNSW M must be >= 2");
  if (ef_construction < 1) throw std::invalid_argument("HNSW ef_construction must be >= 1");
  if (ef_search < 1) throw std::invalid_argument("HNSW ef_search must be >= 1");
  if (level_mult < 0.0) throw std::invalid_argument("HNSW level multiplier must be >= 0");
}

double HnswParams::effective_level_mult() const {
  return level_mult > 0.0 ? level_mult : 1.0 / std::log(static_cast<double>(M));
}

bool hit_before(const ScoredHit& a, const ScoredHit& b) noexcept {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.id < b.id;
}

HnswIndex::HnswIndex(std::size_t dim, HnswParams params) : dim_(dim), params_(params), rng_(params.rng_seed) {
  if (dim_ == 0) throw std::invalid_argument("HNSW dimension must be >= 1");
  params_.validate();
}

bool HnswIndex::contains(std::string_view id) const { return index_of_.count(std::string(id)) != 0; }

int HnswIndex::draw_level() {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u = 1.0 - rng_.uniform();
  return static_cast<int>(std::floor(-std::log(u) * params_.effective_level_mult()));
}

std::uint32_t HnswIndex::greedy_descend(std::span<const float> q, std::uint32_t entry, int from_level,
                                        int to_level) const {
  std::uint32_t cur = entry;
  float cur_dist = distance(q, cur);
  for (int level = from_level; level >= to_level; --level) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::uint32_t nb : links_[cur][level]) {
        const float d = distance(q, nb);
        if (d < cur_dist || (d == cur_dist && nb < cur)) {
          cur = nb;
          cur_dist = d;
          changed = true;
        }
      }
    }
  }
  return cur;
}

std::vector<HnswIndex::Neighbor> HnswIndex::search_layer(std::span<const float> q, std::uint32_t entry,
                                                         std::size_t ef, int level, const Mask* allowed,
                                                         std::vector<std::uint32_t>& visited,
                                                         std::uint32_t& epoch) const {
  auto closer = [](const Neighbor& a, const Neighbor& b) { return a.dist < b.dist || (a.dist == b.dist && a.node < b.node); };
  auto farther = [&](const Neighbor& a, const Neighbor& b) { return closer(b, a); };
  // candidates: nearest on top; results: farthest on top.
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(farther)> candidates(farther);
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(closer)> results(closer);

  if (visited.size() < ids_.size()) visited.resize(ids_.size(), 0);
  if (++epoch == 0) {
    std::fill(visited.begin(), visited.end(), 0);
    epoch = 1;
  }
  auto is_allowed = [&](std::uint32_t n) { return !allowed || (*allowed)[n]; };

  const Neighbor start{distance(q, entry), entry};
  visited[entry] = epoch;
  candidates.push(start);
  if (is_allowed(entry)) results.push(start);
  float bound = results.empty() ? std::numeric_limits<float>::infinity() : results.top().dist;

  while (!candidates.empty()) {
    const Neighbor cur = candidates.top();
    // With a filter, keep walking until ef allowed nodes have been seen.
    if (cur.dist > bound && results.size() >= ef) break;
    candidates.pop();
    for (std::uint32_t nb : links_[cur.node][level]) {
      if (visited[nb] == epoch) continue;
      visited[nb] = epoch;
      const float d = distance(q, nb);
      if (results.size() < ef || d < bound) {
        candidates.push({d, nb});
        if (is_allowed(nb)) {
          results.push({d, nb});
          if (results.size() > ef) results.pop();
        }
        if (!results.empty()) bound = results.top().dist;
      }
    }
  }

  std::vector<Neighbor> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<Neighbor> candidates, std::size_t m) const {
  std::sort(candidates.begin(), candidates.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.node < b.node);
  });
  std::vector<std::uint32_t> out;
  if (candidates.size() <= m) {
    for (const auto& c : candidates) out.push_back(c.node);
    return out;
  }
  // Keep a candidate only if it is closer to the base than to every neighbour
  // already kept; this spreads links across directions.
  for (const auto& c : candidates) {
    if (out.size() >= m) break;
    bool keep = true;
    for (std::uint32_t r : out) {
      if (1.0f - dot(vec(c.node), vec(r)) < c.dist) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(c.node);
  }
  return out;
}

void HnswIndex::link(std::uint32_t from, std::uint32_t to, int level) {
  auto& list = links_[from][level];
  if (std::find(list.begin(), list.end(), to) != list.end()) return;
  if (list.size() < max_links(level)) {
    list.push_back(to);
    return;
  }
  std::vector<Neighbor> cands;
  cands.reserve(list.size() + 1);
  const auto base = vec(from);
  for (std::uint32_t n : list) cands.push_back({distance(base, n), n});
  cands.push_back({distance(base, to), to});
  list = select_neighbors(std::move(cands), max_links(level));
}

void HnswIndex::insert(std::string id, const EmbeddingVector& vector) {
  if (vector.dim() != dim_) {
    throw std::invalid_argument(fmt::format("vector dimension {} does not match index dimension {}", vector.dim(), dim_));
  }
  if (index_of_.count(id)) throw std::invalid_argument(fmt::format("duplicate id '{}'", id));
  if (ids_.size() >= std::numeric_limits<std::uint32_t>::max()) throw std::length_error("HNSW index is full");

  const auto node = static_cast<std::uint32_t>(ids_.size());
  data_.insert(data_.end(), vector.values().begin(), vector.values().end());
  index_of_.emplace(id, node);
  ids_.push_back(std::move(id));
  const int level = draw_level();
  levels_.push_back(level);
  links_.emplace_back(static_cast<std::size_t>(level) + 1);

  if (entry_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }

  const auto q = vec(node);
  auto ep = static_cast<std::uint32_t>(entry_);
  if (level < max_level_) ep = greedy_descend(q, ep, max_level_, level + 1);
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    auto found = search_layer(q, ep, params_.ef_construction, l, nullptr, build_visited_, build_epoch_);
    ep = found.front().node;
    auto neighbors = select_neighbors(std::move(found), params_.M);
    links_[node][l] = neighbors;
    for (std::uint32_t nb : neighbors) link(nb, node, l);
  }
  if (level > max_level_) {
    entry_ = node;
    max_level_ = level;
  }
}

void HnswIndex::check_query(const EmbeddingVector& query) const {
  if (query.dim() != dim_) {
    throw std::invalid_argument(fmt::format("query dimension {} does not match index dimension {}", query.dim(), dim_));
  }
}

std::vector<ScoredHit> HnswIndex::finish(std::vector<ScoredHit> hits, std::size_t k) const {
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), hit_before);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), hit_before);
  }
  return hits;
}

std::vector<ScoredHit> HnswIndex::exact_scan(std::span<const float> q, std::size_t k, const Mask* allowed) const {
  std::vector<ScoredHit> hits;
  for (std::uint32_t n = 0; n < ids_.size(); ++n) {
    if (allowed && !(*allowed)[n]) continue;
    hits.push_back({ids_[n], static_cast<double>(dot(q, vec(n)))});
  }
  return finish(std::move(hits), k);
}

std::vector<ScoredHit> HnswIndex::graph_knn(std::span<const float> q, std::size_t k, const Mask* allowed,
                                            std::size_t allowed_count) const {
  if (entry_ < 0 || k == 0) return {};
  const auto ep = greedy_descend(q, static_cast<std::uint32_t>(entry_), max_level_, 1);
  std::size_t ef = std::max(params_.ef_search, k);
  if (allowed && allowed_count < ids_.size()) {
    const double fraction = static_cast<double>(allowed_count) / static_cast<double>(ids_.size());
    const auto inflated = static_cast<std::size_t>(std::ceil(static_cast<double>(ef) / std::max(fraction, 1e-12)));
    ef = std::max(k, std::min(inflated, 4 * params_.ef_search));
  }
  std::vector<std::uint32_t> visited(ids_.size(), 0);
  std::uint32_t epoch = 0;
  const auto found = search_layer(q, ep, ef, 0, allowed, visited, epoch);
  std::vector<ScoredHit> hits;
  hits.reserve(found.size());
  for (const auto& n : found) hits.push_back({ids_[n.node], static_cast<double>(dot(q, vec(n.node)))});
  return finish(std::move(hits), k);
}

std::vector<ScoredHit> HnswIndex::dispatch(const EmbeddingVector& query, std::size_t k, const Mask* allowed,
                                           std::size_t allowed_count) const {
  check_query(query);
  if (k == 0 || allowed_count == 0) return {};
  const auto q = query.values();
  if (query.is_zero() || allowed_count < params_.exact_scan_threshold || k >= allowed_count) {
    return exact_scan(q, k, allowed);
  }
  return graph_knn(q, k, allowed, allowed_count);
}

std::vector<ScoredHit> HnswIndex::knn(const EmbeddingVector& query, std::size_t k) const {
  return dispatch(query, k, nullptr, ids_.size());
}

std::vector<ScoredHit> HnswIndex::knn(const EmbeddingVector& query, std::size_t k, const IdPredicate& allow) const {
  if (!allow) return knn(query, k);
  Mask mask(ids_.size(), 0);
  std::size_t count = 0;
  for (std::size_t n = 0; n < ids_.size(); ++n) {
    if (allow(ids_[n])) {
      mask[n] = 1;
      ++count;
    }
  }
  return dispatch(query, k, &mask, count);
}

std::vector<ScoredHit> HnswIndex::knn_within(const EmbeddingVector& query, std::size_t k,
                                             std::span<const std::string> allowed_ids) const {
  Mask mask(ids_.size(), 0);
  std::size_t count = 0;
  for (const auto& id : allowed_ids) {
    auto it = index_of_.find(id);
    if (it == index_of_.end() || mask[it->second]) continue;
    mask[it->second] = 1;
    ++count;
  }
  return dispatch(query, k, &mask, count);
}

std::vector<ScoredHit> HnswIndex::brute_force_knn(const EmbeddingVector& query, std::size_t k,
                                                  const IdPredicate& allow) const {
  check_query(query);
  std::vector<ScoredHit> all;
  for (std::uint32_t n = 0; n < ids_.size(); ++n) {
    if (allow && !allow(ids_[n])) continue;
    all.push_back({ids_[n], static_cast<double>(dot(query.values(), vec(n)))});
  }
  std::sort(all.begin(), all.end(), hit_before);
  if (all.size() > k) all.resize(k);
  return all;
}

std::vector<ScoredHit> HnswIndex::search_graph(const EmbeddingVector& query, std::size_t k,
                                               const IdPredicate& allow) const {
  check_query(query);
  if (!allow) return graph_knn(query.values(), k, nullptr, ids_.size());
  Mask mask(ids_.size(), 0);
  std::size_t count = 0;
  for (std::size_t n = 0; n < ids_.size(); ++n) {
    if (allow(ids_[n])) {
      mask[n] = 1;
      ++count;
    }
  }
  if (count == 0) return {};
  return graph_knn(query.values(), k, &mask, count);
}

bool HnswIndex::layer0_connected() const {
  if (ids_.empty()) return true;
  std::vector<char> seen(ids_.size(), 0);
  std::vector<std::uint32_t> stack{static_cast<std::uint32_t>(entry_)};
  seen[entry_] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    for (auto nb : links_[n][0]) {
      if (!seen[nb]) {
        seen[nb] = 1;
        ++reached;
        stack.push_back(nb);
      }
    }
  }
  return reached == ids_.size();
}

std::vector<std::size_t> HnswIndex::layer0_degrees() const {
  std::vector<std::size_t> out;
  out.reserve(ids_.size());
  for (const auto& l : links_) out.push_back(l[0].size());
  return out;
}

void HnswIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write index '{}'", path.string()));
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, dim_);
  put<std::uint64_t>(out, params_.M);
  put<std::uint64_t>(out, params_.ef_construction);
  put<std::uint64_t>(out, params_.ef_search);
  put<double>(out, params_.level_mult);
  put<std::uint64_t>(out, params_.rng_seed);
  put<std::uint64_t>(out, params_.exact_scan_threshold);
  for (auto s : rng_.state()) put<std::uint64_t>(out, s);
  put<std::uint64_t>(out, ids_.size());
  put<std::int64_t>(out, entry_);
  put<std::int32_t>(out, max_level_);
  for (std::uint32_t n = 0; n < ids_.size(); ++n) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ids_[n].size()));
    out.write(ids_[n].data(), static_cast<std::streamsize>(ids_[n].size()));
    put<std::int32_t>(out, levels_[n]);
    out.write(reinterpret_cast<const char*>(vec(n).data()), static_cast<std::streamsize>(dim_ * sizeof(float)));
    for (int l = 0; l <= levels_[n]; ++l) {
      const auto& list = links_[n][l];
      put<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
      out.write(reinterpret_cast<const char*>(list.data()),
                static_cast<std::streamsize>(list.size() * sizeof(std::uint32_t)));
    }
  }
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

HnswIndex HnswIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read index '{}'", path.string()));
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw std::runtime_error("not an HNSW index snapshot");
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) throw std::runtime_error(fmt::format("unsupported snapshot version {}", version));

  const auto dim = get<std::uint64_t>(in);
  HnswParams p;
  p.M = get<std::uint64_t>(in);
  p.ef_construction = get<std::uint64_t>(in);
  p.ef_search = get<std::uint64_t>(in);
  p.level_mult = get<double>(in);
  p.rng_seed = get<std::uint64_t>(in);
  p.exact_scan_threshold = get<std::uint64_t>(in);
  HnswIndex index(dim, p);
  SeededRng::State state;
  for (auto& s : state) s = get<std::uint64_t>(in);
  index.rng_.set_state(state);

  const auto n = get<std::uint64_t>(in);
  index.entry_ = get<std::int64_t>(in);
  index.max_level_ = get<std::int32_t>(in);
  index.data_.resize(n * dim);
  for (std::uint64_t node = 0; node < n; ++node) {
    const auto len = get<std::uint32_t>(in);
    std::string id(len, '\0');
    in.read(id.data(), len);
    const auto level = get<std::int32_t>(in);
    if (level < 0 || level > 64) throw std::runtime_error("corrupt snapshot: bad level");
    in.read(reinterpret_cast<char*>(index.data_.data() + node * dim), static_cast<std::streamsize>(dim * sizeof(float)));
    std::vector<std::vector<std::uint32_t>> links(static_cast<std::size_t>(level) + 1);
    for (auto& list : links) {
      const auto count = get<std::uint32_t>(in);
      list.resize(count);
      in.read(reinterpret_cast<char*>(list.data()), static_cast<std::streamsize>(count * sizeof(std::uint32_t)));
      for (auto nb : list) {
        if (nb >= n) throw std::runtime_error("corrupt snapshot: dangling edge");
      }
    }
    if (!in) throw std::runtime_error("truncated index snapshot");
    if (!index.index_of_.emplace(id, static_cast<std::uint32_t>(node)).second) {
      throw std::runtime_error("corrupt snapshot: duplicate id");
    }
    index.ids_.push_back(std::move(id));
    index.levels_.push_back(level);
    index.links_.push_back(std::move(links));
  }
  if (n > 0 && (index.entry_ < 0 || static_cast<std::uint64_t>(index.entry_) >= n)) {
    throw std::runtime_error("corrupt snapshot: bad entry point");
  }
  return index;
}

}  // namespace semask
