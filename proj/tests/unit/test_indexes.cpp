#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "../support/oracles.hpp"
#include "semask/grid_index.hpp"
#include "semask/hnsw.hpp"

using namespace semask;

namespace {

std::vector<ScoredHit> brute(const std::vector<std::pair<std::string, EmbeddingVector>>& pts,
                             const EmbeddingVector& q, std::size_t k, const std::set<std::string>* allowed = nullptr) {
  std::vector<ScoredHit> all;
  for (const auto& [id, v] : pts) {
    if (allowed && !allowed->count(id)) continue;
    double s = 0;
    for (std::size_t i = 0; i < v.values().size(); ++i) s += double(v.values()[i]) * q.values()[i];
    all.push_back({id, s});
  }
  std::sort(all.begin(), all.end(), [](const ScoredHit& a, const ScoredHit& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

struct Built {
  HnswIndex index;
  std::vector<std::pair<std::string, EmbeddingVector>> points;
};

Built build(std::size_t n, std::size_t dim, std::uint64_t seed, HnswParams params = {}) {
  SeededRng rng(seed);
  Built b{HnswIndex(dim, params), {}};
  for (std::size_t i = 0; i < n; ++i) {
    auto v = oracle::random_unit(rng, dim);
    const std::string id = "p" + std::to_string(i);
    b.index.insert(id, v);
    b.points.emplace_back(id, std::move(v));
  }
  return b;
}

std::vector<std::string> ids_of(const std::vector<ScoredHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.id);
  return out;
}

}  // namespace

TEST_CASE("hnsw parameters are validated") {
  HnswParams p;
  CHECK_NOTHROW(p.validate());
  p.M = 1;
  CHECK_THROWS(p.validate());
  p = {};
  p.ef_search = 0;
  CHECK_THROWS(p.validate());
  CHECK(HnswParams{}.effective_level_mult() == doctest::Approx(1.0 / std::log(16.0)));
}

TEST_CASE("hnsw graph search reaches high recall on random vectors") {
  auto b = build(3000, 32, 11);
  SeededRng rng(12);
  double hits = 0;
  const std::size_t k = 10, queries = 100;
  for (std::size_t q = 0; q < queries; ++q) {
    const auto v = oracle::random_unit(rng, 32);
    const auto truth = ids_of(brute(b.points, v, k));
    const auto got = ids_of(b.index.search_graph(v, k));
    const std::set<std::string> t(truth.begin(), truth.end());
    for (const auto& id : got) hits += t.count(id);
  }
  CHECK(hits / double(k * queries) >= 0.95);
}

TEST_CASE("hnsw results are sorted and ties broken by id") {
  HnswIndex idx(8);
  auto v = EmbeddingVector::normalized({1, 0, 0, 0, 0, 0, 0, 0});
  for (const char* id : {"c", "a", "b"}) idx.insert(id, v);
  idx.insert("z", EmbeddingVector::normalized({0, 1, 0, 0, 0, 0, 0, 0}));
  const auto hits = idx.knn(v, 4);
  CHECK(ids_of(hits) == std::vector<std::string>{"a", "b", "c", "z"});
  CHECK(std::is_sorted(hits.begin(), hits.end(), hit_before));
}

TEST_CASE("filtered hnsw search is exact against brute force") {
  HnswParams params;
  params.exact_scan_threshold = 300;
  auto b = build(2000, 24, 21, params);
  SeededRng rng(22);
  for (int trial = 0; trial < 60; ++trial) {
    const double keep = (trial % 3 == 0) ? 0.05 : (trial % 3 == 1 ? 0.3 : 0.9);
    std::set<std::string> allowed;
    std::vector<std::string> allowed_vec;
    for (const auto& [id, v] : b.points) {
      if (rng.uniform() < keep) {
        allowed.insert(id);
        allowed_vec.push_back(id);
      }
    }
    const auto q = oracle::random_unit(rng, 24);
    const std::size_t k = 1 + rng.below(20);
    const auto truth = brute(b.points, q, k, &allowed);
    const auto got = b.index.knn_within(q, k, allowed_vec);
    REQUIRE(got.size() == truth.size());
    // Small allowed sets are scanned exactly; larger ones must at least stay inside the filter.
    for (const auto& h : got) CHECK(allowed.count(h.id));
    if (allowed.size() < params.exact_scan_threshold || k >= allowed.size()) {
      CHECK(ids_of(got) == ids_of(truth));
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].similarity == doctest::Approx(truth[i].similarity).epsilon(1e-5));
    }
    const auto pred = b.index.knn(q, k, [&](std::string_view id) { return allowed.count(std::string(id)) > 0; });
    CHECK(ids_of(pred) == ids_of(got));
  }
}

TEST_CASE("knn within unknown or empty ids") {
  auto b = build(50, 8, 3);
  const auto q = b.points[0].second;
  CHECK(b.index.knn_within(q, 5, std::vector<std::string>{}).empty());
  const std::vector<std::string> some = {"nope", "p3", "p7"};
  CHECK(ids_of(b.index.knn_within(q, 5, some)).size() == 2);
  CHECK(b.index.knn(q, 0).empty());
}

TEST_CASE("zero queries fall back to an exact scan") {
  auto b = build(1500, 16, 4);
  const auto zero = EmbeddingVector::zeros(16);
  const auto hits = b.index.knn(zero, 5);
  REQUIRE(hits.size() == 5);
  for (const auto& h : hits) CHECK(h.similarity == 0.0);
  CHECK(ids_of(hits) == std::vector<std::string>{"p0", "p1", "p10", "p100", "p1000"});
}

TEST_CASE("hnsw rejects dimension mismatches and duplicate ids") {
  HnswIndex idx(8);
  idx.insert("a", EmbeddingVector::normalized({1, 0, 0, 0, 0, 0, 0, 0}));
  CHECK_THROWS_AS(idx.insert("a", EmbeddingVector::normalized({0, 1, 0, 0, 0, 0, 0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(idx.insert("b", EmbeddingVector::normalized({1, 0})), std::invalid_argument);
  CHECK_THROWS(idx.knn(EmbeddingVector::normalized({1, 0}), 1));
  CHECK(idx.contains("a"));
  CHECK_FALSE(idx.contains("b"));
}

TEST_CASE("hnsw graph invariants: connectivity and bounded degree") {
  HnswParams params;
  params.M = 8;
  auto b = build(2500, 16, 31, params);
  CHECK(b.index.layer0_connected());
  CHECK(b.index.max_level() >= 1);
  for (auto d : b.index.layer0_degrees()) {
    CHECK(d <= 2 * params.M);
    CHECK(d >= 1);
  }
  HnswIndex empty(8);
  CHECK(empty.max_level() == -1);
  CHECK(empty.knn(EmbeddingVector::normalized({1, 0, 0, 0, 0, 0, 0, 0}), 3).empty());
}

TEST_CASE("hnsw construction is deterministic for a seed") {
  auto a = build(800, 16, 41);
  auto b = build(800, 16, 41);
  CHECK(a.index.layer0_degrees() == b.index.layer0_degrees());
  SeededRng rng(42);
  for (int i = 0; i < 20; ++i) {
    const auto q = oracle::random_unit(rng, 16);
    CHECK(a.index.search_graph(q, 10) == b.index.search_graph(q, 10));
  }
}

TEST_CASE("hnsw snapshot round trip preserves answers") {
  auto b = build(1200, 16, 51);
  const auto path = std::filesystem::temp_directory_path() / "semask_hnsw_roundtrip.bin";
  b.index.save(path);
  const auto loaded = HnswIndex::load(path);
  CHECK(loaded.size() == b.index.size());
  CHECK(loaded.dim() == 16);
  CHECK(loaded.max_level() == b.index.max_level());
  CHECK(loaded.layer0_degrees() == b.index.layer0_degrees());
  SeededRng rng(52);
  for (int i = 0; i < 30; ++i) {
    const auto q = oracle::random_unit(rng, 16);
    CHECK(loaded.search_graph(q, 10) == b.index.search_graph(q, 10));
  }

  {
    std::ofstream bad(path, std::ios::binary | std::ios::trunc);
    bad << "not an index";
  }
  CHECK_THROWS(HnswIndex::load(path));
  std::filesystem::remove(path);
  CHECK_THROWS(HnswIndex::load(path));
}

TEST_CASE("grid range queries match a linear scan") {
  SeededRng rng(61);
  std::vector<std::pair<std::string, GeoPoint>> pts;
  GridIndex grid(0.01);
  for (int i = 0; i < 3000; ++i) {
    GeoPoint p(rng.uniform(36.0, 36.3), rng.uniform(-86.9, -86.6));
    // Snap a share of points onto cell boundaries.
    if (i % 10 == 0) p = GeoPoint(std::round(p.lat() * 100) / 100, std::round(p.lon() * 100) / 100);
    pts.emplace_back("g" + std::to_string(i), p);
    grid.add(pts.back().first, p);
  }
  CHECK(grid.size() == 3000);
  for (int t = 0; t < 300; ++t) {
    double a = rng.uniform(35.95, 36.35), b = rng.uniform(35.95, 36.35);
    double c = rng.uniform(-86.95, -86.55), d = rng.uniform(-86.95, -86.55);
    if (t % 4 == 0) {
      // Rect edges exactly on points and cell boundaries.
      const auto& p = pts[rng.below(pts.size())].second;
      a = p.lat();
      c = p.lon();
    }
    const GeoRect r(std::min(a, b), std::max(a, b), std::min(c, d), std::max(c, d));
    CHECK(grid.range_query(r) == oracle::linear_range(pts, r));
  }
  // Degenerate rect at a single point is inclusive.
  const auto& p0 = pts[0].second;
  const auto single = grid.range_query(GeoRect(p0.lat(), p0.lat(), p0.lon(), p0.lon()));
  CHECK(std::find(single.begin(), single.end(), "g0") != single.end());
}

TEST_CASE("grid handles negative coordinates and cell assignment") {
  GridIndex grid(0.5);
  CHECK(grid.cell_of(GeoPoint(-0.1, -0.1)) == std::pair<std::int64_t, std::int64_t>{-1, -1});
  CHECK(grid.cell_of(GeoPoint(0.5, 1.0)) == std::pair<std::int64_t, std::int64_t>{1, 2});
  grid.add("a", GeoPoint(-0.1, -0.1));
  grid.add("b", GeoPoint(0.0, 0.0));
  grid.add("c", GeoPoint(0.6, 0.6));
  CHECK(grid.occupied_cells() == 3);
  CHECK(grid.range_query(GeoRect(-1, 0, -1, 0)) == std::vector<std::string>{"a", "b"});
  CHECK(grid.range_query(GeoRect(10, 11, 10, 11)).empty());
  CHECK_THROWS(GridIndex(0.0));
  CHECK_THROWS(GridIndex(-1.0));
}

TEST_CASE("grid built from objects") {
  std::vector<GeoTextualObject> objs = {oracle::simple_object("x", "X", 1.001, 1.001),
                                        oracle::simple_object("y", "Y", 1.5, 1.5)};
  const auto grid = GridIndex::build(objs);
  CHECK(grid.cell_size() == 0.01);
  CHECK(grid.range_query(GeoRect(1, 1.01, 1, 1.01)) == std::vector<std::string>{"x"});
}
