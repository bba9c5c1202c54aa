// Independent reference implementations and seeded generators for tests.
// Deliberately naive: no shared code with the library beyond data types.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "semask/embedding.hpp"
#include "semask/geo.hpp"
#include "semask/object.hpp"
#include "semask/rng.hpp"

#ifndef SEMASK_TEST_DIR
#define SEMASK_TEST_DIR "tests"
#endif

namespace oracle {

inline std::string fixture(const std::string& rel) { return std::string(SEMASK_TEST_DIR) + "/fixtures/" + rel; }

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline bool in_rect(const semask::GeoRect& r, double lat, double lon) {
  return lat >= r.min_lat() && lat <= r.max_lat() && lon >= r.min_lon() && lon <= r.max_lon();
}

/// Sorted ids of points inside r, by linear scan.
inline std::vector<std::string> linear_range(const std::vector<std::pair<std::string, semask::GeoPoint>>& pts,
                                             const semask::GeoRect& r) {
  std::vector<std::string> out;
  for (const auto& [id, p] : pts) {
    if (in_rect(r, p.lat(), p.lon())) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Scored {
  std::string id;
  double score;
};

/// TF-IDF cosine ranking, computed with maps in O(docs * vocab).
inline std::vector<Scored> tfidf(const std::vector<std::pair<std::string, std::string>>& docs, const std::string& query) {
  const double n = static_cast<double>(docs.size());
  std::vector<std::map<std::string, double>> tf(docs.size());
  std::map<std::string, double> df;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (const auto& w : words(docs[i].second)) tf[i][w] += 1.0;
    for (const auto& [w, c] : tf[i]) df[w] += 1.0;
  }
  auto idf = [&](const std::string& w) { return std::log((1.0 + n) / (1.0 + df[w])) + 1.0; };
  std::map<std::string, double> q;
  for (const auto& w : words(query)) {
    if (df.count(w)) q[w] += 1.0;
  }
  std::vector<Scored> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double num = 0, nq = 0, nd = 0;
    for (const auto& [w, c] : q) nq += (c * idf(w)) * (c * idf(w));
    for (const auto& [w, c] : tf[i]) nd += (c * idf(w)) * (c * idf(w));
    for (const auto& [w, c] : q) {
      auto it = tf[i].find(w);
      if (it != tf[i].end()) num += (c * idf(w)) * (it->second * idf(w));
    }
    out.push_back({docs[i].first, (nq == 0 || nd == 0) ? 0.0 : num / std::sqrt(nq * nd)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return out;
}

/// F1 straight from the definition, over sets.
inline double f1(const std::vector<std::string>& retrieved, const std::set<std::string>& relevant, std::size_t k) {
  std::set<std::string> top(retrieved.begin(), retrieved.begin() + std::min(k, retrieved.size()));
  if (top.empty()) return 0.0;
  double hit = 0;
  for (const auto& id : top) hit += relevant.count(id);
  const double p = hit / static_cast<double>(std::min(k, retrieved.size()));
  const double r = hit / static_cast<double>(relevant.size());
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

/// Standard normal via Box-Muller.
inline double gaussian(semask::SeededRng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline semask::EmbeddingVector random_unit(semask::SeededRng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(gaussian(rng));
  return semask::EmbeddingVector::normalized(std::move(v));
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return num / std::sqrt(na * nb);
}

/// Object with only a name attribute (plus optional extras added by callers).
inline semask::GeoTextualObject simple_object(const std::string& id, const std::string& name, double lat = 0.0,
                                              double lon = 0.0) {
  return semask::GeoTextualObject::make(id, name, semask::GeoPoint(lat, lon));
}

}  // namespace oracle
