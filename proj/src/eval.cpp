#include "semask/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "semask/pyliteral.hpp"
#include "semask/resources.hpp"
#include "semask/rng.hpp"
#include "semask/text.hpp"

namespace semask {

double f1_at_k(std::span<const std::string> retrieved, const std::unordered_set<std::string>& relevant, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (relevant.empty()) throw std::invalid_argument("labeled query has no relevant ids");
  const std::size_t n = std::min(k, retrieved.size());
  if (n == 0) return 0.0;
  std::unordered_set<std::string> seen;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (relevant.count(retrieved[i]) && seen.insert(retrieved[i]).second) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  const double r = static_cast<double>(hits) / static_cast<double>(relevant.size());
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

std::string_view to_string(Provenance p) { return p == Provenance::Generated ? "generated" : "manual"; }

Provenance parse_provenance(std::string_view s) {
  if (s == "generated") return Provenance::Generated;
  if (s == "manual") return Provenance::Manual;
  throw std::invalid_argument(fmt::format("unknown provenance '{}'", s));
}

namespace {

ordered_json rect_to_json(const GeoRect& r) {
  ordered_json j;
  j["min_lat"] = r.min_lat();
  j["max_lat"] = r.max_lat();
  j["min_lon"] = r.min_lon();
  j["max_lon"] = r.max_lon();
  return j;
}

GeoRect rect_from_json(const ordered_json& j) {
  return GeoRect(j.at("min_lat").get<double>(), j.at("max_lat").get<double>(), j.at("min_lon").get<double>(),
                 j.at("max_lon").get<double>());
}

}  // namespace

ordered_json labeled_query_to_json(const LabeledQuery& q) {
  ordered_json j;
  j["text"] = q.text;
  j["rect"] = rect_to_json(q.rect);
  j["relevant_ids"] = q.relevant_ids;
  j["city"] = q.city;
  j["provenance"] = std::string(to_string(q.provenance));
  return j;
}

LabeledQuery labeled_query_from_json(const ordered_json& j) {
  LabeledQuery q{j.at("text").get<std::string>(), rect_from_json(j.at("rect")),
                 j.at("relevant_ids").get<std::vector<std::string>>(), j.value("city", std::string()),
                 parse_provenance(j.value("provenance", std::string("manual")))};
  if (text::trim(q.text).empty()) throw std::invalid_argument("labeled query text is empty");
  if (q.relevant_ids.empty()) throw std::invalid_argument("labeled query has no relevant ids");
  return q;
}

void check_labeled_query(const LabeledQuery& q, const Corpus& corpus) {
  for (const auto& id : q.relevant_ids) {
    const auto* obj = corpus.find(id);
    if (!obj) throw std::invalid_argument(fmt::format("relevant id '{}' is not in the {} corpus", id, q.city));
    if (!contains(q.rect, obj->location)) {
      throw std::invalid_argument(fmt::format("relevant id '{}' lies outside the query range", id));
    }
  }
}

std::vector<LabeledQuery> load_queryset(const std::filesystem::path& path, const CorpusByCity& corpora) {
  const auto j = ordered_json::parse(read_file(path));
  if (!j.is_array()) throw std::invalid_argument("query set must be a JSON array");
  std::vector<LabeledQuery> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      auto q = labeled_query_from_json(j[i]);
      if (auto it = corpora.find(q.city); it != corpora.end() && it->second) check_labeled_query(q, *it->second);
      out.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw std::invalid_argument(fmt::format("{}: query {}: {}", path.string(), i, e.what()));
    }
  }
  return out;
}

void save_queryset(const std::filesystem::path& path, std::span<const LabeledQuery> queries) {
  ordered_json j = ordered_json::array();
  for (const auto& q : queries) j.push_back(labeled_query_to_json(q));
  write_file(path, j.dump(2) + "\n");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::TfIdf: return "tfidf";
    case Method::Lda: return "lda";
    case Method::Embedding: return "embedding";
    case Method::Semask: return "semask";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "tfidf") return Method::TfIdf;
  if (s == "lda") return Method::Lda;
  if (s == "embedding") return Method::Embedding;
  if (s == "semask") return Method::Semask;
  throw std::invalid_argument(fmt::format("unknown method '{}' (expected tfidf, lda, embedding or semask)", s));
}

std::span<const ReferenceScore> reference_scores() {
  static constexpr ReferenceScore kScores[] = {
      {"lda", 0.05}, {"tfidf", 0.19}, {"embedding", 0.28}, {"semask", 0.59}};
  return kScores;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<const GeoTextualObject*> objects_in(const SearchIndex& index, const GeoRect& rect) {
  std::vector<const GeoTextualObject*> out;
  for (const auto& id : index.grid().range_query(rect)) {
    if (const auto* obj = index.corpus().find(id)) out.push_back(obj);
  }
  return out;
}

std::vector<std::string> top_ids(const std::vector<RankedId>& ranking, std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranking.size() && i < k; ++i) out.push_back(ranking[i].id);
  return out;
}

void require(const void* p, std::string_view what) {
  if (!p) throw std::invalid_argument(fmt::format("city system lacks {}", what));
}

QueryOutcome evaluate(Method method, const LabeledQuery& lq, const CitySystem& sys, const LdaModel* lda,
                      std::size_t k) {
  QueryOutcome out;
  out.city = lq.city;
  out.text = lq.text;
  const Query query = lq.query(k);
  require(sys.index, "an index");
  switch (method) {
    case Method::TfIdf: {
      const auto t0 = Clock::now();
      out.retrieved = top_ids(tfidf_rank(query, objects_in(*sys.index, query.range())), k);
      out.filter_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      break;
    }
    case Method::Lda: {
      const auto t0 = Clock::now();
      out.retrieved = top_ids(lda_rank(query, *lda, objects_in(*sys.index, query.range())), k);
      out.filter_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      break;
    }
    case Method::Embedding: {
      require(sys.embedder, "an embedder");
      const auto t0 = Clock::now();
      for (const auto& c : filter_stage(query, *sys.index, *sys.embedder)) out.retrieved.push_back(c.id);
      out.filter_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      break;
    }
    case Method::Semask: {
      require(sys.embedder, "an embedder");
      require(sys.chat, "a chat provider");
      require(sys.refine, "a refinement template");
      const auto answer = answer_query(query, *sys.index, *sys.embedder, *sys.chat, *sys.refine);
      for (const auto& r : answer.recommended) out.retrieved.push_back(r.id);
      out.filter_ms = answer.timings.filter_ms;
      out.refine_ms = answer.timings.refine_ms;
      out.degraded = answer.degraded;
      break;
    }
  }
  const std::unordered_set<std::string> relevant(lq.relevant_ids.begin(), lq.relevant_ids.end());
  out.f1 = f1_at_k(out.retrieved, relevant, k);
  return out;
}

}  // namespace

BenchReport run_benchmark(Method method, std::span<const LabeledQuery> queries,
                          const std::map<std::string, CitySystem, std::less<>>& systems,
                          const BenchOptions& options) {
  if (options.k == 0) throw std::invalid_argument("k must be at least 1");
  BenchReport report;
  report.method = method;
  report.k = options.k;
  report.per_query.resize(queries.size());

  // Fitting is sequential and happens before any query runs.
  std::map<std::string, LdaModel, std::less<>> fitted;
  std::map<std::string, std::string, std::less<>> city_errors;
  std::map<std::string, const LdaModel*, std::less<>> lda_for;
  for (const auto& q : queries) {
    if (city_errors.count(q.city) || lda_for.count(q.city)) continue;
    const auto it = systems.find(q.city);
    if (it == systems.end() || !it->second.index) {
      city_errors.emplace(q.city, fmt::format("no corpus loaded for city '{}'", q.city));
      continue;
    }
    const LdaModel* model = it->second.lda;
    if (method == Method::Lda && !model) {
      try {
        spdlog::info("fitting LDA for {} ({} objects)", q.city, it->second.index->corpus().size());
        model = &fitted.emplace(q.city, fit_lda(it->second.index->corpus(), options.lda)).first->second;
      } catch (const std::exception& e) {
        city_errors.emplace(q.city, fmt::format("LDA fit failed: {}", e.what()));
        continue;
      }
    }
    lda_for.emplace(q.city, model);
  }

  auto run_one = [&](std::size_t i) {
    const auto& q = queries[i];
    if (auto e = city_errors.find(q.city); e != city_errors.end()) {
      report.per_query[i] = {q.city, q.text, {}, 0.0, 0.0, 0.0, false, e->second};
      return;
    }
    try {
      report.per_query[i] = evaluate(method, q, systems.find(q.city)->second, lda_for.find(q.city)->second, options.k);
    } catch (const std::exception& e) {
      report.per_query[i] = {q.city, q.text, {}, 0.0, 0.0, 0.0, false, std::string(e.what())};
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, queries.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::map<std::string, CitySummary, std::less<>> by_city;
  std::size_t evaluated = 0;
  double f1_sum = 0.0;
  double filter_sum = 0.0;
  double refine_sum = 0.0;
  for (const auto& o : report.per_query) {
    auto& c = by_city[o.city];
    c.city = o.city;
    if (o.error) {
      if (auto e = city_errors.find(o.city); e != city_errors.end()) c.error = e->second;
      continue;
    }
    ++c.queries;
    c.mean_f1 += o.f1;
    ++evaluated;
    f1_sum += o.f1;
    filter_sum += o.filter_ms;
    refine_sum += o.refine_ms;
  }
  for (auto& [name, c] : by_city) {
    if (c.queries) c.mean_f1 /= static_cast<double>(c.queries);
    report.cities.push_back(c);
  }
  if (evaluated) {
    report.mean_f1 = f1_sum / static_cast<double>(evaluated);
    report.mean_filter_ms = filter_sum / static_cast<double>(evaluated);
    report.mean_refine_ms = refine_sum / static_cast<double>(evaluated);
  }

  std::string refs;
  for (const auto& r : reference_scores()) {
    if (!refs.empty()) refs += ", ";
    refs += fmt::format("{} {:.2f}", r.method, r.f1_at_10);
  }
  report.footnotes.push_back(fmt::format(
      "Published F1@10 averages on the original city data with hosted models, for context only: {}", refs));
  return report;
}

ordered_json BenchReport::to_json() const {
  ordered_json j;
  j["method"] = std::string(to_string(method));
  j["k"] = k;
  j["mean_f1"] = mean_f1;
  j["timings_ms"] = {{"filter", mean_filter_ms}, {"refine", mean_refine_ms}};
  ordered_json cs = ordered_json::array();
  for (const auto& c : cities) {
    ordered_json e;
    e["city"] = c.city;
    e["queries"] = c.queries;
    e["mean_f1"] = c.mean_f1;
    if (c.error) e["error"] = *c.error;
    cs.push_back(std::move(e));
  }
  j["cities"] = std::move(cs);
  ordered_json qs = ordered_json::array();
  for (const auto& o : per_query) {
    ordered_json e;
    e["city"] = o.city;
    e["text"] = o.text;
    e["retrieved"] = o.retrieved;
    e["f1"] = o.f1;
    e["filter_ms"] = o.filter_ms;
    e["refine_ms"] = o.refine_ms;
    e["degraded"] = o.degraded;
    if (o.error) e["error"] = *o.error;
    qs.push_back(std::move(e));
  }
  j["per_query"] = std::move(qs);
  j["footnotes"] = footnotes;
  return j;
}

std::string BenchReport::to_text() const {
  std::string out = fmt::format("method {}  F1@{}\n", to_string(method), k);
  for (const auto& c : cities) {
    if (c.error) {
      out += fmt::format("  {:<24} error: {}\n", c.city, *c.error);
    } else {
      out += fmt::format("  {:<24} {:>4} queries  {:.4f}\n", c.city, c.queries, c.mean_f1);
    }
  }
  out += fmt::format("  {:<24} {:>4} queries  {:.4f}\n", "average", per_query.size(), mean_f1);
  out += fmt::format("  mean filter {:.2f} ms, mean refine {:.2f} ms\n", mean_filter_ms, mean_refine_ms);
  for (std::size_t i = 0; i < footnotes.size(); ++i) out += fmt::format("[{}] {}\n", i + 1, footnotes[i]);
  return out;
}

std::string information_paragraph(const GeoTextualObject& obj) {
  std::string address;
  if (const auto* a = obj.attributes.text("address")) address = *a;
  std::string categories;
  std::string hours;
  for (const auto& [key, value] : obj.attributes) {
    if (const auto* c = std::get_if<Category>(&value); c && categories.empty()) {
      categories = text::join(c->values, ", ");
    } else if (const auto* h = std::get_if<Hours>(&value); h && hours.empty()) {
      for (const auto& [day, span] : h->days) {
        if (!hours.empty()) hours += ", ";
        hours += pyliteral::quote(day) + ": " + pyliteral::quote(span);
      }
    }
  }
  std::string out = fmt::format("{} is located at {} and primarily serves the category of {}.", obj.name,
                                address.empty() ? "an unlisted address" : address,
                                categories.empty() ? "General" : categories);
  out += fmt::format(" It is open for business at these hours: [{}].", hours);
  out += " Customers often highlight: " + pyliteral::quote(obj.tip_summary.value_or(""));
  // The model sees this on a single line.
  for (auto& ch : out) {
    if (ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  }
  return out;
}

std::string render_generation_prompt(const PromptTemplate& tmpl, const GeoTextualObject& target) {
  return tmpl.render({{"information", information_paragraph(target)}});
}

std::string generate_query(const GeoTextualObject& target, ChatProvider& llm, const PromptTemplate& tmpl) {
  return text::trim(llm.complete(render_generation_prompt(tmpl, target)));
}

GeoRect make_query_range(const GeoPoint& center) { return rect_from_center(center, 5.0, 5.0); }

std::vector<LabeledQuery> generate_query_drafts(const Corpus& corpus, const GridIndex& grid, ChatProvider& llm,
                                                const PromptTemplate& tmpl, const DraftOptions& options) {
  std::vector<LabeledQuery> out;
  if (corpus.empty() || options.n == 0) return out;
  double min_lat = 90, max_lat = -90, min_lon = 180, max_lon = -180;
  for (const auto& obj : corpus) {
    min_lat = std::min(min_lat, obj.location.lat());
    max_lat = std::max(max_lat, obj.location.lat());
    min_lon = std::min(min_lon, obj.location.lon());
    max_lon = std::max(max_lon, obj.location.lon());
  }
  SeededRng rng(options.seed);
  std::unordered_set<std::string> used;
  const std::size_t max_attempts = 50 * options.n;
  for (std::size_t attempt = 0; attempt < max_attempts && out.size() < options.n; ++attempt) {
    const GeoPoint center(rng.uniform(min_lat, std::nextafter(max_lat, 91.0)),
                          rng.uniform(min_lon, std::nextafter(max_lon, 181.0)));
    std::optional<GeoRect> rect;
    try {
      rect = make_query_range(center);
    } catch (const GeoError&) {
      continue;
    }
    std::vector<const GeoTextualObject*> pool;
    for (const auto& id : grid.range_query(*rect)) {
      const auto* obj = corpus.find(id);
      if (obj && obj->tip_summary && !used.count(id)) pool.push_back(obj);
    }
    if (pool.empty()) continue;
    const auto* target = pool[rng.below(pool.size())];
    auto question = generate_query(*target, llm, tmpl);
    if (question.empty()) continue;
    used.insert(target->id);
    out.push_back({std::move(question), *rect, {target->id}, options.city, Provenance::Generated});
  }
  if (out.size() < options.n) spdlog::warn("generated {} of {} query drafts", out.size(), options.n);
  return out;
}

}  // namespace semask
