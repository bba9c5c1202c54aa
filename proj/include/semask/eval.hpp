#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "semask/baselines.hpp"
#include "semask/geo.hpp"
#include "semask/grid_index.hpp"
#include "semask/object.hpp"
#include "semask/prompts.hpp"
#include "semask/providers.hpp"
#include "semask/retrieval.hpp"

namespace semask {

/// F1 of the first min(k, |retrieved|) ids. Throws std::invalid_argument on
/// an empty relevant set or k == 0.
double f1_at_k(std::span<const std::string> retrieved, const std::unordered_set<std::string>& relevant, std::size_t k);

enum class Provenance { Generated, Manual };
std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct LabeledQuery {
  std::string text;
  GeoRect rect;
  std::vector<std::string> relevant_ids;
  std::string city;
  Provenance provenance = Provenance::Manual;

  Query query(std::size_t k = 10) const { return Query(rect, text, k); }
};

ordered_json labeled_query_to_json(const LabeledQuery& q);
LabeledQuery labeled_query_from_json(const ordered_json& j);

/// Throws std::invalid_argument when a relevant id is unknown to the corpus
/// or lies outside the query rect.
void check_labeled_query(const LabeledQuery& q, const Corpus& corpus);

using CorpusByCity = std::map<std::string, const Corpus*, std::less<>>;

/// JSON array of {text, rect, relevant_ids, city, provenance}. Queries whose
/// city appears in `corpora` are checked with check_labeled_query.
std::vector<LabeledQuery> load_queryset(const std::filesystem::path& path, const CorpusByCity& corpora = {});
void save_queryset(const std::filesystem::path& path, std::span<const LabeledQuery> queries);

enum class Method { TfIdf, Lda, Embedding, Semask };
std::string_view to_string(Method m);
/// Accepts tfidf, lda, embedding, semask.
Method parse_method(std::string_view s);

/// What a benchmark needs per city. The LDA model is fitted on first use
/// when absent.
struct CitySystem {
  const SearchIndex* index = nullptr;
  Embedder* embedder = nullptr;
  ChatProvider* chat = nullptr;
  const PromptTemplate* refine = nullptr;
  const LdaModel* lda = nullptr;
};

struct BenchOptions {
  std::size_t k = 10;
  LdaParams lda;
  /// Worker threads evaluating queries. Providers must be thread-safe when > 1.
  std::size_t parallelism = 1;
};

struct QueryOutcome {
  std::string city;
  std::string text;
  std::vector<std::string> retrieved;
  double f1 = 0.0;
  double filter_ms = 0.0;
  double refine_ms = 0.0;
  bool degraded = false;
  /// Set when the query could not be evaluated (no F1 recorded).
  std::optional<std::string> error;
};

struct CitySummary {
  std::string city;
  std::size_t queries = 0;
  double mean_f1 = 0.0;
  std::optional<std::string> error;
};

struct BenchReport {
  Method method = Method::Semask;
  std::size_t k = 10;
  std::vector<QueryOutcome> per_query;  // queryset order
  std::vector<CitySummary> cities;      // ascending city name
  /// Mean over every evaluated query.
  double mean_f1 = 0.0;
  double mean_filter_ms = 0.0;
  double mean_refine_ms = 0.0;
  std::vector<std::string> footnotes;

  ordered_json to_json() const;
  /// Plain-text table for terminals.
  std::string to_text() const;
};

/// Published F1@10 averages on the original (non-redistributable) data,
/// for display next to local numbers.
struct ReferenceScore {
  std::string_view method;
  double f1_at_10;
};
std::span<const ReferenceScore> reference_scores();

/// SemaSK retrieves its recommended list; the embedding method the k filter
/// candidates; TF-IDF and LDA the top k of their ranking over the objects
/// in range. A city without a system yields a per-city error entry.
BenchReport run_benchmark(Method method, std::span<const LabeledQuery> queries,
                          const std::map<std::string, CitySystem, std::less<>>& systems,
                          const BenchOptions& options = {});

/// "{name} is located at {address} and primarily serves the category of
/// {categories}. It is open for business at these hours: [...]. Customers
/// often highlight: '{summary}'", on one line.
std::string information_paragraph(const GeoTextualObject& obj);

std::string render_generation_prompt(const PromptTemplate& tmpl, const GeoTextualObject& target);

/// One completion of the generation prompt, trimmed.
std::string generate_query(const GeoTextualObject& target, ChatProvider& llm, const PromptTemplate& tmpl);

/// 5 km x 5 km around `center`.
GeoRect make_query_range(const GeoPoint& center);

struct DraftOptions {
  std::size_t n = 100;
  std::uint64_t seed = 1;
  std::string city;
};

/// Samples range centres uniformly over the corpus bounding box, picks a
/// summarised object inside each range as the single relevant id and asks
/// the model for a question about it. Targets are not repeated. May return
/// fewer than n drafts when the corpus runs out of targets.
std::vector<LabeledQuery> generate_query_drafts(const Corpus& corpus, const GridIndex& grid, ChatProvider& llm,
                                                const PromptTemplate& tmpl, const DraftOptions& options);

}  // namespace semask
