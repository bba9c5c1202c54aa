#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semask/geo.hpp"
#include "semask/grid_index.hpp"
#include "semask/hnsw.hpp"
#include "semask/object.hpp"
#include "semask/prompts.hpp"
#include "semask/providers.hpp"

namespace semask {

/// An object shortlisted by the filter stage.
struct Candidate {
  std::string id;
  std::string name;
  double similarity = 0.0;
  /// Compact JSON of the object's attributes plus tip summary, never the
  /// embedding. Keys follow the corpus field order.
  std::string serialized_attributes;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Recommendation {
  std::string id;
  std::string name;
  std::string reason;
  std::size_t rank = 0;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct StageTimings {
  double filter_ms = 0.0;
  double refine_ms = 0.0;
};

/// recommended and filtered_out partition a subset of the k candidates.
struct QueryAnswer {
  std::vector<Recommendation> recommended;
  std::vector<Candidate> filtered_out;
  bool degraded = false;
  /// Why the answer is degraded; empty otherwise.
  std::string degraded_cause;
  StageTimings timings;
};

inline constexpr std::string_view kFallbackReason = "embedding-similarity fallback";

/// Corpus plus the two indexes built over it. Read-only after construction;
/// safe to share between concurrent queries.
class SearchIndex {
 public:
  /// Embeds objects lacking an embedding (input: embedding_input()), then
  /// builds the grid and HNSW indexes. Embeddings move into the HNSW index.
  static SearchIndex build(std::vector<GeoTextualObject> objects, Embedder& embedder, const HnswParams& params = {},
                           double cell_size_deg = 0.01);

  /// Pairs a corpus with a previously built vector index. Throws when the
  /// index does not cover exactly the corpus ids.
  static SearchIndex attach(std::vector<GeoTextualObject> objects, HnswIndex vectors, double cell_size_deg = 0.01);

  const Corpus& corpus() const noexcept { return corpus_; }
  const GridIndex& grid() const noexcept { return grid_; }
  const HnswIndex& vectors() const noexcept { return vectors_; }

 private:
  SearchIndex(Corpus corpus, GridIndex grid, HnswIndex vectors)
      : corpus_(std::move(corpus)), grid_(std::move(grid)), vectors_(std::move(vectors)) {}

  Corpus corpus_;
  GridIndex grid_;
  HnswIndex vectors_;
};

/// Fills obj.embedding from embedding_input(obj) where absent (or always,
/// with overwrite).
void embed_objects(std::vector<GeoTextualObject>& objects, Embedder& embedder, bool overwrite = false);

/// Serialises an object the way it is shown to the refinement model.
std::string serialize_candidate_attributes(const GeoTextualObject& obj);

/// Range filter, then k nearest by embedding among the objects in range.
/// An empty range returns no candidates without calling the embedder.
std::vector<Candidate> filter_stage(const Query& query, const SearchIndex& index, Embedder& embedder);

/// Renders the refinement template with `{information}` = JSON array of the
/// candidates' serialized attributes (in candidate order) and `{query}`.
std::string build_refinement_prompt(const PromptTemplate& tmpl, const Query& query,
                                    std::span<const Candidate> candidates);

struct RefinementResult {
  /// (candidate id, reason) in the model's order.
  std::vector<std::pair<std::string, std::string>> picks;
  /// Names the model returned that match no remaining candidate.
  std::vector<std::string> unmatched_names;
};

/// Extracts the first top-level {...} block of a model reply and maps its
/// keys onto candidates. JSON is tried first, then a Python dict literal.
/// Names match case-insensitively after whitespace normalisation, each to
/// the first not-yet-matched candidate with that name. Returns nullopt when
/// no dict can be read.
std::optional<RefinementResult> parse_refinement_response(std::string_view text,
                                                          std::span<const Candidate> candidates);

/// Filter, prompt, parse. Empty candidate lists skip the chat call. Chat
/// errors and unreadable replies produce a degraded answer that recommends
/// every candidate in similarity order.
QueryAnswer answer_query(const Query& query, const SearchIndex& index, Embedder& embedder, ChatProvider& chat,
                         const PromptTemplate& refine_template);

}  // namespace semask
