#include "semask/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace semask {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<Recommendation> fallback_recommendations(const std::vector<Candidate>& candidates) {
  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.push_back({candidates[i].id, candidates[i].name, std::string(kFallbackReason), i});
  }
  return out;
}

}  // namespace

void embed_objects(std::vector<GeoTextualObject>& objects, Embedder& embedder, bool overwrite) {
  for (auto& obj : objects) {
    if (obj.embedding && !overwrite) continue;
    obj.embedding = embedder.embed(embedding_input(obj));
  }
}

SearchIndex SearchIndex::build(std::vector<GeoTextualObject> objects, Embedder& embedder, const HnswParams& params,
                               double cell_size_deg) {
  embed_objects(objects, embedder);
  HnswIndex vectors(embedder.dimension(), params);
  for (auto& obj : objects) {
    vectors.insert(obj.id, *obj.embedding);
    obj.embedding.reset();
  }
  auto grid = GridIndex::build(objects, cell_size_deg);
  return SearchIndex(Corpus(std::move(objects)), std::move(grid), std::move(vectors));
}

SearchIndex SearchIndex::attach(std::vector<GeoTextualObject> objects, HnswIndex vectors, double cell_size_deg) {
  if (vectors.size() != objects.size()) {
    throw std::invalid_argument(
        fmt::format("vector index holds {} ids but the corpus has {} objects", vectors.size(), objects.size()));
  }
  for (auto& obj : objects) {
    if (!vectors.contains(obj.id)) {
      throw std::invalid_argument(fmt::format("object '{}' is missing from the vector index", obj.id));
    }
    obj.embedding.reset();
  }
  auto grid = GridIndex::build(objects, cell_size_deg);
  return SearchIndex(Corpus(std::move(objects)), std::move(grid), std::move(vectors));
}

std::string serialize_candidate_attributes(const GeoTextualObject& obj) {
  return object_attributes_json(obj).dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

std::vector<Candidate> filter_stage(const Query& query, const SearchIndex& index, Embedder& embedder) {
  const auto allowed = index.grid().range_query(query.range());
  if (allowed.empty()) return {};
  const auto q = embedder.embed(query.text());
  const auto hits = index.vectors().knn_within(q, query.k(), allowed);
  std::vector<Candidate> out;
  out.reserve(hits.size());
  for (const auto& h : hits) {
    const auto* obj = index.corpus().find(h.id);
    if (!obj) continue;
    out.push_back({obj->id, obj->name, h.similarity, serialize_candidate_attributes(*obj)});
  }
  return out;
}

std::string build_refinement_prompt(const PromptTemplate& tmpl, const Query& query,
                                    std::span<const Candidate> candidates) {
  std::string info = "[";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i) info += ",";
    info += candidates[i].serialized_attributes;
  }
  info += "]";
  return tmpl.render({{"information", info}, {"query", query.text()}});
}

QueryAnswer answer_query(const Query& query, const SearchIndex& index, Embedder& embedder, ChatProvider& chat,
                         const PromptTemplate& refine_template) {
  QueryAnswer answer;
  const auto t0 = Clock::now();
  auto candidates = filter_stage(query, index, embedder);
  answer.timings.filter_ms = ms_since(t0);

  if (!candidates.empty()) {
    const auto t1 = Clock::now();
    std::optional<RefinementResult> parsed;
    try {
      const auto reply = chat.complete(build_refinement_prompt(refine_template, query, candidates));
      parsed = parse_refinement_response(reply, candidates);
      if (!parsed) answer.degraded_cause = "refinement reply contained no readable dictionary";
    } catch (const std::exception& e) {
      answer.degraded_cause = fmt::format("refinement call failed: {}", e.what());
    }
    answer.timings.refine_ms = ms_since(t1);

    if (!parsed) {
      answer.degraded = true;
      answer.recommended = fallback_recommendations(candidates);
      spdlog::warn("degraded answer: {}", answer.degraded_cause);
    } else {
      std::unordered_set<std::string> picked;
      for (const auto& [id, reason] : parsed->picks) {
        const auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.id == id; });
        answer.recommended.push_back({id, it->name, reason, answer.recommended.size()});
        picked.insert(id);
      }
      for (auto& c : candidates) {
        if (!picked.count(c.id)) answer.filtered_out.push_back(std::move(c));
      }
      if (!parsed->unmatched_names.empty()) {
        spdlog::info("refinement named {} unknown location(s); ignored", parsed->unmatched_names.size());
      }
    }
  }

  spdlog::info(
      R"({{"event":"query","k":{},"recommended":{},"filtered_out":{},"degraded":{},"filter_ms":{:.3f},"refine_ms":{:.3f}}})",
      query.k(), answer.recommended.size(), answer.filtered_out.size(), answer.degraded, answer.timings.filter_ms,
      answer.timings.refine_ms);
  return answer;
}

}  // namespace semask
