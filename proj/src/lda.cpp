#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "semask/baselines.hpp"
#include "semask/rng.hpp"
#include "semask/text.hpp"

namespace semask {

namespace {

// Draws a topic from unnormalised weights.
std::size_t sample(std::vector<double>& weights, SeededRng& rng) {
  double total = 0.0;
  for (auto& w : weights) {
    total += w;
    w = total;
  }
  const double u = rng.uniform() * total;
  const auto it = std::upper_bound(weights.begin(), weights.end(), u);
  return it == weights.end() ? weights.size() - 1 : static_cast<std::size_t>(it - weights.begin());
}

std::vector<double> normalize_counts(const std::vector<std::uint32_t>& counts, std::size_t len, double alpha) {
  const double denom = static_cast<double>(len) + static_cast<double>(counts.size()) * alpha;
  std::vector<double> theta(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) theta[k] = (counts[k] + alpha) / denom;
  return theta;
}

}  // namespace

LdaModel LdaModel::fit(const std::vector<Document>& documents, const LdaParams& params) {
  if (params.topics < 2) throw std::invalid_argument("LDA needs at least two topics");
  if (!(params.beta > 0.0)) throw std::invalid_argument("LDA beta must be positive");

  LdaModel m;
  m.params_ = params;
  const std::size_t K = params.topics;
  const double alpha = params.effective_alpha();
  const double beta = params.beta;

  std::vector<std::vector<std::size_t>> words;
  for (const auto& doc : documents) {
    if (doc.tokens.empty()) {
      spdlog::warn("LDA: dropping empty document '{}'", doc.id);
      continue;
    }
    if (m.doc_index_.count(doc.id)) throw std::invalid_argument("LDA: duplicate document id " + doc.id);
    std::vector<std::size_t> ws;
    ws.reserve(doc.tokens.size());
    for (const auto& tok : doc.tokens) {
      auto [it, inserted] = m.vocab_.try_emplace(tok, m.vocab_.size());
      ws.push_back(it->second);
    }
    m.doc_index_.emplace(doc.id, m.doc_ids_.size());
    m.doc_ids_.push_back(doc.id);
    words.push_back(std::move(ws));
  }
  if (words.empty()) throw std::invalid_argument("LDA needs a non-empty corpus");

  const std::size_t V = m.vocab_.size();
  const double vbeta = static_cast<double>(V) * beta;
  m.topic_word_.assign(K * V, 0);
  m.topic_total_.assign(K, 0);
  std::vector<std::vector<std::uint32_t>> doc_topic(words.size(), std::vector<std::uint32_t>(K, 0));
  std::vector<std::vector<std::uint32_t>> z(words.size());

  SeededRng rng(params.seed);
  for (std::size_t d = 0; d < words.size(); ++d) {
    z[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      const auto k = rng.below(K);
      z[d][i] = static_cast<std::uint32_t>(k);
      ++doc_topic[d][k];
      ++m.topic_word_[k * V + words[d][i]];
      ++m.topic_total_[k];
    }
  }

  std::vector<double> weights(K);
  for (std::size_t it = 0; it < params.iterations; ++it) {
    for (std::size_t d = 0; d < words.size(); ++d) {
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const auto w = words[d][i];
        auto k = z[d][i];
        --doc_topic[d][k];
        --m.topic_word_[k * V + w];
        --m.topic_total_[k];
        for (std::size_t t = 0; t < K; ++t) {
          weights[t] = (doc_topic[d][t] + alpha) * (m.topic_word_[t * V + w] + beta) / (m.topic_total_[t] + vbeta);
        }
        k = static_cast<std::uint32_t>(sample(weights, rng));
        z[d][i] = k;
        ++doc_topic[d][k];
        ++m.topic_word_[k * V + w];
        ++m.topic_total_[k];
      }
    }
  }

  m.theta_.reserve(words.size());
  for (std::size_t d = 0; d < words.size(); ++d) m.theta_.push_back(normalize_counts(doc_topic[d], words[d].size(), alpha));
  return m;
}

const std::vector<double>* LdaModel::theta(std::string_view id) const {
  const auto it = doc_index_.find(std::string(id));
  return it == doc_index_.end() ? nullptr : &theta_[it->second];
}

std::vector<double> LdaModel::infer(const std::vector<std::string>& tokens) const {
  const std::size_t K = params_.topics;
  const std::size_t V = vocab_.size();
  const double alpha = params_.effective_alpha();
  const double beta = params_.beta;
  const double vbeta = static_cast<double>(V) * beta;

  std::vector<std::size_t> ws;
  std::uint64_t h = text::fnv1a64("");
  for (const auto& tok : tokens) {
    const auto it = vocab_.find(tok);
    if (it == vocab_.end()) continue;
    ws.push_back(it->second);
    h = (h ^ text::fnv1a64(tok)) * 0x100000001b3ULL;
  }
  std::vector<std::uint32_t> counts(K, 0);
  if (ws.empty()) return normalize_counts(counts, 0, alpha);

  SeededRng rng(params_.seed ^ h);
  std::vector<std::uint32_t> z(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    z[i] = static_cast<std::uint32_t>(rng.below(K));
    ++counts[z[i]];
  }
  std::vector<double> weights(K);
  for (std::size_t sweep = 0; sweep < params_.fold_in_sweeps; ++sweep) {
    for (std::size_t i = 0; i < ws.size(); ++i) {
      --counts[z[i]];
      for (std::size_t t = 0; t < K; ++t) {
        weights[t] = (counts[t] + alpha) * (topic_word_[t * V + ws[i]] + beta) / (topic_total_[t] + vbeta);
      }
      z[i] = static_cast<std::uint32_t>(sample(weights, rng));
      ++counts[z[i]];
    }
  }
  return normalize_counts(counts, ws.size(), alpha);
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("JS divergence needs equal-length distributions");
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    const double tp = p[i] > 0.0 ? p[i] * std::log(p[i] / m) : 0.0;
    const double tq = q[i] > 0.0 ? q[i] * std::log(q[i] / m) : 0.0;
    js += 0.5 * (tp + tq);
  }
  return std::max(js, 0.0);
}

std::vector<RankedId> lda_rank(const Query& query, const LdaModel& model,
                               std::span<const GeoTextualObject* const> objects) {
  const auto q = model.infer(text::tokenize(query.text()));
  std::vector<RankedId> out;
  out.reserve(objects.size());
  for (const auto* obj : objects) {
    const auto* theta = model.theta(obj->id);
    if (theta) {
      out.push_back({obj->id, -jensen_shannon(q, *theta)});
    } else {
      const auto folded = model.infer(text::tokenize(baseline_document(*obj)));
      out.push_back({obj->id, -jensen_shannon(q, folded)});
    }
  }
  sort_ranking(out);
  return out;
}

LdaModel fit_lda(const Corpus& corpus, const LdaParams& params) {
  std::vector<LdaModel::Document> docs;
  docs.reserve(corpus.size());
  for (const auto& obj : corpus) docs.push_back({obj.id, text::tokenize(baseline_document(obj))});
  return LdaModel::fit(docs, params);
}

}  // namespace semask
