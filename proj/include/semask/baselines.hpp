#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "semask/geo.hpp"
#include "semask/object.hpp"

namespace semask {

struct RankedId {
  std::string id;
  double score = 0.0;

  friend bool operator==(const RankedId&, const RankedId&) = default;
};

/// Sorts by score descending, ties by ascending id.
void sort_ranking(std::vector<RankedId>& ranking);

/// Text attribute values (in attribute order), the tip summary and the
/// category labels, joined by newlines.
std::string baseline_document(const GeoTextualObject& obj);

// ---------------------------------------------------------------- TF-IDF

/// Document frequencies over a fitted collection.
/// weight(t, d) = tf(t, d) * (ln((1 + N) / (1 + df(t))) + 1)
class TfIdfModel {
 public:
  using SparseVector = std::vector<std::pair<std::size_t, double>>;  // sorted by term index

  /// Requires at least one document.
  static TfIdfModel fit(const std::vector<std::vector<std::string>>& documents);

  std::size_t document_count() const noexcept { return n_docs_; }
  std::size_t vocabulary_size() const noexcept { return df_.size(); }
  std::optional<std::size_t> term_index(std::string_view term) const;
  std::size_t df(std::string_view term) const;
  double idf(std::size_t term_index) const;

  /// Out-of-vocabulary tokens are dropped.
  SparseVector vectorize(const std::vector<std::string>& tokens) const;

 private:
  std::unordered_map<std::string, std::size_t> vocabulary_;
  std::vector<std::size_t> df_;
  std::size_t n_docs_ = 0;
};

double cosine(const TfIdfModel::SparseVector& a, const TfIdfModel::SparseVector& b);

/// Fits TF-IDF over `objects` (the objects in the query range) and ranks
/// them by cosine to the query text. No overlap scores 0.
std::vector<RankedId> tfidf_rank(const Query& query, std::span<const GeoTextualObject* const> objects);

// ------------------------------------------------------------------- LDA

struct LdaParams {
  std::size_t topics = 50;
  /// Document-topic prior; 0 selects 50 / topics.
  double alpha = 0.0;
  double beta = 0.01;
  std::size_t iterations = 500;
  std::size_t fold_in_sweeps = 50;
  std::uint64_t seed = 7;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(topics); }
};

/// Topic model trained by collapsed Gibbs sampling.
class LdaModel {
 public:
  struct Document {
    std::string id;
    std::vector<std::string> tokens;
  };

  /// Empty documents are dropped with a warning. Requires a non-empty
  /// corpus after dropping and topics >= 2.
  static LdaModel fit(const std::vector<Document>& documents, const LdaParams& params = {});

  const LdaParams& params() const noexcept { return params_; }
  std::size_t topics() const noexcept { return params_.topics; }
  std::size_t vocabulary_size() const noexcept { return vocab_.size(); }
  std::size_t document_count() const noexcept { return doc_ids_.size(); }
  const std::vector<std::string>& document_ids() const noexcept { return doc_ids_; }

  /// (count_{d,k} + alpha) / (len_d + K alpha) for a trained document.
  const std::vector<double>* theta(std::string_view id) const;
  const std::vector<std::vector<double>>& thetas() const noexcept { return theta_; }

  /// Folds unseen tokens in with topic-word counts frozen. No in-vocabulary
  /// token gives the uniform distribution. Deterministic for equal input.
  std::vector<double> infer(const std::vector<std::string>& tokens) const;

 private:
  LdaParams params_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::vector<std::vector<double>> theta_;
  // Frozen after training.
  std::vector<std::uint32_t> topic_word_;  // [k * V + w]
  std::vector<std::uint32_t> topic_total_;
};

/// Jensen-Shannon divergence (natural log) between two distributions.
double jensen_shannon(std::span<const double> p, std::span<const double> q);

/// Score = -JS(theta_query, theta_doc). Objects unknown to the model are
/// folded in from their baseline documents.
std::vector<RankedId> lda_rank(const Query& query, const LdaModel& model,
                               std::span<const GeoTextualObject* const> objects);

/// Fits over every object's baseline document.
LdaModel fit_lda(const Corpus& corpus, const LdaParams& params = {});

}  // namespace semask
