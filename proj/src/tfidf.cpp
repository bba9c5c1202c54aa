#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "semask/baselines.hpp"
#include "semask/text.hpp"

namespace semask {

void sort_ranking(std::vector<RankedId>& ranking) {
  std::sort(ranking.begin(), ranking.end(), [](const RankedId& a, const RankedId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
}

std::string baseline_document(const GeoTextualObject& obj) {
  std::string out;
  auto add = [&out](std::string_view s) {
    if (s.empty()) return;
    if (!out.empty()) out.push_back('\n');
    out.append(s);
  };
  for (const auto& [key, value] : obj.attributes) {
    if (const auto* t = std::get_if<Text>(&value)) add(t->value);
  }
  if (obj.tip_summary) add(*obj.tip_summary);
  for (const auto& [key, value] : obj.attributes) {
    if (const auto* c = std::get_if<Category>(&value)) {
      for (const auto& label : c->values) add(label);
    }
  }
  return out;
}

TfIdfModel TfIdfModel::fit(const std::vector<std::vector<std::string>>& documents) {
  if (documents.empty()) throw std::invalid_argument("TF-IDF needs at least one document");
  TfIdfModel m;
  m.n_docs_ = documents.size();
  for (const auto& doc : documents) {
    std::vector<std::size_t> seen;
    for (const auto& tok : doc) {
      auto [it, inserted] = m.vocabulary_.try_emplace(tok, m.df_.size());
      if (inserted) m.df_.push_back(0);
      seen.push_back(it->second);
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto t : seen) ++m.df_[t];
  }
  return m;
}

std::optional<std::size_t> TfIdfModel::term_index(std::string_view term) const {
  auto it = vocabulary_.find(std::string(term));
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

std::size_t TfIdfModel::df(std::string_view term) const {
  const auto idx = term_index(term);
  return idx ? df_[*idx] : 0;
}

double TfIdfModel::idf(std::size_t term_index) const {
  return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_.at(term_index)))) + 1.0;
}

TfIdfModel::SparseVector TfIdfModel::vectorize(const std::vector<std::string>& tokens) const {
  std::map<std::size_t, double> tf;
  for (const auto& tok : tokens) {
    if (auto idx = term_index(tok)) tf[*idx] += 1.0;
  }
  SparseVector out;
  out.reserve(tf.size());
  for (const auto& [idx, count] : tf) out.emplace_back(idx, count * idf(idx));
  return out;
}

double cosine(const TfIdfModel::SparseVector& a, const TfIdfModel::SparseVector& b) {
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [i, w] : a) na += w * w;
  for (const auto& [i, w] : b) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  double num = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      num += a[i].second * b[j].second;
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return num / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<RankedId> tfidf_rank(const Query& query, std::span<const GeoTextualObject* const> objects) {
  if (objects.empty()) return {};
  std::vector<std::vector<std::string>> docs;
  docs.reserve(objects.size());
  for (const auto* obj : objects) docs.push_back(text::tokenize(baseline_document(*obj)));
  const auto model = TfIdfModel::fit(docs);
  const auto q = model.vectorize(text::tokenize(query.text()));
  std::vector<RankedId> out;
  out.reserve(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) out.push_back({objects[i]->id, cosine(q, model.vectorize(docs[i]))});
  sort_ranking(out);
  return out;
}

}  // namespace semask
