#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "semask/embedding.hpp"
#include "semask/geo.hpp"

namespace semask {

using ordered_json = nlohmann::ordered_json;

struct Text {
  std::string value;
  friend bool operator==(const Text&, const Text&) = default;
};

struct Number {
  double value = 0.0;
  friend bool operator==(const Number&, const Number&) = default;
};

/// Non-empty list of category labels.
struct Category {
  std::vector<std::string> values;
  friend bool operator==(const Category&, const Category&) = default;
};

/// Opening hours keyed by English weekday name, kept in insertion order.
struct Hours {
  std::vector<std::pair<std::string, std::string>> days;
  friend bool operator==(const Hours&, const Hours&) = default;
};

using AttributeValue = std::variant<Text, Number, Category, Hours>;

/// Throws std::invalid_argument when a Category is empty or an Hours entry
/// uses an unknown day name or a malformed "H:M-H:M" span.
void validate_attribute(std::string_view key, const AttributeValue& value);

bool is_weekday_name(std::string_view day);

/// Insertion-ordered string -> AttributeValue map. Order is significant: it
/// is the corpus field order and is reproduced in every serialisation.
class AttributeMap {
 public:
  using Entry = std::pair<std::string, AttributeValue>;

  /// Inserts at the end, or replaces in place when the key exists.
  void set(std::string key, AttributeValue value);
  const AttributeValue* find(std::string_view key) const;
  /// The Text value for `key`, or nullptr when absent or not textual.
  const std::string* text(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  friend bool operator==(const AttributeMap&, const AttributeMap&) = default;

 private:
  std::vector<Entry> entries_;
};

/// A point of interest: location, ordered attributes, tips and derived data.
/// The name is stored both as a field and as the first "name" attribute.
struct GeoTextualObject {
  std::string id;
  std::string name;
  GeoPoint location{0.0, 0.0};
  AttributeMap attributes;
  std::vector<std::string> tips;
  std::optional<std::string> tip_summary;
  std::optional<EmbeddingVector> embedding;

  /// Creates an object whose attribute map starts with the name.
  static GeoTextualObject make(std::string id, std::string name, GeoPoint location);

  /// Throws std::invalid_argument on an empty id or no textual attribute.
  void validate() const;

  friend bool operator==(const GeoTextualObject&, const GeoTextualObject&) = default;
};

ordered_json attribute_to_json(const AttributeValue& value);
AttributeValue attribute_from_json(std::string_view key, const ordered_json& j);

/// Stable corpus record: id, name, location, attributes, tips, tip_summary,
/// embedding (the last two omitted when absent).
ordered_json object_to_json(const GeoTextualObject& obj, bool include_embedding = true);
GeoTextualObject object_from_json(const ordered_json& j);

/// Raw attributes plus the tip summary, as handed to a language model.
ordered_json object_attributes_json(const GeoTextualObject& obj);

/// The text that gets embedded: name, address, categories, hours and tip
/// summary, one per line.
std::string embedding_input(const GeoTextualObject& obj);

/// Immutable set of objects with unique ids, indexed for lookup.
class Corpus {
 public:
  Corpus() = default;
  /// Throws std::invalid_argument on duplicate ids or invalid objects.
  explicit Corpus(std::vector<GeoTextualObject> objects);

  std::size_t size() const noexcept { return objects_.size(); }
  bool empty() const noexcept { return objects_.empty(); }
  const std::vector<GeoTextualObject>& objects() const noexcept { return objects_; }
  const GeoTextualObject& at(std::size_t i) const { return objects_.at(i); }
  const GeoTextualObject* find(std::string_view id) const;

  auto begin() const noexcept { return objects_.begin(); }
  auto end() const noexcept { return objects_.end(); }

 private:
  std::vector<GeoTextualObject> objects_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

void write_corpus_jsonl(const std::string& path, const std::vector<GeoTextualObject>& objects);
std::vector<GeoTextualObject> read_corpus_jsonl(const std::string& path);

}  // namespace semask
