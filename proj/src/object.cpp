#include "semask/object.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace semask {

namespace {

constexpr std::array<std::string_view, 7> kWeekdays = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                       "Friday", "Saturday", "Sunday"};

// "H:M" with 1-2 digit hour 0..24 and 1-2 digit minute 0..59.
bool parse_clock(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) return false;
  auto digits = [](std::string_view d, int max) {
    if (d.empty() || d.size() > 2) return false;
    int v = 0;
    for (char c : d) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
      v = v * 10 + (c - '0');
    }
    return v <= max;
  };
  return digits(s.substr(0, colon), 24) && digits(s.substr(colon + 1), 59);
}

bool is_hours_span(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) return false;
  return parse_clock(s.substr(0, dash)) && parse_clock(s.substr(dash + 1));
}

}  // namespace

bool is_weekday_name(std::string_view day) {
  for (auto d : kWeekdays) {
    if (d == day) return true;
  }
  return false;
}

void validate_attribute(std::string_view key, const AttributeValue& value) {
  if (const auto* cat = std::get_if<Category>(&value)) {
    if (cat->values.empty()) {
      throw std::invalid_argument(fmt::format("attribute '{}': empty category list", key));
    }
  } else if (const auto* hours = std::get_if<Hours>(&value)) {
    for (const auto& [day, span] : hours->days) {
      if (!is_weekday_name(day)) {
        throw std::invalid_argument(fmt::format("attribute '{}': unknown day name '{}'", key, day));
      }
      if (!is_hours_span(span)) {
        throw std::invalid_argument(fmt::format("attribute '{}': malformed hours '{}' for {}", key, span, day));
      }
    }
  }
}

void AttributeMap::set(std::string key, AttributeValue value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

const AttributeValue* AttributeMap::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

const std::string* AttributeMap::text(std::string_view key) const {
  const auto* v = find(key);
  if (!v) return nullptr;
  const auto* t = std::get_if<Text>(v);
  return t ? &t->value : nullptr;
}

GeoTextualObject GeoTextualObject::make(std::string id, std::string name, GeoPoint location) {
  GeoTextualObject obj;
  obj.id = std::move(id);
  obj.name = name;
  obj.location = location;
  obj.attributes.set("name", Text{std::move(name)});
  return obj;
}

void GeoTextualObject::validate() const {
  if (id.empty()) throw std::invalid_argument("object id is empty");
  bool textual = false;
  for (const auto& [key, value] : attributes) {
    validate_attribute(key, value);
    textual = textual || std::holds_alternative<Text>(value);
  }
  if (!textual) {
    throw std::invalid_argument(fmt::format("object '{}' has no textual attribute", id));
  }
  if (embedding) EmbeddingVector::from_unit(std::vector<float>(embedding->values().begin(), embedding->values().end()));
}

ordered_json attribute_to_json(const AttributeValue& value) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Text>) {
          return v.value;
        } else if constexpr (std::is_same_v<T, Number>) {
          // Integral values print without a fractional part ("10", not "10.0").
          if (std::isfinite(v.value) && std::floor(v.value) == v.value && std::abs(v.value) < 1e15) {
            return static_cast<std::int64_t>(v.value);
          }
          return v.value;
        } else if constexpr (std::is_same_v<T, Category>) {
          return v.values;
        } else {
          ordered_json o = ordered_json::object();
          for (const auto& [day, span] : v.days) o[day] = span;
          return o;
        }
      },
      value);
}

AttributeValue attribute_from_json(std::string_view key, const ordered_json& j) {
  AttributeValue out;
  if (j.is_string()) {
    out = Text{j.get<std::string>()};
  } else if (j.is_number()) {
    out = Number{j.get<double>()};
  } else if (j.is_array()) {
    Category c;
    for (const auto& e : j) {
      if (!e.is_string()) throw std::invalid_argument(fmt::format("attribute '{}': non-string category", key));
      c.values.push_back(e.get<std::string>());
    }
    out = std::move(c);
  } else if (j.is_object()) {
    Hours h;
    for (const auto& [day, span] : j.items()) {
      if (!span.is_string()) throw std::invalid_argument(fmt::format("attribute '{}': non-string hours", key));
      h.days.emplace_back(day, span.get<std::string>());
    }
    out = std::move(h);
  } else {
    throw std::invalid_argument(fmt::format("attribute '{}': unsupported JSON type", key));
  }
  validate_attribute(key, out);
  return out;
}

ordered_json object_to_json(const GeoTextualObject& obj, bool include_embedding) {
  ordered_json j;
  j["id"] = obj.id;
  j["name"] = obj.name;
  j["location"] = {{"lat", obj.location.lat()}, {"lon", obj.location.lon()}};
  ordered_json attrs = ordered_json::object();
  for (const auto& [k, v] : obj.attributes) attrs[k] = attribute_to_json(v);
  j["attributes"] = std::move(attrs);
  j["tips"] = obj.tips;
  if (obj.tip_summary) j["tip_summary"] = *obj.tip_summary;
  if (include_embedding && obj.embedding) {
    j["embedding"] = std::vector<float>(obj.embedding->values().begin(), obj.embedding->values().end());
  }
  return j;
}

GeoTextualObject object_from_json(const ordered_json& j) {
  GeoTextualObject obj;
  obj.id = j.at("id").get<std::string>();
  obj.name = j.at("name").get<std::string>();
  const auto& loc = j.at("location");
  obj.location = GeoPoint(loc.at("lat").get<double>(), loc.at("lon").get<double>());
  for (const auto& [k, v] : j.at("attributes").items()) obj.attributes.set(k, attribute_from_json(k, v));
  if (j.contains("tips")) obj.tips = j.at("tips").get<std::vector<std::string>>();
  if (j.contains("tip_summary") && !j.at("tip_summary").is_null()) {
    obj.tip_summary = j.at("tip_summary").get<std::string>();
  }
  if (j.contains("embedding") && !j.at("embedding").is_null()) {
    obj.embedding = EmbeddingVector::from_unit(j.at("embedding").get<std::vector<float>>());
  }
  obj.validate();
  return obj;
}

ordered_json object_attributes_json(const GeoTextualObject& obj) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : obj.attributes) j[k] = attribute_to_json(v);
  if (obj.tip_summary) j["tip_summary"] = *obj.tip_summary;
  return j;
}

std::string embedding_input(const GeoTextualObject& obj) {
  std::string out = obj.name;
  auto line = [&out](std::string_view s) {
    if (s.empty()) return;
    out.push_back('\n');
    out.append(s);
  };
  if (const auto* addr = obj.attributes.text("address")) line(*addr);
  if (const auto* v = obj.attributes.find("categories")) {
    if (const auto* cat = std::get_if<Category>(v)) {
      std::string s;
      for (std::size_t i = 0; i < cat->values.size(); ++i) {
        if (i) s += ", ";
        s += cat->values[i];
      }
      line(s);
    }
  }
  if (const auto* v = obj.attributes.find("hours")) {
    if (const auto* hours = std::get_if<Hours>(v)) {
      std::string s;
      for (std::size_t i = 0; i < hours->days.size(); ++i) {
        if (i) s += "; ";
        s += hours->days[i].first + " " + hours->days[i].second;
      }
      line(s);
    }
  }
  if (obj.tip_summary) line(*obj.tip_summary);
  return out;
}

Corpus::Corpus(std::vector<GeoTextualObject> objects) : objects_(std::move(objects)) {
  by_id_.reserve(objects_.size());
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    objects_[i].validate();
    if (!by_id_.emplace(objects_[i].id, i).second) {
      throw std::invalid_argument(fmt::format("duplicate object id '{}'", objects_[i].id));
    }
  }
}

const GeoTextualObject* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &objects_[it->second];
}

void write_corpus_jsonl(const std::string& path, const std::vector<GeoTextualObject>& objects) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  for (const auto& obj : objects) out << object_to_json(obj).dump() << '\n';
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

std::vector<GeoTextualObject> read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open corpus '{}'", path));
  std::vector<GeoTextualObject> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(object_from_json(ordered_json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path, line_no, e.what()));
    }
  }
  return out;
}

}  // namespace semask
