#include "semask/ingestion.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "semask/pyliteral.hpp"
#include "semask/text.hpp"

namespace semask {

namespace {

using json = nlohmann::json;

bool present(const json& j, const char* key) { return j.contains(key) && !j[key].is_null(); }

std::string require_string(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw RecordError(line, key, fmt::format("missing mandatory field '{}'", key));
  if (!j[key].is_string()) throw RecordError(line, key, fmt::format("field '{}' must be a string", key));
  return j[key].get<std::string>();
}

double require_number(const json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) throw RecordError(line, key, fmt::format("missing mandatory field '{}'", key));
  if (!j[key].is_number()) throw RecordError(line, key, fmt::format("field '{}' must be a number", key));
  return j[key].get<double>();
}

void optional_text(const json& j, const char* key, std::size_t line, AttributeMap& attrs) {
  if (!present(j, key)) return;
  if (!j[key].is_string()) throw RecordError(line, key, fmt::format("field '{}' must be a string", key));
  attrs.set(key, Text{j[key].get<std::string>()});
}

void optional_number(const json& j, const char* key, std::size_t line, AttributeMap& attrs) {
  if (!present(j, key)) return;
  const auto& v = j[key];
  if (v.is_boolean()) {
    attrs.set(key, Number{v.get<bool>() ? 1.0 : 0.0});
  } else if (v.is_number()) {
    attrs.set(key, Number{v.get<double>()});
  } else {
    throw RecordError(line, key, fmt::format("field '{}' must be a number", key));
  }
}

std::vector<std::string> split_categories(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    auto part = text::trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!part.empty()) out.push_back(std::move(part));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::size_t whitespace_tokens(const std::string& s) {
  std::istringstream in(s);
  std::size_t n = 0;
  for (std::string t; in >> t;) ++n;
  return n;
}

}  // namespace

RecordError::RecordError(std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(fmt::format("line {}: {}", line, message)), line_(line), field_(std::move(field)) {}

GeoTextualObject parse_record(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw RecordError(line_no, "", fmt::format("malformed JSON: {}", e.what()));
  }
  if (!j.is_object()) throw RecordError(line_no, "", "record is not a JSON object");

  const auto id = require_string(j, "business_id", line_no);
  if (id.empty()) throw RecordError(line_no, "business_id", "field 'business_id' is empty");
  const auto name = require_string(j, "name", line_no);
  const double lat = require_number(j, "latitude", line_no);
  const double lon = require_number(j, "longitude", line_no);
  if (!(lat >= -90.0 && lat <= 90.0)) {
    throw RecordError(line_no, "latitude", fmt::format("latitude {} outside [-90, 90]", lat));
  }
  if (!(lon >= -180.0 && lon <= 180.0)) {
    throw RecordError(line_no, "longitude", fmt::format("longitude {} outside [-180, 180]", lon));
  }

  auto obj = GeoTextualObject::make(id, name, GeoPoint(lat, lon));
  auto& attrs = obj.attributes;
  optional_text(j, "address", line_no, attrs);
  optional_text(j, "city", line_no, attrs);
  optional_text(j, "state", line_no, attrs);
  optional_number(j, "stars", line_no, attrs);
  optional_number(j, "tip_count", line_no, attrs);
  optional_number(j, "is_open", line_no, attrs);

  if (present(j, "categories")) {
    if (!j["categories"].is_string()) throw RecordError(line_no, "categories", "field 'categories' must be a string");
    auto cats = split_categories(j["categories"].get<std::string>());
    if (!cats.empty()) attrs.set("categories", Category{std::move(cats)});
  }

  if (present(j, "hours")) {
    if (!j["hours"].is_object()) throw RecordError(line_no, "hours", "field 'hours' must be an object");
    Hours hours;
    for (const auto& [day, span] : j["hours"].items()) {
      if (!span.is_string()) throw RecordError(line_no, "hours", fmt::format("hours for '{}' must be a string", day));
      hours.days.emplace_back(day, span.get<std::string>());
    }
    try {
      validate_attribute("hours", hours);
    } catch (const std::invalid_argument& e) {
      throw RecordError(line_no, "hours", e.what());
    }
    if (!hours.days.empty()) attrs.set("hours", std::move(hours));
  }

  if (present(j, "tips")) {
    if (!j["tips"].is_array()) throw RecordError(line_no, "tips", "field 'tips' must be an array of strings");
    for (const auto& t : j["tips"]) {
      if (!t.is_string()) throw RecordError(line_no, "tips", "field 'tips' must be an array of strings");
      obj.tips.push_back(t.get<std::string>());
    }
  }
  return obj;
}

ordered_json IngestReport::to_json() const {
  ordered_json j;
  j["parsed"] = parsed;
  j["rejected"] = rejected;
  j["summarized"] = summarized;
  j["summary_failures"] = summary_failures;
  j["mean_summary_tokens"] = mean_summary_tokens;
  j["errors"] = ordered_json::array();
  for (const auto& [line, msg] : errors) j["errors"].push_back({{"line", line}, {"message", msg}});
  j["summary_errors"] = ordered_json::array();
  for (const auto& [id, msg] : summary_errors) j["summary_errors"].push_back({{"id", id}, {"message", msg}});
  return j;
}

IngestResult ingest_jsonl(std::istream& in) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto obj = parse_record(line, line_no);
      if (!seen.insert(obj.id).second) {
        throw RecordError(line_no, "business_id", fmt::format("duplicate business_id '{}'", obj.id));
      }
      result.objects.push_back(std::move(obj));
      ++result.report.parsed;
    } catch (const RecordError& e) {
      ++result.report.rejected;
      result.report.errors.emplace_back(e.line(), e.what());
    }
  }
  return result;
}

IngestResult ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  return ingest_jsonl(in);
}

GeoTextualObject complete_address(GeoTextualObject obj, ReverseGeocoder& geocoder) {
  AddressEnrichment names;
  try {
    names = geocoder.reverse(obj.location);
  } catch (const std::exception& e) {
    spdlog::warn("address completion skipped for '{}': {}", obj.id, e.what());
    return obj;
  }
  auto fill = [&obj](const char* key, const std::optional<std::string>& value) {
    if (!value || value->empty()) return;
    if (const auto* existing = obj.attributes.find(key)) {
      const auto* t = std::get_if<Text>(existing);
      if (!t || !t->value.empty()) return;
    }
    obj.attributes.set(key, Text{*value});
  };
  fill("city", names.city);
  fill("county", names.county);
  fill("suburb", names.suburb);
  fill("neighborhood", names.neighborhood);
  return obj;
}

std::string render_summarization_prompt(const PromptTemplate& tmpl, const std::vector<std::string>& tips) {
  return tmpl.render({{"tips", pyliteral::render_string_list(tips)}});
}

std::optional<std::string> summarize_tips(GeoTextualObject& obj, ChatProvider& llm, const PromptTemplate& tmpl,
                                          const RetryPolicy& retry) {
  if (obj.tips.empty()) return std::nullopt;
  const auto prompt = render_summarization_prompt(tmpl, obj.tips);
  for (int attempt = 0;; ++attempt) {
    try {
      auto summary = llm.complete(prompt);
      obj.tip_summary = summary;
      return summary;
    } catch (const ProviderError& e) {
      if (attempt >= retry.max_retries) throw;
      spdlog::warn("summarising '{}' failed (attempt {}): {}", obj.id, attempt + 1, e.what());
      std::this_thread::sleep_for(std::chrono::duration<double>(retry.backoff_initial_s * std::pow(2.0, attempt)));
    }
  }
}

void summarize_corpus(std::vector<GeoTextualObject>& objects, ChatProvider& llm, const PromptTemplate& tmpl,
                      IngestReport& report, const SummarizeOptions& options) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t token_sum = 0;
  std::size_t produced = 0;

  auto worker = [&] {
    for (std::size_t i = next++; i < objects.size(); i = next++) {
      auto& obj = objects[i];
      if (obj.tips.empty() || (options.skip_existing && obj.tip_summary)) continue;
      try {
        const auto summary = summarize_tips(obj, llm, tmpl, options.retry);
        std::lock_guard lock(mu);
        ++produced;
        token_sum += whitespace_tokens(*summary);
      } catch (const std::exception& e) {
        obj.tip_summary.reset();
        std::lock_guard lock(mu);
        report.summary_errors.emplace_back(obj.id, e.what());
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.parallelism, objects.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // Stable report order regardless of scheduling.
  std::sort(report.summary_errors.begin(), report.summary_errors.end());
  report.summarized += produced;
  report.summary_failures = report.summary_errors.size();
  if (produced) report.mean_summary_tokens = static_cast<double>(token_sum) / static_cast<double>(produced);
}

}  // namespace semask
