#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semask/geocoder.hpp"
#include "semask/object.hpp"
#include "semask/prompts.hpp"
#include "semask/providers.hpp"

namespace semask {

/// A rejected input line.
class RecordError : public std::runtime_error {
 public:
  RecordError(std::size_t line, std::string field, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  /// Offending field, empty for whole-line problems such as bad JSON.
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Parses one Yelp-style business record (pre-joined with its tips).
///
/// Mandatory: business_id, name (strings), latitude, longitude (numbers in
/// range). Optional, null treated as absent: address, city, state (text),
/// stars, tip_count, is_open (numbers), categories (comma-separated string),
/// hours (object day -> "H:M-H:M"), tips (array of strings). Attributes are
/// inserted in the order name, address, city, state, stars, tip_count,
/// is_open, categories, hours. Unknown fields are ignored.
GeoTextualObject parse_record(std::string_view line, std::size_t line_no = 1);

struct IngestReport {
  std::size_t parsed = 0;
  std::size_t rejected = 0;
  std::size_t summarized = 0;
  std::size_t summary_failures = 0;
  /// Whitespace-token mean over generated summaries.
  double mean_summary_tokens = 0.0;
  std::vector<std::pair<std::size_t, std::string>> errors;  // (line, message)
  std::vector<std::pair<std::string, std::string>> summary_errors;  // (id, message)

  ordered_json to_json() const;
};

struct IngestResult {
  std::vector<GeoTextualObject> objects;
  IngestReport report;
};

/// Parses a JSONL stream. Bad lines and duplicate ids are rejected into the
/// report, never repaired; blank lines are skipped.
IngestResult ingest_jsonl(std::istream& in);
IngestResult ingest_jsonl(const std::filesystem::path& path);

/// Fills city/county/suburb/neighborhood text attributes that are absent or
/// empty. Existing non-empty values are kept. Geocoder failures leave the
/// object unchanged and log a warning.
GeoTextualObject complete_address(GeoTextualObject obj, ReverseGeocoder& geocoder);

/// The summarisation prompt for `tips`, serialised as a bracketed list of
/// single-quoted items with internal quotes doubled.
std::string render_summarization_prompt(const PromptTemplate& tmpl, const std::vector<std::string>& tips);

struct RetryPolicy {
  int max_retries = 3;
  double backoff_initial_s = 0.5;
};

/// Asks `llm` for a summary of obj.tips and stores it in obj.tip_summary.
/// Returns nullopt without calling the provider when there are no tips.
/// Provider errors are retried per `retry`, then rethrown.
std::optional<std::string> summarize_tips(GeoTextualObject& obj, ChatProvider& llm, const PromptTemplate& tmpl,
                                          const RetryPolicy& retry = {});

struct SummarizeOptions {
  std::size_t parallelism = 4;
  RetryPolicy retry;
  /// Skip objects that already carry a summary.
  bool skip_existing = true;
};

/// Summarises every object with tips using up to `parallelism` concurrent
/// provider calls. Failures are recorded in `report`; those objects keep no
/// summary.
void summarize_corpus(std::vector<GeoTextualObject>& objects, ChatProvider& llm, const PromptTemplate& tmpl,
                      IngestReport& report, const SummarizeOptions& options = {});

}  // namespace semask
