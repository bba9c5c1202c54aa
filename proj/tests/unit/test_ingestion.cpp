#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "../support/oracles.hpp"
#include "semask/ingestion.hpp"
#include "semask/mock_providers.hpp"

using namespace semask;

namespace {

std::string table1_line() {
  std::ifstream in(oracle::fixture("table1_record.jsonl"));
  std::string line;
  std::getline(in, line);
  return line;
}

const std::string& text_attr(const GeoTextualObject& o, std::string_view key) {
  const auto* t = o.attributes.text(key);
  REQUIRE(t != nullptr);
  return *t;
}

/// Fails the first `failures` calls, then echoes a fixed summary.
class FlakyChat final : public ChatProvider {
 public:
  explicit FlakyChat(int failures) : failures_(failures) {}
  std::string chat(std::span<const ChatMessage>) override {
    if (calls_++ < failures_) throw ProviderError("flaky");
    return "Short summary.";
  }
  int calls() const { return calls_; }

 private:
  int failures_;
  int calls_ = 0;
};

class ThrowingGeocoder final : public ReverseGeocoder {
 public:
  AddressEnrichment reverse(const GeoPoint&) override { throw GeocoderError("offline"); }
};

}  // namespace

TEST_CASE("the sample business record parses into ordered attributes") {
  const auto obj = parse_record(table1_line());
  CHECK(obj.id == "oaboaRBUgGjbo2kfUIKDLQ");
  CHECK(obj.name == "Mike's Ice Cream");
  CHECK(obj.location.lat() == 36.162649);
  CHECK(obj.location.lon() == -86.775973);
  std::vector<std::string> keys;
  for (const auto& [k, v] : obj.attributes) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"name", "address", "city", "state", "stars", "tip_count", "is_open",
                                         "categories", "hours"});
  CHECK(std::get<Number>(*obj.attributes.find("stars")).value == 1.5);
  CHECK(std::get<Category>(*obj.attributes.find("categories")).values ==
        std::vector<std::string>{"Ice Cream & Frozen Yogurt", "Fast Food"});
  const auto& hours = std::get<Hours>(*obj.attributes.find("hours")).days;
  REQUIRE(hours.size() == 2);
  CHECK(hours[0] == std::pair<std::string, std::string>{"Monday", "0:0-0:0"});
  CHECK(obj.tips == std::vector<std::string>{"Amazing ice cream! So creamy"});
  CHECK_FALSE(obj.tip_summary);
}

TEST_CASE("records with missing or mistyped mandatory fields are rejected") {
  auto field_of = [](const std::string& line) {
    try {
      parse_record(line, 7);
    } catch (const RecordError& e) {
      CHECK(e.line() == 7);
      return e.field();
    }
    return std::string("<accepted>");
  };
  CHECK(field_of(R"({"name": "A", "latitude": 1, "longitude": 2})") == "business_id");
  CHECK(field_of(R"({"business_id": "x", "latitude": 1, "longitude": 2})") == "name");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "longitude": 2})") == "latitude");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "latitude": "1", "longitude": 2})") == "latitude");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "latitude": 91, "longitude": 2})") == "latitude");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "latitude": 1, "longitude": 181})") == "longitude");
  CHECK(field_of(R"({"business_id": "", "name": "A", "latitude": 1, "longitude": 2})") == "business_id");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "latitude": 1, "longitude": 2, "hours": {"Funday": "1:0-2:0"}})") ==
        "hours");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "latitude": 1, "longitude": 2, "tips": [1]})") == "tips");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "latitude": 1, "longitude": 2, "stars": "five"})") == "stars");
  CHECK(field_of("{not json") == "");
  CHECK(field_of("[1, 2]") == "");
  CHECK(field_of(R"({"business_id": "x", "name": "A", "latitude": 1, "longitude": 2, "stars": null, "extra": 1})") ==
        "<accepted>");
}

TEST_CASE("ingest_jsonl reports bad lines and duplicates without repairing them") {
  std::stringstream in;
  in << table1_line() << "\n\n"
     << "{broken\n"
     << table1_line() << "\n"
     << R"({"business_id": "b2", "name": "Other", "latitude": 36.1, "longitude": -86.7})" << "\n";
  const auto result = ingest_jsonl(in);
  REQUIRE(result.objects.size() == 2);
  CHECK(result.objects[0].id == "oaboaRBUgGjbo2kfUIKDLQ");
  CHECK(result.objects[1].id == "b2");
  CHECK(result.report.parsed == 2);
  CHECK(result.report.rejected == 2);
  REQUIRE(result.report.errors.size() == 2);
  CHECK(result.report.errors[0].first == 3);
  CHECK(result.report.errors[1].first == 4);
  CHECK(result.report.errors[1].second.find("duplicate") != std::string::npos);
  const auto j = result.report.to_json();
  CHECK(j["parsed"] == 2);
  CHECK(j["rejected"] == 2);
  CHECK_THROWS(ingest_jsonl(std::filesystem::path("/nonexistent/input.jsonl")));
}

TEST_CASE("address completion fills only absent or empty fields") {
  auto geo = OfflineGeocoder::load(oracle::fixture("geocoder_table.json"));
  auto obj = parse_record(table1_line());
  obj.attributes.set("county", Text{""});
  const auto done = complete_address(obj, geo);
  CHECK(text_attr(done, "city") == "Nashville");
  CHECK(text_attr(done, "county") == "Davidson County");
  CHECK(text_attr(done, "suburb") == "Downtown");
  CHECK(text_attr(done, "neighborhood") == "Lower Broadway");

  auto kept = obj;
  kept.attributes.set("city", Text{"Music City"});
  CHECK(text_attr(complete_address(kept, geo), "city") == "Music City");

  // The broad entry has empty suburb and neighborhood, which must not be written.
  auto outer = GeoTextualObject::make("o", "Outer", GeoPoint(36.3, -86.6));
  const auto outer_done = complete_address(outer, geo);
  CHECK(text_attr(outer_done, "county") == "Davidson County");
  CHECK_FALSE(outer_done.attributes.contains("suburb"));

  auto nowhere = GeoTextualObject::make("n", "Nowhere", GeoPoint(10, 10));
  CHECK(complete_address(nowhere, geo) == nowhere);
  ThrowingGeocoder failing;
  CHECK(complete_address(obj, failing) == obj);
}

TEST_CASE("http reverse geocoder reads a nominatim-style address") {
  httplib::Server server;
  std::string seen_query;
  server.Get("/reverse", [&](const httplib::Request& req, httplib::Response& res) {
    seen_query = req.get_param_value("format");
    if (req.get_param_value("lat").rfind("36.1", 0) == 0) {
      res.set_content(R"({"address": {"town": "Nashville", "county": "Davidson County", "neighbourhood": "SoBro"}})",
                      "application/json");
    } else {
      res.set_content(R"({"error": "Unable to geocode"})", "application/json");
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpReverseGeocoder geo("http://127.0.0.1:" + std::to_string(port));
  const auto names = geo.reverse(GeoPoint(36.16, -86.77));
  CHECK(seen_query == "jsonv2");
  CHECK(names.city == "Nashville");
  CHECK(names.neighborhood == "SoBro");
  CHECK_FALSE(names.suburb);
  CHECK_THROWS_AS(geo.reverse(GeoPoint(10, 10)), GeocoderError);

  server.stop();
  t.join();
  CHECK_THROWS_AS(geo.reverse(GeoPoint(36.16, -86.77)), GeocoderError);
}

TEST_CASE("summarisation prompt lists tips as a python literal") {
  const PromptTemplate tmpl("Tips: {tips}");
  CHECK(render_summarization_prompt(tmpl, {"Great coffee", "Mike's is 'ok'"}) ==
        R"(Tips: ['Great coffee', 'Mike''s is ''ok'''])");
}

TEST_CASE("summarize_tips skips tipless objects and retries provider errors") {
  const PromptTemplate tmpl("{tips}");
  auto none = GeoTextualObject::make("a", "A", GeoPoint(0, 0));
  FlakyChat never(0);
  CHECK_FALSE(summarize_tips(none, never, tmpl));
  CHECK(never.calls() == 0);

  auto obj = parse_record(table1_line());
  FlakyChat flaky(2);
  CHECK(summarize_tips(obj, flaky, tmpl, {3, 0.0}) == "Short summary.");
  CHECK(obj.tip_summary == "Short summary.");
  CHECK(flaky.calls() == 3);

  FlakyChat hopeless(10);
  auto other = parse_record(table1_line());
  CHECK_THROWS_AS(summarize_tips(other, hopeless, tmpl, {2, 0.0}), ProviderError);
  CHECK(hopeless.calls() == 3);
  CHECK_FALSE(other.tip_summary);
}

TEST_CASE("corpus summarisation is deterministic across parallelism") {
  const auto prompts = PromptSet::load();
  std::vector<GeoTextualObject> base;
  SeededRng rng(5);
  const std::vector<std::string> vocab = {"espresso", "latte", "wifi", "quiet", "pastries", "patio", "friendly"};
  for (int i = 0; i < 40; ++i) {
    auto o = GeoTextualObject::make("id" + std::to_string(i), "Shop " + std::to_string(i), GeoPoint(36, -86));
    const auto n_tips = rng.below(4);
    for (std::size_t t = 0; t < n_tips; ++t) {
      o.tips.push_back(vocab[rng.below(vocab.size())] + " and " + vocab[rng.below(vocab.size())]);
    }
    base.push_back(o);
  }
  MockChatProvider mock;
  auto serial = base;
  auto parallel = base;
  IngestReport r1, r2;
  summarize_corpus(serial, mock, prompts.summarize, r1, {1});
  summarize_corpus(parallel, mock, prompts.summarize, r2, {4});
  CHECK(serial == parallel);
  CHECK(r1.summarized == r2.summarized);
  std::size_t with_tips = 0;
  for (const auto& o : base) with_tips += !o.tips.empty();
  CHECK(r1.summarized == with_tips);
  CHECK(r1.mean_summary_tokens > 0);
  for (const auto& o : serial) CHECK(o.tip_summary.has_value() == !o.tips.empty());

  FailingChatProvider failing;
  auto failed = base;
  IngestReport r3;
  summarize_corpus(failed, failing, prompts.summarize, r3, {2, {0, 0.0}});
  CHECK(r3.summary_errors.size() == with_tips);
  CHECK(r3.summarized == 0);
  CHECK(std::is_sorted(r3.summary_errors.begin(), r3.summary_errors.end()));
}
