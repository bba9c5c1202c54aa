#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include <httplib.h>

#include "../support/oracles.hpp"
#include "semask/mock_providers.hpp"
#include "semask/resources.hpp"
#include "semask/service.hpp"

using namespace semask;
using nlohmann::json;

namespace {

const std::string kRoot = std::filesystem::path(SEMASK_TEST_DIR).parent_path().string();

/// Enough of JSON Schema for the response schema: type, required,
/// properties, additionalProperties: false, items, minimum, maximum, minLength.
void validate(const json& schema, const json& value, const std::string& where, std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto t = schema["type"].get<std::string>();
    const bool ok = (t == "object" && value.is_object()) || (t == "array" && value.is_array()) ||
                    (t == "string" && value.is_string()) || (t == "boolean" && value.is_boolean()) ||
                    (t == "number" && value.is_number()) ||
                    (t == "integer" && (value.is_number_integer() || value.is_number_unsigned()));
    if (!ok) {
      errors.push_back(where + ": expected " + t);
      return;
    }
  }
  if (value.is_object()) {
    for (const auto& r : schema.value("required", json::array())) {
      if (!value.contains(r.get<std::string>())) errors.push_back(where + ": missing " + r.get<std::string>());
    }
    const auto props = schema.value("properties", json::object());
    for (const auto& [k, v] : value.items()) {
      if (props.contains(k)) {
        validate(props[k], v, where + "." + k, errors);
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"] == false) {
        errors.push_back(where + ": unexpected " + k);
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < value.size(); ++i) validate(schema["items"], value[i], where + "[" + std::to_string(i) + "]", errors);
  }
  if (value.is_number()) {
    if (schema.contains("minimum") && value.get<double>() < schema["minimum"].get<double>()) errors.push_back(where + ": below minimum");
    if (schema.contains("maximum") && value.get<double>() > schema["maximum"].get<double>()) errors.push_back(where + ": above maximum");
  }
  if (value.is_string() && schema.contains("minLength") && value.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
    errors.push_back(where + ": too short");
  }
}

std::vector<std::string> schema_errors(const json& body) {
  const auto schema = json::parse(read_file(kRoot + "/schemas/query_response.schema.json"));
  std::vector<std::string> errors;
  validate(schema, body, "$", errors);
  return errors;
}

struct Fixture {
  std::shared_ptr<HashingEmbedder> embedder = std::make_shared<HashingEmbedder>(256);
  std::shared_ptr<MockChatProvider> chat = std::make_shared<MockChatProvider>();
  ServiceCore core{load_regions(oracle::fixture("regions.json"))};

  Fixture() { init(core); }

  void init(ServiceCore& c) {
    auto index = std::make_shared<const SearchIndex>(
        SearchIndex::build(read_corpus_jsonl(oracle::fixture("fixture_corpus.jsonl")), *embedder));
    c.initialize(index, embedder, chat, PromptSet::load().refine);
  }
};

json body_of(const HttpResult& r) { return json::parse(r.body); }

json without_timings(json j) {
  j.erase("timings_ms");
  return j;
}

void check_error(const HttpResult& r, int status, const std::string& code) {
  CHECK(r.status == status);
  const auto j = body_of(r);
  CHECK(j["code"] == code);
  CHECK(j["message"].is_string());
  CHECK(j.size() == 2);
}

const std::string kGoldenRequest =
    R"({"region_name": "Downtown", "text": "A sports bar to watch football with chicken wings", "k": 5})";

}  // namespace

TEST_CASE("region catalogs are validated") {
  const auto regions = load_regions(oracle::fixture("regions.json"));
  REQUIRE(regions.size() == 3);
  CHECK(regions[0].name == "Downtown");
  CHECK(regions[2].name == "East Nashville");
  CHECK(regions_from_json(ordered_json::array()).empty());
  CHECK_THROWS(regions_from_json(ordered_json::parse(R"([{"name": "A", "rect": {"min_lat": 2, "max_lat": 1, "min_lon": 0, "max_lon": 1}}])")));
  CHECK_THROWS(regions_from_json(ordered_json::parse(
      R"([{"name": "A", "rect": {"min_lat": 0, "max_lat": 1, "min_lon": 0, "max_lon": 1}},
          {"name": "A", "rect": {"min_lat": 0, "max_lat": 1, "min_lon": 0, "max_lon": 1}}])")));
  CHECK_THROWS(regions_from_json(ordered_json::object()));
}

TEST_CASE("the service answers 503 until initialised") {
  ServiceCore core(load_regions(oracle::fixture("regions.json")));
  CHECK_FALSE(core.ready());
  check_error(core.query(kGoldenRequest), 503, "not_ready");
  check_error(core.object("fx-bean"), 503, "not_ready");
  const auto h = body_of(core.health());
  CHECK(h["status"] == "starting");
  CHECK(h["index_ready"] == false);
  CHECK(h["corpus_size"] == 0);
  CHECK(core.regions().status == 200);

  Fixture fx;
  fx.init(core);
  CHECK(core.ready());
  const auto ready = body_of(core.health());
  CHECK(ready["status"] == "ok");
  CHECK(ready["corpus_size"] == 7);
}

TEST_CASE("initialisation rejects an embedder of the wrong dimension") {
  ServiceCore core({});
  Fixture fx;
  auto index = std::make_shared<const SearchIndex>(
      SearchIndex::build(read_corpus_jsonl(oracle::fixture("fixture_corpus.jsonl")), *fx.embedder));
  CHECK_THROWS(core.initialize(index, std::make_shared<HashingEmbedder>(64), fx.chat, PromptSet::load().refine));
  CHECK_FALSE(core.ready());
}

TEST_CASE("regions are listed in catalog order") {
  Fixture fx;
  const auto j = body_of(fx.core.regions());
  REQUIRE(j.size() == 3);
  CHECK(j[0]["name"] == "Downtown");
  CHECK(j[1]["name"] == "The Gulch");
  CHECK(j[0]["rect"]["min_lat"] == 36.155);
  ServiceCore empty({});
  CHECK(body_of(empty.regions()) == json::array());
}

TEST_CASE("query validation errors") {
  Fixture fx;
  check_error(fx.core.query("{not json"), 400, "malformed_json");
  check_error(fx.core.query("[1]"), 400, "invalid_request");
  check_error(fx.core.query(R"({"text": "x"})"), 400, "invalid_request");
  check_error(fx.core.query(
                  R"({"text": "x", "region_name": "Downtown", "rect": {"min_lat": 0, "max_lat": 1, "min_lon": 0, "max_lon": 1}})"),
              400, "invalid_request");
  check_error(fx.core.query(R"({"text": "x", "region_name": "Atlantis"})"), 400, "unknown_region");
  check_error(fx.core.query(R"({"text": "x", "rect": {"min_lat": 5, "max_lat": 1, "min_lon": 0, "max_lon": 1}})"), 400,
              "invalid_rect");
  check_error(fx.core.query(R"({"text": "x", "rect": {"min_lat": 0, "max_lat": 1}})"), 400, "invalid_rect");
  check_error(fx.core.query(R"({"text": "x", "rect": {"min_lat": 0, "max_lat": 100, "min_lon": 0, "max_lon": 1}})"),
              400, "invalid_rect");
  check_error(fx.core.query(R"({"text": "   ", "region_name": "Downtown"})"), 400, "invalid_text");
  check_error(fx.core.query(R"({"text": 5, "region_name": "Downtown"})"), 400, "invalid_text");
  check_error(fx.core.query(R"({"text": "x", "region_name": "Downtown", "k": 0})"), 400, "invalid_k");
  check_error(fx.core.query(R"({"text": "x", "region_name": "Downtown", "k": 51})"), 400, "invalid_k");
  check_error(fx.core.query(R"({"text": "x", "region_name": "Downtown", "k": 2.5})"), 400, "invalid_k");
  CHECK(fx.core.query(R"({"text": "x", "region_name": "Downtown", "k": 50})").status == 200);
  CHECK(fx.core.query(R"({"text": "x", "region_name": "Downtown", "k": null})").status == 200);
}

TEST_CASE("object detail and not found") {
  Fixture fx;
  const auto r = fx.core.object("oaboaRBUgGjbo2kfUIKDLQ");
  REQUIRE(r.status == 200);
  const auto j = body_of(r);
  CHECK(j["name"] == "Mike's Ice Cream");
  CHECK(j["attributes"]["stars"] == 1.5);
  CHECK(j["attributes"]["categories"][0] == "Ice Cream & Frozen Yogurt");
  CHECK_FALSE(j.contains("embedding"));
  check_error(fx.core.object("missing"), 404, "not_found");
}

TEST_CASE("query responses follow the schema and stay inside the range") {
  Fixture fx;
  const auto r = fx.core.query(kGoldenRequest);
  REQUIRE(r.status == 200);
  const auto j = body_of(r);
  CHECK(schema_errors(j).empty());
  const auto rect = load_regions(oracle::fixture("regions.json"))[0].rect;
  for (const auto* list : {&j["recommended"], &j["filtered_out"]}) {
    for (const auto& e : *list) CHECK(contains(rect, GeoPoint(e["lat"].get<double>(), e["lon"].get<double>())));
  }
  CHECK(j["recommended"].size() + j["filtered_out"].size() <= 5);

  // The validator itself catches problems.
  auto broken = j;
  broken["degraded"] = "no";
  broken["extra"] = 1;
  broken.erase("filtered_out");
  CHECK(schema_errors(broken).size() == 3);
}

TEST_CASE("query response matches the reviewed snapshot") {
  Fixture fx;
  const auto r = fx.core.query(kGoldenRequest);
  REQUIRE(r.status == 200);
  const auto golden = json::parse(read_file(oracle::fixture("golden/query_response.json")));
  CHECK(without_timings(body_of(r)).dump(2) == golden.dump(2));
}

TEST_CASE("identical concurrent requests give identical bodies") {
  Fixture fx;
  std::vector<std::future<HttpResult>> futures;
  for (int i = 0; i < 8; ++i) {
    futures.push_back(std::async(std::launch::async, [&] { return fx.core.query(kGoldenRequest); }));
  }
  const auto first = without_timings(body_of(futures[0].get()));
  for (std::size_t i = 1; i < futures.size(); ++i) CHECK(without_timings(body_of(futures[i].get())) == first);
}

TEST_CASE("provider failures in the embedder map to 502") {
  class BrokenEmbedder final : public Embedder {
   public:
    EmbeddingVector embed(std::string_view) override { throw ProviderError("embedding backend down"); }
    std::size_t dimension() const noexcept override { return 256; }
  };
  Fixture fx;
  ServiceCore core(load_regions(oracle::fixture("regions.json")));
  auto index = std::make_shared<const SearchIndex>(
      SearchIndex::build(read_corpus_jsonl(oracle::fixture("fixture_corpus.jsonl")), *fx.embedder));
  core.initialize(index, std::make_shared<BrokenEmbedder>(), fx.chat, PromptSet::load().refine);
  check_error(core.query(kGoldenRequest), 502, "provider_error");

  ServiceCore degraded(load_regions(oracle::fixture("regions.json")));
  degraded.initialize(index, fx.embedder, std::make_shared<FailingChatProvider>(), PromptSet::load().refine);
  const auto r = degraded.query(kGoldenRequest);
  REQUIRE(r.status == 200);
  CHECK(body_of(r)["degraded"] == true);
}

TEST_CASE("provider bundles fall back to offline mode without a key") {
  ProviderConfig cfg;
  cfg.api_key_env_name = "SEMASK_TEST_MISSING_KEY";
  unsetenv("SEMASK_TEST_MISSING_KEY");
  const auto remote = make_provider_bundle("remote", cfg, 128);
  CHECK(remote.offline);
  CHECK(remote.embedder->dimension() == 128);
  const auto mock = make_provider_bundle("mock", cfg, 64);
  CHECK(mock.offline);
  CHECK(mock.chat->complete("anything") == "{}");
  setenv("SEMASK_TEST_MISSING_KEY", "k", 1);
  const auto online = make_provider_bundle("remote", cfg, 128);
  CHECK_FALSE(online.offline);
  unsetenv("SEMASK_TEST_MISSING_KEY");
  CHECK_THROWS(make_provider_bundle("psychic", cfg, 64));
}

TEST_CASE("error bodies are well formed") {
  const auto j = json::parse(error_body("bad \"thing\"", "line\nbreak"));
  CHECK(j["code"] == "bad \"thing\"");
  CHECK(j["message"] == "line\nbreak");
}

TEST_CASE("http round trip with cors") {
  Fixture fx;
  HttpService http(fx.core);
  const int port = http.bind("127.0.0.1", 0);
  std::thread t([&] { http.listen(); });
  http.wait_until_ready();
  CHECK(http.running());

  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Post("/api/query", kGoldenRequest, "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  CHECK(res->get_header_value("Content-Type").rfind("application/json", 0) == 0);
  CHECK(without_timings(json::parse(res->body)) == without_timings(body_of(fx.core.query(kGoldenRequest))));

  res = cli.Get("/api/regions");
  REQUIRE(res);
  CHECK(json::parse(res->body).size() == 3);

  res = cli.Get("/api/health");
  REQUIRE(res);
  CHECK(json::parse(res->body)["status"] == "ok");

  res = cli.Get("/api/objects/fx-pepboys");
  REQUIRE(res);
  CHECK(json::parse(res->body)["name"] == "Pep Boys");

  res = cli.Get("/api/objects/no%20such");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body)["code"] == "not_found");

  res = cli.Get("/api/unknown/route");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body)["code"] == "not_found");

  res = cli.Post("/api/query", "{oops", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);

  res = cli.Options("/api/query");
  REQUIRE(res);
  CHECK(res->status == 204);
  CHECK(res->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  http.stop();
  t.join();
  CHECK_FALSE(http.running());
}
