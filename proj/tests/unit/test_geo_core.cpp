#include <doctest.h>

#include <cmath>
#include <fstream>

#include "../support/oracles.hpp"
#include "semask/embedding.hpp"
#include "semask/geo.hpp"
#include "semask/object.hpp"
#include "semask/providers.hpp"
#include "semask/pyliteral.hpp"
#include "semask/text.hpp"

using namespace semask;

namespace {

// Great-circle distance by the spherical law of cosines (independent of haversine).
double slc_km(double lat1, double lon1, double lat2, double lon2) {
  const double d2r = 3.14159265358979323846 / 180.0;
  const double c = std::sin(lat1 * d2r) * std::sin(lat2 * d2r) +
                   std::cos(lat1 * d2r) * std::cos(lat2 * d2r) * std::cos((lon2 - lon1) * d2r);
  return 6371.0088 * std::acos(std::min(1.0, std::max(-1.0, c)));
}

}  // namespace

TEST_CASE("GeoPoint and GeoRect validate their ranges") {
  CHECK_NOTHROW(GeoPoint(90, 180));
  CHECK_NOTHROW(GeoPoint(-90, -180));
  CHECK_THROWS_AS(GeoPoint(90.0001, 0), GeoError);
  CHECK_THROWS_AS(GeoPoint(0, -180.5), GeoError);
  CHECK_THROWS_AS(GeoPoint(std::nan(""), 0), GeoError);
  CHECK_THROWS_AS(GeoRect(1, 0, 0, 1), GeoError);
  // A rect across the antimeridian would need min_lon > max_lon.
  CHECK_THROWS_AS(GeoRect(0, 1, 179, -179), GeoError);
  CHECK_NOTHROW(GeoRect(1, 1, 2, 2));
}

TEST_CASE("contains is inclusive on every edge") {
  const GeoRect r(10, 20, 30, 40);
  CHECK(contains(r, GeoPoint(10, 30)));
  CHECK(contains(r, GeoPoint(20, 40)));
  CHECK(contains(r, GeoPoint(15, 40)));
  CHECK_FALSE(contains(r, GeoPoint(9.999999, 35)));
  CHECK_FALSE(contains(r, GeoPoint(15, 40.000001)));
}

TEST_CASE("haversine agrees with the spherical law of cosines") {
  SeededRng rng(1);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform(-80, 80), b = rng.uniform(-179, 179);
    const double c = rng.uniform(-80, 80), d = rng.uniform(-179, 179);
    const double h = haversine_km(GeoPoint(a, b), GeoPoint(c, d));
    CHECK(h == doctest::Approx(slc_km(a, b, c, d)).epsilon(1e-6));
    CHECK(h >= 0.0);
  }
  CHECK(haversine_km(GeoPoint(0, 0), GeoPoint(1, 0)) == doctest::Approx(kKmPerDegree).epsilon(1e-12));
  CHECK(haversine_km(GeoPoint(5, 5), GeoPoint(5, 5)) == 0.0);
}

TEST_CASE("rect_from_center spans the requested distances") {
  const GeoPoint c(36.16, -86.77);
  const auto r = rect_from_center(c, 5, 5);
  CHECK((r.max_lat() - r.min_lat()) / 2 == doctest::Approx(0.0225).epsilon(0.002));
  CHECK(slc_km(r.min_lat(), c.lon(), r.max_lat(), c.lon()) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(slc_km(c.lat(), r.min_lon(), c.lat(), r.max_lon()) == doctest::Approx(5.0).epsilon(1e-4));
  CHECK(contains(r, c));

  const auto eq = rect_from_center(GeoPoint(0, 0), 5, 5);
  CHECK(eq.min_lat() == doctest::Approx(-eq.max_lat()));
  CHECK(eq.min_lon() == doctest::Approx(-eq.max_lon()));
  CHECK(eq.max_lat() == doctest::Approx(eq.max_lon()));

  CHECK_THROWS_AS(rect_from_center(GeoPoint(90, 0), 5, 5), GeoError);
  CHECK_THROWS_AS(rect_from_center(GeoPoint(89.99, 0), 5, 5), GeoError);
  CHECK_THROWS_AS(rect_from_center(GeoPoint(0, 179.99), 5, 5), GeoError);
}

TEST_CASE("Query rejects blank text and k of zero") {
  const GeoRect r(0, 1, 0, 1);
  CHECK_THROWS(Query(r, "   "));
  CHECK_THROWS(Query(r, "coffee", 0));
  const Query q(r, "  quiet   cafe near\tme ");
  CHECK(q.k() == 10);
  CHECK(q.token_count() == 4);
}

TEST_CASE("EmbeddingVector normalisation and dot product") {
  const auto v = EmbeddingVector::normalized({3.0f, 4.0f});
  CHECK(v.norm() == doctest::Approx(1.0));
  CHECK(v.values()[0] == doctest::Approx(0.6));
  CHECK(EmbeddingVector::normalized({0, 0, 0}).is_zero());
  CHECK_THROWS(EmbeddingVector::from_unit({1.0f, 1.0f}));
  CHECK_NOTHROW(EmbeddingVector::from_unit({1.0f, 0.0f}));

  SeededRng rng(2);
  for (std::size_t dim : {1u, 7u, 8u, 9u, 31u, 64u, 1536u}) {
    std::vector<float> a(dim), b(dim);
    double want = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      a[i] = static_cast<float>(rng.uniform(-1, 1));
      b[i] = static_cast<float>(rng.uniform(-1, 1));
      want += static_cast<double>(a[i]) * b[i];
    }
    CHECK(dot(a, b) == doctest::Approx(want).epsilon(1e-5));
  }
  CHECK_THROWS(cosine(EmbeddingVector::zeros(3), EmbeddingVector::zeros(4)));
}

TEST_CASE("deterministic_embed matches an independent feature-hashing computation") {
  const std::string s = "Cold brew, OAT milk & cold brew!";
  const std::size_t dim = 32;
  std::vector<double> want(dim, 0.0);
  for (const auto& w : oracle::words(s)) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : w) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    want[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double n = 0;
  for (double x : want) n += x * x;
  const auto got = deterministic_embed(s, dim);
  for (std::size_t i = 0; i < dim; ++i) CHECK(got.values()[i] == doctest::Approx(want[i] / std::sqrt(n)));
  CHECK(got.norm() == doctest::Approx(1.0));
  CHECK(deterministic_embed(s, dim) == got);
  CHECK(deterministic_embed("   ", dim).is_zero());
  CHECK_THROWS(deterministic_embed(s, 4));
}

TEST_CASE("text helpers") {
  CHECK(text::tokenize("Hello, WORLD! caf\xc3\xa9 x2") == std::vector<std::string>{"hello", "world", "caf\xc3\xa9", "x2"});
  CHECK(text::tokenize("").empty());
  CHECK(text::trim("  a b \n") == "a b");
  CHECK(text::normalize_whitespace_lower("  Mike's   ICE\tCream ") == "mike's ice cream");
  CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(text::join({"a", "b", "c"}, ", ") == "a, b, c");
}

TEST_CASE("Python string lists quote by doubling") {
  CHECK(pyliteral::quote("Mike's") == "'Mike''s'");
  const std::vector<std::string> tips = {"Don't", "a, b", "", "''"};
  const auto rendered = pyliteral::render_string_list(tips);
  CHECK(rendered == "['Don''t', 'a, b', '', '''''']");
  CHECK(pyliteral::parse_string_list(rendered) == tips);
  CHECK(pyliteral::parse_string_list("[]") == std::vector<std::string>{});
  CHECK_FALSE(pyliteral::parse_string_list("['a'"));
  CHECK_FALSE(pyliteral::parse_string_list("['a' 'b']"));

  SeededRng rng(3);
  const std::string alphabet = "ab' ,[]\"\\\n";
  for (int i = 0; i < 300; ++i) {
    std::vector<std::string> items(rng.below(5));
    for (auto& it : items) {
      for (std::size_t n = rng.below(8); n > 0; --n) it.push_back(alphabet[rng.below(alphabet.size())]);
    }
    CHECK(pyliteral::parse_string_list(pyliteral::render_string_list(items)) == items);
  }
}

TEST_CASE("dict literal parsing") {
  const auto d = pyliteral::parse_dict(R"({'Mike\'s': "it's \"great\"", 'n': 3, 'x': [1, {'a': 2}], 'u': 'é',})");
  REQUIRE(d);
  REQUIRE(d->size() == 4);
  CHECK((*d)[0] == pyliteral::DictEntry{"Mike's", "it's \"great\""});
  CHECK((*d)[1].second == "3");
  CHECK((*d)[2].second == "[1, {'a': 2}]");
  CHECK((*d)[3].second == "\xc3\xa9");
  CHECK(pyliteral::parse_dict("{}")->empty());
  CHECK_FALSE(pyliteral::parse_dict("{'a': 1} trailing"));
  CHECK_FALSE(pyliteral::parse_dict("{'a' 1}"));
  CHECK_FALSE(pyliteral::parse_dict("['a']"));
  CHECK(pyliteral::parse_dict(R"({"😀": 1})")->front().first == "\xf0\x9f\x98\x80");
  CHECK(pyliteral::parse_dict(R"({"\ud83d\ude00": 1})")->front().first == "\xf0\x9f\x98\x80");
}

TEST_CASE("find_first_object skips braces inside strings") {
  CHECK(pyliteral::find_first_object("Here: {'a': '}'} and {'b': 1}") == "{'a': '}'}");
  CHECK(pyliteral::find_first_object("no dict here").empty());
  CHECK(pyliteral::find_first_object("{ unbalanced {'ok': 1}") == "{'ok': 1}");
}

TEST_CASE("attribute values validate and round-trip through JSON") {
  CHECK_THROWS(validate_attribute("categories", Category{}));
  CHECK_THROWS(validate_attribute("hours", Hours{{{"Funday", "8:0-9:0"}}}));
  CHECK_THROWS(validate_attribute("hours", Hours{{{"Monday", "8-9"}}}));
  CHECK_NOTHROW(validate_attribute("hours", Hours{{{"Monday", "0:0-0:0"}}}));

  for (const AttributeValue& v : {AttributeValue{Text{"x"}}, AttributeValue{Number{1.5}}, AttributeValue{Number{10}},
                                  AttributeValue{Category{{"A", "B"}}},
                                  AttributeValue{Hours{{{"Tuesday", "6:0-21:0"}, {"Monday", "0:0-0:0"}}}}}) {
    CHECK(attribute_from_json("k", attribute_to_json(v)) == v);
  }
  CHECK(attribute_to_json(Number{10}).dump() == "10");
  CHECK(attribute_to_json(Number{1.5}).dump() == "1.5");
}

TEST_CASE("AttributeMap keeps insertion order and replaces in place") {
  AttributeMap m;
  m.set("b", Text{"1"});
  m.set("a", Text{"2"});
  m.set("b", Text{"3"});
  std::vector<std::string> keys;
  for (const auto& [k, v] : m) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"b", "a"});
  CHECK(*m.text("b") == "3");
  CHECK(m.text("missing") == nullptr);
}

TEST_CASE("objects serialise in the stable field order and round-trip") {
  auto o = GeoTextualObject::make("id1", "Mike's Ice Cream", GeoPoint(36.162649, -86.775973));
  o.attributes.set("stars", Number{1.5});
  o.attributes.set("categories", Category{{"Ice Cream & Frozen Yogurt", "Fast Food"}});
  o.tips = {"Amazing ice cream! So creamy"};
  o.tip_summary = "Creamy.";
  o.embedding = EmbeddingVector::normalized({1, 2, 3});
  const auto j = object_to_json(o);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"id", "name", "location", "attributes", "tips", "tip_summary", "embedding"});
  CHECK(object_from_json(j) == o);
  CHECK_FALSE(object_to_json(o, false).contains("embedding"));
  CHECK(object_attributes_json(o).dump() ==
        R"({"name":"Mike's Ice Cream","stars":1.5,"categories":["Ice Cream & Frozen Yogurt","Fast Food"],"tip_summary":"Creamy."})");
  CHECK(embedding_input(o) == "Mike's Ice Cream\nIce Cream & Frozen Yogurt, Fast Food\nCreamy.");
}

TEST_CASE("Corpus rejects duplicates and invalid objects") {
  auto a = GeoTextualObject::make("a", "A", GeoPoint(0, 0));
  CHECK_THROWS(Corpus({a, a}));
  auto bad = a;
  bad.id = "";
  CHECK_THROWS(Corpus({bad}));
  auto nameless = GeoTextualObject{"x", "", GeoPoint(0, 0), {}, {}, {}, {}};
  CHECK_THROWS(nameless.validate());
  const Corpus c({a});
  CHECK(c.find("a")->name == "A");
  CHECK(c.find("b") == nullptr);
}

TEST_CASE("corpus JSONL round trip") {
  const auto objects = read_corpus_jsonl(oracle::fixture("fixture_corpus.jsonl"));
  CHECK(objects.size() == 7);
  const auto path = std::filesystem::temp_directory_path() / "semask_corpus_roundtrip.jsonl";
  write_corpus_jsonl(path.string(), objects);
  CHECK(read_corpus_jsonl(path.string()) == objects);
  std::filesystem::remove(path);
}
