#include <string>

#include "doctest.h"
#include "fairmarket/errors.hpp"
#include "fairmarket/io.hpp"
#include "fixtures.hpp"

using namespace fm;
using namespace fmtest;

namespace {

std::string fixture(const char* name) { return std::string(FM_FIXTURE_DIR) + "/" + name; }

std::string error_of(const std::string& text) {
  try {
    parse_market_text(text, "m.market");
  } catch (const ModelError& e) {
    return e.what();
  }
  return {};
}

const char* kHeader = R"({
  "format_version": 1,
  "tree": [
    {"id": "r", "parent": null, "prob": 1},
    {"id": "u", "parent": "r", "prob": 0.5},
    {"id": "d", "parent": "r", "prob": 0.5}
  ],
)";

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("bundled fixtures parse to the hand-built models") {
    const MarketDocument b = parse_market(fixture("b1.market"));
    CHECK(b.model.prices() == b1().prices());
    REQUIRE(b.claims.size() == 1);
    CHECK(b.claim("call").payoff()[0] == 1.0);
    const MarketDocument t = parse_market(fixture("t1.market"));
    CHECK(t.model.prices() == t1().prices());
    CHECK(t.claim("digital-up").size() == 3);
    CHECK_THROWS_AS(t.claim("nope"), ModelError);
    CHECK(parse_market(fixture("b1_arb.market")).model.assets() == 3);
  }

  TEST_CASE("serialise then parse is the identity") {
    for (std::uint64_t k = 0; k < 10; ++k) {
      const MarketModel m = generate_market(corpus_options(k));
      const Claim c = random_claim(m, k, "x");
      const MarketDocument back = parse_market_text(serialize_market(m, std::span<const Claim>(&c, 1)));
      CHECK(back.model == m);
      CHECK(std::vector<double>(back.claims[0].payoff().begin(), back.claims[0].payoff().end()) ==
            std::vector<double>(c.payoff().begin(), c.payoff().end()));
    }
  }

  TEST_CASE("probabilities summing to 0.9 name the node") {
    const std::string text = R"({"format_version": 1, "tree": [
      {"id": "top", "parent": null, "prob": 1},
      {"id": "u", "parent": "top", "prob": 0.5},
      {"id": "d", "parent": "top", "prob": 0.4}],
      "assets": [{"name": "bond", "prices": {"top": 1, "u": 1, "d": 1}}]})";
    const std::string e = error_of(text);
    CHECK(e.find("top") != std::string::npos);
  }

  TEST_CASE("empty claims section is valid") {
    const std::string text = std::string(kHeader) +
                             R"(  "assets": [{"name": "bond", "prices": {"r": 1, "u": 1, "d": 1}}], "claims": []})";
    CHECK(parse_market_text(text).claims.empty());
  }

  TEST_CASE("unknown fields are rejected with line and pointer") {
    const std::string text = std::string(kHeader) + R"(  "assets": [
    {"name": "bond", "prices": {"r": 1, "u": 1, "d": 1}, "colour": "red"}
  ]
})";
    const std::string e = error_of(text);
    CHECK(e.find("m.market:9:") == 0);
    CHECK(e.find("/assets/0/colour") != std::string::npos);
  }

  TEST_CASE("schema violations") {
    const std::string base = kHeader;
    CHECK(error_of(base + R"(  "assets": [{"name": "bond", "prices": {"r": 1, "u": 1}}]})").find("missing price for node 'd'") !=
          std::string::npos);
    CHECK(error_of(base + R"(  "assets": [{"name": "bond", "prices": {"r": 1, "u": 1, "d": "x"}}]})").find("/assets/0/prices/d") !=
          std::string::npos);
    CHECK(error_of(base + R"(  "assets": [{"name": "bond", "prices": {"r": 1, "u": 1, "d": 1, "q": 1}}]})").find("unknown node id") !=
          std::string::npos);
    CHECK(error_of(base + R"(  "assets": [{"name": "b", "prices": {"r": 1, "u": 1, "d": 1}}],
  "claims": [{"name": "c", "payoff": {"u": 1, "d": 0, "r": 1}}]})").find("not a leaf") != std::string::npos);
    CHECK(error_of(base + R"(  "assets": [{"name": "b", "prices": {"r": 1, "u": 1, "d": 1}}],
  "claims": [{"name": "c", "payoff": {"u": -1, "d": 0}}]})").find("/claims/0/payoff") != std::string::npos);
    CHECK(error_of(R"({"format_version": 2, "tree": [], "assets": []})").find("format version") != std::string::npos);
  }

  TEST_CASE("syntax errors report line and column") {
    const std::string e = error_of("{\n  \"format_version\": 1,\n  \"tree\": [,]\n}");
    CHECK(e.find("m.market:3:") == 0);
    CHECK(e.find("syntax error") != std::string::npos);
  }

  TEST_CASE("FNV-1a digest") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  }
}
