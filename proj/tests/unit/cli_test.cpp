#include <sstream>
#include <string>

#include "doctest.h"
#include "fairmarket/cli.hpp"
#include "fairmarket/io.hpp"

using namespace fm;

namespace {

struct Run {
  int code;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const char* name) { return std::string(FM_FIXTURE_DIR) + "/" + name; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("superhedge report for the trinomial digital") {
    const Run r = run({"superhedge", fixture("t1.market"), "--claim", "digital-up", "--verify"});
    REQUIRE(r.code == kExitOk);
    const Json j = r.json();
    CHECK(std::fabs(j["interval"]["lower"].get<double>()) <= 1e-9);
    CHECK(std::fabs(j["interval"]["upper"].get<double>() - 1.0 / 3) <= 1e-9);
    CHECK(j["attainability"] == "not-attainable");
    CHECK(j["verification"]["ok"] == true);
    CHECK(j["input"]["digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);
  }

  TEST_CASE("fair on a dominated market exits 1 with a certificate") {
    const Run r = run({"fair", fixture("b1_arb.market"), "--verify"});
    CHECK(r.code == kExitVerdict);
    const Json j = r.json();
    CHECK(j["fair"] == false);
    CHECK(j.contains("certificate"));
    CHECK(j["verification"]["ok"] == true);
  }

  TEST_CASE("generate is deterministic and seed-dependent") {
    const std::vector<std::string> args{"generate", "--seed", "42", "--depth", "2", "--branching", "3", "--assets", "2"};
    const Run a = run(args), b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const Run c = run({"generate", "--seed", "43", "--depth", "2", "--branching", "3", "--assets", "2"});
    CHECK(c.out != a.out);
    CHECK(parse_market_text(a.out).model.assets() == 2);
  }

  TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"superhedge", fixture("t1.market")}).code == kExitUsage);  // --claim missing
    CHECK(run({"superhedge", fixture("t1.market"), "--claim", "nope"}).code == kExitUsage);
    CHECK(run({"validate", "/nonexistent/file.market"}).code == kExitUsage);
    CHECK(run({"generate", "--seed", "1", "--depth", "9"}).code == kExitUsage);
    CHECK(run({"optimize", fixture("t1.market"), "--utility", "power:2"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
  }

  TEST_CASE("domain verdicts exit 1") {
    CHECK(run({"complete", fixture("b1_arb.market")}).code == kExitVerdict);
    CHECK(run({"optimize", fixture("b1_arb.market")}).code == kExitVerdict);
  }

  TEST_CASE("every command with --verify on the fixtures") {
    const std::string t1 = fixture("t1.market"), b1 = fixture("b1.market");
    const std::vector<std::vector<std::string>> cmds{
        {"validate", t1, b1},
        {"complete", t1, b1, "--jobs", "2"},
        {"decompose", t1, "--claim", "digital-up"},
        {"optimize", t1, "--utility", "power:-1", "--wealth", "2"},
        {"davis", t1, "--claim", "digital-up", "--utility", "log"},
        {"augment", t1, "--claim", "digital-up"},
        {"price-process", t1, "--claim", "digital-up", "--deflator", "minimax:power:0.5"},
        {"price-process", b1, "--claim", "call"},
    };
    for (auto args : cmds) {
      args.push_back("--verify");
      const Run r = run(args);
      INFO(args[0], " ", r.err);
      CHECK(r.code == kExitOk);
      const Json j = r.json();
      if (j.is_array()) {
        for (const Json& e : j) CHECK(e["verification"]["ok"] == true);
      } else {
        CHECK(j["verification"]["ok"] == true);
      }
    }
  }

  TEST_CASE("rerunning with --verify reproduces the verdicts") {
    for (const char* cmd : {"fair", "complete"}) {
      const Run a = run({cmd, fixture("t1.market")});
      const Run b = run({cmd, fixture("t1.market"), "--verify"});
      CHECK(a.json()["verdict"] == b.json()["verdict"]);
    }
  }

  TEST_CASE("davis report holds the marginal-utility price") {
    const Json j = run({"davis", fixture("t1.market"), "--claim", "digital-up"}).json();
    CHECK(std::fabs(j["price"].get<double>() - 2.0 / 9) <= 1e-9);
    CHECK(j["inside_interval"] == true);
  }

  TEST_CASE("csv output is one row per node") {
    const Run r = run({"decompose", fixture("t1.market"), "--claim", "digital-up", "--format", "csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("file,node,parent,time,value", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
  }

  TEST_CASE("multiple files give an array in input order") {
    const Run r = run({"fair", fixture("b1.market"), fixture("b1_arb.market"), fixture("t1.market"), "--jobs", "3"});
    CHECK(r.code == kExitVerdict);
    const Json j = r.json();
    REQUIRE(j.size() == 3);
    CHECK(j[0]["fair"] == true);
    CHECK(j[1]["fair"] == false);
    CHECK(j[2]["fair"] == true);
  }
}
