#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "lenspec/cache.hpp"
#include "lenspec/config.hpp"

using namespace lenspec;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lenspec-cli-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("config text round trip") {
  RunConfig c;
  CHECK(c.sig == Signature{2, 3, 7});
  CHECK(c.mode == SubgroupMode::Full);
  CHECK(c.word_cap == 2000);
  CHECK(*c.max_length == 6.0);

  c.set("signature", "2,5,inf");
  c.set("mode", "squares");
  c.set("max_trace", "12.5");
  c.set("grid_step", "0.1");
  c.set("fit_window", "4:8.5");
  const RunConfig d = RunConfig::parse(c.to_text());
  CHECK(d.to_text() == c.to_text());
  CHECK(d.sig == Signature{2, 5, Signature::kInf});
  CHECK(d.mode == SubgroupMode::Squares);
  CHECK(d.grid_step == 0.1);
  CHECK(d.fit_hi == 8.5);

  CHECK_THROWS_AS(RunConfig::parse("colour=red\n"), std::invalid_argument);
  CHECK_NOTHROW(RunConfig::parse("# comment\nsignature=2,6,10\n"));
  for (double v : {0.1, 1.0 / 3, 6.0, 1e-7, 123456.789})
    CHECK(parse_double(format_double(v)) == v);
}

TEST_CASE("cache round trip is bit exact") {
  const fs::path dir = scratch("cache");
  RunConfig cfg;
  cfg.sig = {2, 6, 10};
  cfg.max_length = 5;
  cfg.cache_dir = dir.string();
  const ElementStore store = enumerate_ball(TriangleGroup::build(cfg.sig, cfg.bits), cfg.enumeration());
  const std::string path = cache_path(cfg);
  save_store(store, cfg, path);
  const ElementStore back = load_store(path);
  CHECK(back.size() == store.size());
  CHECK(quad_digest(back) == quad_digest(store));
  CHECK(matrix_digest(back) == matrix_digest(store));

  SUBCASE("corruption is detected") {
    std::string text = slurp(path);
    const auto at = text.find_first_of("0123456789", text.find("\"payload\""));
    REQUIRE(at != std::string::npos);
    text[at] = text[at] == '9' ? '8' : static_cast<char>(text[at] + 1);
    std::ofstream(path, std::ios::binary) << text;
    CHECK_THROWS_AS(load_store(path), CacheError);
    const Result r = run_cli({"spectrum", "--sig", "2,6,10", "--max-length", "5", "--cache-dir", dir.string(), "--out-dir",
                          (dir / "out").string()});
    CHECK(r.code == cli::kUsage);
    CHECK(r.err.find("checksum") != std::string::npos);
  }
  SUBCASE("missing cache without --build") {
    fs::remove(path);
    const Result r = run_cli({"spectrum", "--sig", "2,6,10", "--max-length", "5", "--cache-dir", dir.string()});
    CHECK(r.code == cli::kUsage);
    CHECK(r.err.find("no cache") != std::string::npos);
  }
}

TEST_CASE("field command") {
  Result r = run_cli({"field", "5"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("degree 2") != std::string::npos);
  CHECK(r.out.find("x^2 - x - 1") != std::string::npos);
  r = run_cli({"field", "1"});
  CHECK(r.out.find("degree 1") != std::string::npos);
  r = run_cli({"field", "30"});
  CHECK(r.out.find("degree 8") != std::string::npos);
  CHECK(run_cli({"field", "0"}).code == cli::kUsage);
  CHECK(run_cli({"field"}).code == cli::kUsage);
}

TEST_CASE("usage errors") {
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"nonsense"}).code == cli::kUsage);
  CHECK(run_cli({"--help"}).code == cli::kOk);
  CHECK(run_cli({"group", "--sig", "2,3,6"}).code == cli::kUsage);
  CHECK(run_cli({"enumerate", "--sig", "2,3,7", "--max-length", "3", "--max-trace", "5"}).code == cli::kUsage);
  CHECK(run_cli({"enumerate", "--sig", "2,3,7", "--mode", "cubes"}).code == cli::kUsage);
}

TEST_CASE("group command") {
  Result r = run_cli({"group", "--sig", "2,3,7"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("arithmetic dimension r = 1") != std::string::npos);
  CHECK(r.out.find("arithmetic: yes") != std::string::npos);
  r = run_cli({"group", "--sig", "2,6,10"});
  CHECK(r.out.find("arithmetic dimension r = 2") != std::string::npos);
  CHECK(r.out.find("arithmetic: no") != std::string::npos);
  r = run_cli({"group", "--sig", "2,5,inf"});
  CHECK(r.out.find("(cusped)") != std::string::npos);
  CHECK(r.out.find("arithmetic: no") != std::string::npos);
}

TEST_CASE("scan command") {
  Result r = run_cli({"scan", "--a", "5:4"});
  CHECK(r.code == cli::kOk);
  CHECK(lines(r.out).size() == 1);  // header only

  r = run_cli({"scan", "--a", "2", "--b", "3:6", "--c", "7:10"});
  REQUIRE(r.code == cli::kOk);
  int seen = 0;
  for (const std::string& l : lines(r.out)) {
    std::istringstream in(l);
    std::string sig, rank;
    in >> sig >> rank;
    if (sig == "2,6,10") {
      CHECK(rank == "2");
      CHECK(l.find("named example") != std::string::npos);
      ++seen;
    }
    if (sig == "2,3,7") {
      CHECK(rank == "1");
      ++seen;
    }
  }
  CHECK(seen == 2);
}

TEST_CASE("verify ledger") {
  const fs::path dir = scratch("verify");
  const Result r = run_cli({"verify", "--sig", "2,5,inf", "--max-trace", "10", "--build", "--cache-dir", dir.string(),
                        "--out-dir", (dir / "out").string()});
  CHECK(r.code == cli::kOk);
  int ledger = 0;
  for (const std::string& l : lines(r.out)) {
    if (l.rfind("PASS", 0) != 0 && l.rfind("FAIL", 0) != 0 && l.rfind("SKIPPED", 0) != 0) continue;
    ++ledger;
    CHECK(l.rfind("FAIL", 0) != 0);
    const auto p1 = l.find(" | "), p2 = l.rfind(" | ");
    REQUIRE(p1 != std::string::npos);
    REQUIRE(p2 > p1);
    CHECK(p2 - p1 > 3);  // nonempty anchor
  }
  CHECK(ledger >= 5);

  // (2,6,10): the norm bound is asserted on squares; traces outside the
  // invariant trace field are only recorded
  const Result s = run_cli({"verify", "--sig", "2,6,10", "--max-length", "6", "--build", "--cache-dir", dir.string()});
  CHECK(s.code == cli::kOk);
  CHECK(s.out.find("norm bound on squares") != std::string::npos);
  CHECK(s.out.find("DATA") != std::string::npos);

  // below the systole nothing is hyperbolic
  const Result e = run_cli({"verify", "--sig", "2,3,7", "--max-length", "0.5", "--build", "--cache-dir", dir.string()});
  CHECK(e.code == cli::kOk);
  CHECK(e.err.find("vacuous") != std::string::npos);
}

TEST_CASE("spectrum outputs are deterministic") {
  const fs::path dir = scratch("det");
  const std::vector<std::string> base = {"--sig", "2,6,10", "--max-length", "6", "--cache-dir", (dir / "cache").string()};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), base.begin(), base.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  REQUIRE(run_cli(with({"enumerate"}, {})).code == cli::kOk);
  // the exported config names the output directory, so both runs share it
  const std::vector<std::string> out = {"--out-dir", (dir / "out").string()};
  auto produce = [&] {
    REQUIRE(run_cli(with({"spectrum"}, out)).code == cli::kOk);
    REQUIRE(run_cli(with({"export"}, out)).code == cli::kOk);
    std::map<std::string, std::string> snap;
    for (const auto& e : fs::directory_iterator(dir / "out")) snap[e.path().filename().string()] = slurp(e.path());
    fs::remove_all(dir / "out");
    return snap;
  };
  const auto first = produce();
  const auto second = produce();
  CHECK(first.size() == second.size());
  int files = 0;
  for (const auto& [name, text] : first) {
    CAPTURE(name);
    REQUIRE(second.count(name));
    CHECK(second.at(name) == text);
    ++files;
  }
  CHECK(files >= 6);
  CHECK(first.count("spectrum.csv"));
  CHECK(first.count("classes.json"));
  // the exported config reads back
  CHECK(RunConfig::parse(first.at("run.cfg")).sig == Signature{2, 6, 10});
}
