// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "evoboss/embeddings.hpp"
#include "evoboss/evaluation.hpp"
#include "evoboss/trace.hpp"
#include "test_util.hpp"

using namespace evoboss;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "evoboss");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Synthetic n=2 store and planted landscape under dir.
struct Workspace {
  testutil::TempDir dir{"cli"};
  std::string store = (dir / "emb").string();
  std::string land = (dir / "land").string();

  Workspace() {
    REQUIRE(run_cli({"synth-embed", "--n", "2", "--dim", "8", "--seed", "1", "--out", store}).code == 0);
    REQUIRE(run_cli({"synth-landscape", "--store", store, "--seed", "2", "--out", land}).code == 0);
  }
};

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run_cli({}).code == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run_cli({"ndcg", "--pred", "x"}).code == cli::kExitUsage);
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
}

TEST_CASE("run with budget 1 writes a one-record trace") {
  Workspace ws;
  std::string out = (ws.dir / "t.jsonl").string();
  auto r = run_cli({"run", "--method", "boes", "--landscape", ws.land + ".csv", "--store", ws.store, "--budget", "1",
                    "--seed", "0", "--start", "wild_type", "--out", out});
  REQUIRE(r.code == 0);
  RunTrace t = read_trace(out);
  REQUIRE(t.records.size() == 1);
  CHECK_FALSE(t.records[0].theta.has_value());
}

TEST_CASE("existing trace files are not overwritten without --force") {
  Workspace ws;
  std::string out = (ws.dir / "t.jsonl").string();
  std::vector<std::string> args{"run", "--method", "random", "--landscape", ws.land + ".csv", "--budget", "5",
                                "--out", out};
  CHECK(run_cli(args).code == 0);
  std::string before = testutil::read_text(out);
  auto again = run_cli(args);
  CHECK(again.code == cli::kExitUsage);
  CHECK(testutil::read_text(out) == before);
  args.push_back("--force");
  CHECK(run_cli(args).code == 0);
}

TEST_CASE("data problems exit with 2") {
  Workspace ws;
  testutil::write_text(ws.dir / "bad.csv", "variant,fitness\nAA,oops\n");
  auto r = run_cli({"run", "--method", "random", "--landscape", (ws.dir / "bad.csv").string(), "--budget", "2",
                    "--out", (ws.dir / "x.jsonl").string()});
  CHECK(r.code == cli::kExitData);
  auto missing = run_cli({"run", "--method", "boes", "--landscape", ws.land + ".csv", "--store",
                          (ws.dir / "nothing").string(), "--budget", "2", "--out", (ws.dir / "y.jsonl").string()});
  CHECK(missing.code == cli::kExitData);
}

TEST_CASE("run and sweep outputs are byte-identical across invocations and job counts") {
  Workspace ws;
  std::vector<std::string> run_args{"run", "--method", "boes", "--landscape", ws.land + ".csv", "--store",
                                    ws.store, "--budget", "12", "--seed", "4", "--start", "wild_type"};
  auto a = run_args, b = run_args;
  a.insert(a.end(), {"--out", (ws.dir / "a.jsonl").string()});
  b.insert(b.end(), {"--out", (ws.dir / "b.jsonl").string()});
  REQUIRE(run_cli(a).code == 0);
  REQUIRE(run_cli(b).code == 0);
  CHECK(testutil::read_text(ws.dir / "a.jsonl") == testutil::read_text(ws.dir / "b.jsonl"));

  std::vector<std::string> sweep_args{"sweep", "--method", "boes", "--landscape", ws.land + ".csv", "--store",
                                      ws.store, "--budget", "6", "--seed", "4", "--runs", "5"};
  auto s1 = sweep_args, s3 = sweep_args;
  s1.insert(s1.end(), {"--jobs", "1", "--out-dir", (ws.dir / "s1").string()});
  s3.insert(s3.end(), {"--jobs", "3", "--out-dir", (ws.dir / "s3").string()});
  REQUIRE(run_cli(s1).code == 0);
  REQUIRE(run_cli(s3).code == 0);
  for (std::size_t i = 0; i < 5; ++i) {
    auto name = trace_file_name(i);
    CHECK(testutil::read_text(ws.dir / "s1" / name) == testutil::read_text(ws.dir / "s3" / name));
  }
}

TEST_CASE("validate-data accepts a GB1-shaped file and rejects a wrong maximum") {
  testutil::TempDir dir("validate");
  testutil::write_text(dir / "gb1.csv", "variant,fitness\nVDGV,1.0\nFWAA,8.76\nAAAA,0.0\n");
  testutil::write_text(dir / "gb1.meta", "name=GB1\nn=4\npositions=V39,D40,G41,V54\nwild_type=VDGV\n");
  auto ok = run_cli({"validate-data", (dir / "gb1.csv").string(), (dir / "gb1.meta").string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("check=GB1 ranges OK") != std::string::npos);
  CHECK(ok.out.find("measured=3 of 160000") != std::string::npos);

  testutil::write_text(dir / "bad.csv", "variant,fitness\nVDGV,1.0\nFWAA,9.5\nAAAA,0.0\n");
  CHECK(run_cli({"validate-data", (dir / "bad.csv").string(), (dir / "gb1.meta").string()}).code == cli::kExitData);
}

TEST_CASE("report writes quartile curves and snapshots for hand-written traces") {
  testutil::TempDir dir("report");
  std::filesystem::create_directories(dir / "traces");
  double finals[4] = {1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    RunTrace t;
    t.records.push_back({1, Variant::from_word("AA"), 0.5, 0.5, std::nullopt});
    t.records.push_back({2, Variant::from_word("AC"), finals[i], finals[i], 0.1});
    write_trace(dir / "traces" / trace_file_name(static_cast<std::size_t>(i)), t);
  }
  auto r = run_cli({"report", "--traces-dir", (dir / "traces").string(), "--grid", "1:3", "--snapshots", "2",
                    "--out", (dir / "rep").string()});
  REQUIRE(r.code == 0);
  CHECK(testutil::read_text(dir / "rep" / "curves.csv") ==
        "count,q1,median,q3\n1,0.5,0.5,0.5\n2,1.75,2.5,3.25\n3,1.75,2.5,3.25\n");
  CHECK(testutil::read_text(dir / "rep" / "snapshots.csv") == "count,value\n2,1\n2,2\n2,3\n2,4\n");
}

TEST_CASE("ndcg reads plain and keyed files") {
  testutil::TempDir dir("ndcg");
  testutil::write_text(dir / "p.txt", "3\n2\n1\n");
  testutil::write_text(dir / "t.txt", "3\n2\n1\n");
  auto r = run_cli({"ndcg", "--pred", (dir / "p.txt").string(), "--truth", (dir / "t.txt").string()});
  CHECK(r.code == 0);
  CHECK(r.out == "ndcg,1\n");

  testutil::write_text(dir / "pk.csv", "variant,score\nAA,1\nCC,2\nDD,3\n");
  testutil::write_text(dir / "tk.csv", "variant,fitness\nDD,1\nAA,3\nCC,2\n");
  auto k = run_cli({"ndcg", "--pred", (dir / "pk.csv").string(), "--truth", (dir / "tk.csv").string()});
  CHECK(k.code == 0);
  double value = std::stod(k.out.substr(5));
  double hand = (1.0 + 2.0 / std::log2(3.0) + 3.0 / 2.0) / (3.0 + 2.0 / std::log2(3.0) + 1.0 / 2.0);
  CHECK(std::abs(value - hand) < 1e-12);
}

TEST_CASE("pca writes one row per variant") {
  Workspace ws;
  std::string out = (ws.dir / "pca.csv").string();
  auto r = run_cli({"pca", "--store", ws.store, "--k", "2", "--out", out});
  REQUIRE(r.code == 0);
  std::string text = testutil::read_text(out);
  CHECK(text.starts_with("variant,pc1,pc2\nAA,"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 401);
  CHECK(r.out.starts_with("component,explained_variance_ratio\npc1,"));
}

TEST_CASE("baseline methods run from the command line") {
  Workspace ws;
  for (std::string method : {"smw", "recombination", "random"}) {
    std::string out = (ws.dir / (method + ".jsonl")).string();
    auto r = run_cli({"run", "--method", method, "--landscape", ws.land + ".csv", "--budget", "60", "--start", "AA",
                      "--out", out});
    CHECK(r.code == 0);
    CHECK(read_trace(out).config["method"] == method);
  }
}
