#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <unistd.h>

#include "dekl/cli.hpp"
#include "support.hpp"

using namespace dekl;
using namespace dekl::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result dekl_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_json(const std::string& tag) {
  return (fs::temp_directory_path() / ("dekl_test_" + tag + "_" + std::to_string(::getpid()) + ".json")).string();
}

cli::Json read_json(const std::string& path) { return cli::Json::parse(read_text(path)); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv("DEKL_COLOR", "0", 1); }
};

}  // namespace

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(dekl_run({"check", corpus_path("credential.dekl")}).code, cli::kOk);
  EXPECT_EQ(dekl_run({"check", corpus_path("fixtures/type_error.dekl")}).code, cli::kFailure);
  EXPECT_EQ(dekl_run({"check", corpus_path("fixtures/unguarded.dekl")}).code, cli::kFailure);
  EXPECT_EQ(dekl_run({"check", corpus_path("fixtures/parse_error.dekl")}).code, cli::kInputError);
  EXPECT_EQ(dekl_run({"check", corpus_path("does_not_exist.dekl")}).code, cli::kInputError);
  EXPECT_EQ(dekl_run({"analyze", corpus_path("fixtures/nonprefix.dekl")}).code, cli::kFailure);
  EXPECT_EQ(dekl_run({"analyze", corpus_path("credential.dekl"), "--presheaf", "Nope"}).code, cli::kFailure);
  EXPECT_EQ(dekl_run({"analyze", corpus_path("credential.dekl"), "--depth", "0"}).code, cli::kInputError);
  EXPECT_EQ(dekl_run({"meta", "--max-size", "13"}).code, cli::kInputError);
  EXPECT_EQ(dekl_run({"frobnicate"}).code, cli::kInputError);
  EXPECT_EQ(dekl_run({}).code, cli::kInputError);
}

TEST_F(CliTest, CheckReportsDefinitions) {
  Result r = dekl_run({"check", corpus_path("credential.dekl"), corpus_path("monitoring.dekl")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("credential.dekl: OK ("), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("monitoring.dekl: OK ("), std::string::npos) << r.out;
}

TEST_F(CliTest, ParseErrorIsLocated) {
  Result r = dekl_run({"check", corpus_path("fixtures/parse_error.dekl")});
  EXPECT_NE(r.out.find("parse_error.dekl:2:11:"), std::string::npos) << r.out;
}

TEST_F(CliTest, TypeErrorJsonCarriesKindAndSpan) {
  std::string path = temp_json("type");
  Result r = dekl_run({"check", corpus_path("fixtures/type_error.dekl"), "--json", path});
  ASSERT_EQ(r.code, 1);
  cli::Json j = read_json(path);
  EXPECT_EQ(j["schemaVersion"], cli::kSchemaVersion);
  EXPECT_EQ(j["command"], "check");
  EXPECT_EQ(j["exitCode"], 1);
  const auto& d = j["items"][0]["diagnostics"][0];
  EXPECT_EQ(d["kind"], "ConversionFailure");
  EXPECT_EQ(d["span"]["startLine"], 6);
  fs::remove(path);
}

TEST_F(CliTest, AnalyzeAuthNamesTheRevokeEdge) {
  Result r = dekl_run({"analyze", corpus_path("credential.dekl"), "--presheaf", "Auth"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Auth (evidence, depth 4, 8 traces): non-monotone"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("loses {rec@1} at Revoke/revoke1"), std::string::npos) << r.out;
}

TEST_F(CliTest, AnalyzeJsonSchema) {
  std::string path = temp_json("analyze");
  ASSERT_EQ(dekl_run({"--json", path, "analyze", corpus_path("monitoring.dekl")}).code, 0);
  cli::Json j = read_json(path);
  ASSERT_EQ(j["items"].size(), 2u);
  const auto& safe = j["items"][0];
  EXPECT_EQ(safe["presheaf"], "Safe");
  EXPECT_EQ(safe["verdict"], "non-monotone");
  EXPECT_EQ(safe["prefixStable"], false);
  EXPECT_EQ(safe["witnesses"][0]["edge"], "Viol/breach");
  EXPECT_EQ(safe["witnesses"][0]["orphan"], "∗");
  const auto& always = j["items"][1];
  EXPECT_EQ(always["verdict"], "monotone-on-base");
  EXPECT_EQ(always["prefixStable"], true);
  EXPECT_TRUE(j.contains("timingMs"));
  fs::remove(path);
}

TEST_F(CliTest, ReportsAreDeterministicApartFromTiming) {
  std::string a = temp_json("det_a"), b = temp_json("det_b");
  for (const auto& p : {a, b}) ASSERT_EQ(dekl_run({"analyze", corpus_path("defaults.dekl"), "--json", p}).code, 0);
  cli::Json ja = read_json(a), jb = read_json(b);
  ja["args"] = jb["args"] = nullptr;
  EXPECT_EQ(cli::without_timing(ja), cli::without_timing(jb));
  fs::remove(a);
  fs::remove(b);
}

TEST_F(CliTest, AdequacyRoundTrip) {
  Result r = dekl_run({"adequacy", corpus_path("credential.dekl"), "--max-len", "5"});
  EXPECT_EQ(r.code, 0);
  // from S0: nil, then Issue Use^k (k <= 4) and Issue Use^k Revoke (k <= 3): 1+5+4;
  // from S1: Use^k (k <= 5) and Use^k Revoke (k <= 4): 6+5; from S2: nil
  TransitionSystem ts = load("credential.dekl").system();
  std::size_t n = enumerate_traces(ts, ts.states(), 5).size();
  EXPECT_EQ(n, 22u);
  EXPECT_NE(r.out.find("round-trip OK, 22 paths"), std::string::npos) << r.out;
}

TEST_F(CliTest, MetaSmallRun) {
  std::string path = temp_json("meta");
  Result r = dekl_run({"meta", "--iters", "50", "--max-size", "6", "--json", path});
  EXPECT_EQ(r.code, 0) << r.out;
  cli::Json j = read_json(path);
  EXPECT_EQ(j["suites"].size(), 4u);
  EXPECT_EQ(j["consistency"]["inhabitant"], nullptr);
  EXPECT_EQ(j["consistency"]["controlInhabitant"], "zero");
  fs::remove(path);
}

TEST_F(CliTest, CorpusMatchesExpectations) {
  Result r = dekl_run({"corpus"});
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(CliTest, NoColorWhenDisabled) {
  Result r = dekl_run({"check", corpus_path("fixtures/type_error.dekl")});
  EXPECT_EQ(r.out.find('\033'), std::string::npos);
  ::setenv("DEKL_COLOR", "1", 1);
  Result c = dekl_run({"check", corpus_path("fixtures/type_error.dekl")});
  EXPECT_NE(c.out.find('\033'), std::string::npos);
}

TEST_F(CliTest, UnwritableReportPath) {
  Result r = dekl_run({"check", corpus_path("credential.dekl"), "--json", "/nonexistent-dir/x.json"});
  EXPECT_EQ(r.code, cli::kInputError);
}
