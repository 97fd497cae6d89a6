// Copyright 2026 The LambdaNet Kernels Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lambdanet/cli.hpp"

namespace lambdanet {
namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "lambdanet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"verify", "--suite", "nope"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"verify", "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gradcheck", "--geom", "cube:2"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gradcheck", "--precision", "fast"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"verify", "--seed", "12abc"}).code, cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, cli::kExitPass);
  EXPECT_NE(r.out.find("gradcheck"), std::string::npos);
}

TEST(Cli, VerifyReportEmbedsConfig) {
  const auto r = run({"verify", "--suite", "relpos", "--seed", "7"});
  ASSERT_EQ(r.code, cli::kExitPass) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["seed"], 7u);
  EXPECT_EQ(j["config"]["command"], "verify");
  EXPECT_EQ(j["config"]["suite"], "relpos");
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["result"]["suites"][0]["suite"], "relpos");
  for (const auto& p : j["result"]["suites"][0]["properties"]) {
    EXPECT_TRUE(p.contains("worst_error"));
    EXPECT_TRUE(p.contains("cases"));
  }
}

TEST(Cli, MutationProducesNamedOracleFailure) {
  const auto r = run({"verify", "--suite", "oracle", "--mutate", "content-sign"});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("FAIL oracle/global-vs-loop-oracle"), std::string::npos);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_FALSE(j["result"]["failures"].empty());
}

TEST(Cli, EquivalenceConv) {
  const auto r = run({"verify", "--suite", "equivalence", "--impl", "conv"});
  ASSERT_EQ(r.code, cli::kExitPass) << r.err;
  for (const auto& p : nlohmann::json::parse(r.out)["result"]["suites"][0]["properties"]) {
    EXPECT_LT(p["worst_error"].get<double>(), 1e-12) << p["name"];
  }
}

TEST(Cli, GradcheckMasked) {
  const auto r = run({"gradcheck", "--variant", "masked"});
  ASSERT_EQ(r.code, cli::kExitPass) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LT(j["result"]["max_rel_error"].get<double>(), 1e-6);
}

TEST(Cli, MemmodelDefaultsAndCsv) {
  const auto r = run({"memmodel"});
  ASSERT_EQ(r.code, cli::kExitPass);
  const auto j = nlohmann::json::parse(r.out);
  bool found = false;
  for (const auto& row : j["result"]["rows"]) {
    if (row["name"] == "lambda layer (k=16)") {
      found = true;
      EXPECT_NEAR(row["gib"].get<double>(), 1.9, 0.038);
    }
  }
  EXPECT_TRUE(found);

  const auto c = run({"memmodel", "--format", "csv", "--k", "8"});
  ASSERT_EQ(c.code, cli::kExitPass);
  EXPECT_EQ(c.out.rfind("# schema 1 config ", 0), 0u);
  EXPECT_NE(c.out.find("row,op,k,bytes,gib,gb\n"), std::string::npos);
  EXPECT_NE(c.out.find("lambda layer (k=4)"), std::string::npos);
}

TEST(Cli, ReportsAreBitStableAndReplayable) {
  const auto a = run({"gradcheck", "--variant", "intra-depth", "--u", "3", "--hook"});
  const auto b = run({"gradcheck", "--variant", "intra-depth", "--u", "3", "--hook"});
  ASSERT_EQ(a.code, cli::kExitPass) << a.err;
  EXPECT_EQ(a.out, b.out);

  const auto path = std::filesystem::temp_directory_path() / "lambdanet_cli_replay.json";
  {
    std::ofstream f(path);
    f << a.out;
  }
  const auto replayed = run({"--replay", path.string()});
  EXPECT_EQ(replayed.code, cli::kExitPass);
  EXPECT_EQ(replayed.out, a.out);
  std::filesystem::remove(path);
}

TEST(Cli, BenchFlagsTimingsAsNondeterministic) {
  const auto r = run({"bench", "--geom", "seq:16", "--scope", "3"});
  ASSERT_EQ(r.code, cli::kExitPass) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto nd = j["nondeterministic"];
  EXPECT_NE(std::find(nd.begin(), nd.end(), "median"), nd.end());
  const auto& pts = j["result"]["points"];
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[1]["multiplies"], pts[2]["multiplies"]);  // conv and depthwise
  EXPECT_EQ(pts[1]["iterations"], 30);
  EXPECT_EQ(run({"bench", "--iterations", "10"}).code, cli::kExitUsage);
}

TEST(Cli, OutFile) {
  const auto path = std::filesystem::temp_directory_path() / "lambdanet_cli_out.json";
  const auto r = run({"memmodel", "--out", path.string()});
  ASSERT_EQ(r.code, cli::kExitPass);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path);
  EXPECT_EQ(nlohmann::json::parse(f)["schema"], 1);
  std::filesystem::remove(path);
}

TEST(Cli, TrainToyShortRun) {
  const auto r = run({"train-toy", "--geom", "grid:4x4", "--steps", "100", "--mode", "content-only"});
  ASSERT_EQ(r.code, cli::kExitPass) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["result"]["mode"], "content-only");
  EXPECT_FALSE(j["result"]["curve"].empty());
  EXPECT_EQ(run({"train-toy", "--geom", "seq:16"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train-toy", "--geom", "grid:4x4", "--steps", "100", "--lr", "1e6"}).code, cli::kExitFailure);
}

}  // namespace
}  // namespace lambdanet
