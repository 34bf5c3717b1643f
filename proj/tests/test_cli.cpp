// Copyright 2026 The PromptDFD Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "json.hpp"
#include "promptdfd/cli.hpp"

namespace dfd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kSmoke = (fs::path(PROMPTDFD_SOURCE_DIR) / "configs" / "smoke.json").string();

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "promptdfd");
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

Result stage(const std::string& cmd, const fs::path& dir, std::vector<std::string> extra = {}) {
  std::vector<std::string> args = {cmd, "--config", kSmoke, "--out", dir.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return run(args);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), dir).string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("promptdfd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

TEST_F(CliTest, UsageErrors) {
  auto r = run({});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.err)["error"], "usage");
  r = run({"distill"});
  EXPECT_EQ(r.code, 2);
  r = run({"fly", "--config", kSmoke});
  EXPECT_EQ(r.code, 2);
  r = stage("distill", root_, {"--method", "gan"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ValidationErrorNamesPath) {
  std::ifstream in(kSmoke);
  json j = json::parse(in);
  j["kd"]["alpha"] = 1.5;
  const fs::path bad = root_ / "bad.json";
  std::ofstream(bad) << j.dump();
  const auto r = run({"gen-world", "--config", bad.string(), "--out", (root_ / "o").string()});
  EXPECT_EQ(r.code, 3);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["error"], "validation");
  EXPECT_EQ(e["path"], "kd.alpha");
}

TEST_F(CliTest, MissingPrerequisite) {
  const auto r = stage("distill", root_, {"--method", "rl"});
  EXPECT_EQ(r.code, 4);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["error"], "prerequisite");
  EXPECT_NE(e["message"].get<std::string>().find("promptdfd gen-world"), std::string::npos);
  EXPECT_EQ(stage("train-teacher", root_).code, 4);
  EXPECT_EQ(stage("eval", root_).code, 4);
}

TEST_F(CliTest, StaleTeacherIsRejected) {
  ASSERT_EQ(stage("gen-world", root_).code, 0);
  ASSERT_EQ(stage("train-teacher", root_).code, 0);
  ASSERT_EQ(stage("pretrain-generator", root_).code, 0);
  std::ifstream in(kSmoke);
  json j = json::parse(in);
  j["teacher"]["epochs"] = 4;
  const fs::path changed = root_ / "changed.json";
  std::ofstream(changed) << j.dump();
  const auto r = run({"distill", "--config", changed.string(), "--out", root_.string(), "--method", "vanilla"});
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("train-teacher"), std::string::npos);
}

TEST_F(CliTest, PipelineIsByteReproducible) {
  const fs::path dir = root_ / "run";
  std::map<std::string, std::string> snaps[2];
  for (auto& snap : snaps) {
    fs::remove_all(dir);
    ASSERT_EQ(stage("gen-world", dir).code, 0);
    ASSERT_EQ(stage("train-teacher", dir).code, 0);
    ASSERT_EQ(stage("pretrain-generator", dir).code, 0);
    for (const char* m : {"vanilla", "random_text", "unlabel", "manual", "rl"})
      ASSERT_EQ(stage("distill", dir, {"--method", m, "--seed", "3"}).code, 0) << m;
    ASSERT_EQ(stage("eval", dir).code, 0);
    ASSERT_EQ(stage("sweep", dir, {"--seed", "2"}).code, 0);
    ASSERT_EQ(stage("ablate", dir, {"--seed", "2"}).code, 0);
    snap = snapshot(dir);
  }
  const auto& a = snaps[0];
  const auto& b = snaps[1];
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, bytes] : a) {
    ASSERT_TRUE(b.count(name)) << name;
    EXPECT_EQ(bytes, b.at(name)) << name;
  }
  for (const char* f : {"world.ckpt", "world.json", "teacher.ckpt", "teacher_report.csv", "generator.ckpt",
                        "distill/rl/student.ckpt", "distill/rl/prompter.ckpt", "distill/rl/report.csv",
                        "distill/rl/report.json", "distill/rl/transfer.txt", "distill/vanilla/report.csv",
                        "eval.csv", "keywords.csv", "eval.json", "sweep.csv", "sweep.json", "ablation.csv",
                        "ablation.json"})
    EXPECT_TRUE(a.count(f)) << f;
  EXPECT_EQ(a.at("sweep.csv").substr(0, a.at("sweep.csv").find('\n')), "length,seed,accuracy,agreement");
  EXPECT_EQ(a.at("ablation.csv").substr(0, a.at("ablation.csv").find('\n')), "variant,seed,accuracy,agreement");
  EXPECT_EQ(a.at("keywords.csv").substr(0, a.at("keywords.csv").find('\n')), "keyword,corpus,rate_per_1000");
  EXPECT_EQ(a.at("distill/rl/report.csv").substr(0, a.at("distill/rl/report.csv").find('\n')),
            "epoch,loss,dev_accuracy,agreement");
}

TEST_F(CliTest, RlReportRecordsFrozenGenerator) {
  ASSERT_EQ(stage("gen-world", root_).code, 0);
  ASSERT_EQ(stage("train-teacher", root_).code, 0);
  ASSERT_EQ(stage("pretrain-generator", root_).code, 0);
  ASSERT_EQ(stage("distill", root_, {"--method", "rl"}).code, 0);
  std::ifstream in(root_ / "distill" / "rl" / "report.json");
  const json rep = json::parse(in);
  ASSERT_TRUE(rep.contains("generator_checksum_before"));
  EXPECT_EQ(rep["generator_checksum_before"], rep["generator_checksum_after"]);
}

}  // namespace
}  // namespace dfd
