#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "asynchp/cli.hpp"

namespace asynchp::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("asynchp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    auto path = dir_ / name;
    std::ofstream(path, std::ios::binary) << text;
    return path.string();
  }

  static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

std::string sample(const std::string& name) { return std::string(ASYNCHP_SAMPLES_DIR) + "/" + name; }

TEST_F(CliTest, RunPrintsFinalGlobal) {
  EXPECT_EQ(cmd_run(sample("priority.ap"), kDefaultBudget, std::nullopt, false, out_, err_), kExitOk);
  EXPECT_EQ(out_.str(), "231\n");
  EXPECT_EQ(err_.str(), "");
}

TEST_F(CliTest, SamplesProduceExpectedGlobals) {
  const std::pair<const char*, const char*> cases[] = {
      {"fifo.ap", "1234567890\n"}, {"snapshot.ap", "75\n"},   {"logger.ap", "102\n"},
      {"countdown.ap", "4\n"},     {"recurse.ap", "20\n"},
  };
  for (const auto& [file, expected] : cases) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(sample(file), kDefaultBudget, std::nullopt, false, out, err), kExitOk) << file;
    EXPECT_EQ(out.str(), expected) << file;
  }
}

TEST_F(CliTest, DumpFinalStore) {
  std::string path = write("s.ap", "global g; meth a(x) { x := 4; g := 2; } meth b(y) {}");
  EXPECT_EQ(cmd_run(path, kDefaultBudget, std::nullopt, true, out_, err_), kExitOk);
  EXPECT_EQ(out_.str(), "2\n{\"global\":2,\"locals\":{\"a\":4,\"b\":0}}\n");
}

TEST_F(CliTest, ParseErrorReportsPosition) {
  std::string path = write("bad.ap", "global g;\nmeth main(x) {\n  g := 1\n}\n");
  EXPECT_EQ(cmd_run(path, kDefaultBudget, std::nullopt, false, out_, err_), kExitInput);
  EXPECT_EQ(out_.str(), "");
  EXPECT_EQ(err_.str(), path + ":4:1 expected ';', found '}'\n");
}

TEST_F(CliTest, ScopeErrorsAreInputErrors) {
  std::string path = write("scope.ap", "global g; meth main(x) { g := y; }");
  EXPECT_EQ(cmd_parse(path, false, out_, err_), kExitInput);
  EXPECT_NE(err_.str().find("unknown-variable"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MissingFileIsInputError) {
  EXPECT_EQ(cmd_analyze((dir_ / "nope.ap").string(), out_, err_), kExitInput);
  EXPECT_NE(err_.str().find("cannot read"), std::string::npos);
}

TEST_F(CliTest, ZeroBudgetIsInputError) {
  EXPECT_EQ(cmd_run(sample("priority.ap"), 0, std::nullopt, false, out_, err_), kExitInput);
}

TEST_F(CliTest, ProvidedFailureExitsOne) {
  EXPECT_EQ(cmd_run(sample("guard.ap"), kDefaultBudget, std::nullopt, false, out_, err_), kExitRuntime);
  EXPECT_EQ(out_.str(), "{\"kind\":\"provided-failed\",\"line\":10,\"col\":3}\n");
}

TEST_F(CliTest, BudgetExhaustion) {
  EXPECT_EQ(cmd_run(sample("spin.ap"), 1000, std::nullopt, false, out_, err_), kExitRuntime);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["kind"], "step-budget-exhausted");
}

TEST_F(CliTest, EmitAstRoundTrips) {
  EXPECT_EQ(cmd_parse(sample("countdown.ap"), true, out_, err_), kExitOk);
  Program from_json = program_from_json(ojson::parse(out_.str()));
  std::ifstream in(sample("countdown.ap"));
  std::stringstream src;
  src << in.rdbuf();
  EXPECT_EQ(from_json, parse_program(src.str()));
}

TEST_F(CliTest, ParsePrettyPrintsCanonicalText) {
  std::string path = write("p.ap", "global g;meth m(x){g:=x+1;}");
  EXPECT_EQ(cmd_parse(path, false, out_, err_), kExitOk);
  EXPECT_EQ(out_.str(), "global g;\n\nmeth m(x) {\n  g := x + 1;\n}\n");
}

TEST_F(CliTest, AnalyzeReportsDeadPost) {
  EXPECT_EQ(cmd_analyze(sample("logger.ap"), out_, err_), kExitOk);
  auto j = nlohmann::json::parse(out_.str());
  EXPECT_EQ(j["effect_free"], nlohmann::json::array({"log"}));
  ASSERT_EQ(j["dead_posts"].size(), 1u);
  EXPECT_EQ(j["dead_posts"][0]["method"], "log");
  EXPECT_EQ(j["dead_posts"][0]["line"], 6);
  EXPECT_EQ(j["edges"].size(), 2u);
}

TEST_F(CliTest, TraceFileIsDeterministic) {
  std::string t1 = (dir_ / "t1.jsonl").string(), t2 = (dir_ / "t2.jsonl").string();
  std::ostringstream o1, o2;
  EXPECT_EQ(cmd_run(sample("countdown.ap"), kDefaultBudget, t1, false, o1, err_), kExitOk);
  EXPECT_EQ(cmd_run(sample("countdown.ap"), kDefaultBudget, t2, false, o2, err_), kExitOk);
  EXPECT_EQ(o1.str(), o2.str());
  std::string a = slurp(t1);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(t2));
  std::istringstream lines(a);
  std::string line, last;
  while (std::getline(lines, line)) {
    EXPECT_NO_THROW(auto parsed = nlohmann::json::parse(line)) << line;
    last = line;
  }
  EXPECT_EQ(last, "{\"kind\":\"finished\",\"global\":4}");
}

TEST_F(CliTest, TraceWrittenOnError) {
  std::string t = (dir_ / "t.jsonl").string();
  EXPECT_EQ(cmd_run(sample("guard.ap"), kDefaultBudget, t, false, out_, err_), kExitRuntime);
  EXPECT_NE(slurp(t).find("provided-fail"), std::string::npos);
}

TEST_F(CliTest, DispatchThroughConfig) {
  CliConfig cfg;
  cfg.command = Command::analyze;
  cfg.input = sample("priority.ap");
  EXPECT_EQ(run(cfg, out_, err_), kExitOk);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["dead_posts"].size(), 0u);
}

}  // namespace
}  // namespace asynchp::cli
