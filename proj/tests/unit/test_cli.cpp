#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/run_config.hpp"
#include "fixtures.hpp"

using namespace chunkstore;
using namespace chunkstore::cli;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "chunkstore");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<json> records(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small end-to-end workspace: corpus, vocabulary, model and datastore.
class Workspace : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fixtures::temp_path("cli_ws");
    std::filesystem::create_directories(dir_);
    json cfg = {{"seed", 3},
                {"threads", 1},
                {"paths",
                 {{"vocab", dir_ + "/vocab.txt"},
                  {"model", dir_ + "/model.bin"},
                  {"datastore", dir_ + "/store.bin"},
                  {"train_source", dir_ + "/train.src"},
                  {"train_target", dir_ + "/train.tgt"},
                  {"test_source", dir_ + "/test.src"},
                  {"test_target", dir_ + "/test.tgt"}}},
                {"datastore", {{"chunk_size", 8}}},
                {"decode", {{"beam", 3}, {"max_len", 60}}},
                {"synthetic",
                 {{"source_words", 60},
                  {"target_words", 60},
                  {"phrases", 60},
                  {"train_count", 300},
                  {"test_count", 3}}}};
    config_ = dir_ + "/run.json";
    std::ofstream(config_) << cfg.dump(2);
    for (const char* cmd : {"make-synthetic", "build-vocab", "train-model", "build-datastore"}) {
      auto r = run({cmd, "--config", config_});
      ASSERT_EQ(r.code, 0) << cmd << ": " << r.err;
    }
  }

  static std::string dir_;
  static std::string config_;
};

std::string Workspace::dir_;
std::string Workspace::config_;

}  // namespace

TEST(RunConfig, DefaultsAndRoundTrip) {
  RunConfig c;
  EXPECT_EQ(c.decode.k, 8u);
  EXPECT_EQ(c.decode.lambda, 0.7);
  EXPECT_EQ(c.decode.temp, 10.0);
  EXPECT_EQ(c.decode.lambda_cache, 0.5);
  EXPECT_EQ(c.decode.temp_cache, 1.0);
  c.decode.schedule = ScheduleConfig::fixed(6);
  c.decode.cache_capacity = 100;
  c.ablate.k = {4, 8};
  auto back = RunConfig::from_json_text(c.to_json_text());
  EXPECT_EQ(back.to_json_text(), c.to_json_text());
  EXPECT_NO_THROW(back.validate());
}

TEST(RunConfig, UnknownKeysAndBadTypesNameTheField) {
  auto field_of = [](const std::string& text) {
    try {
      RunConfig::from_json_text(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"decode": {"lambdaa": 0.5}})"), "decode.lambdaa");
  EXPECT_EQ(field_of(R"({"bogus": 1})"), "bogus");
  EXPECT_EQ(field_of(R"({"decode": {"k": "eight"}})"), "decode.k");
  EXPECT_EQ(field_of(R"({"decode": {"k": -1}})"), "decode.k");
  EXPECT_EQ(field_of(R"({"decode": {"schedule": {"mode": "fixed", "step": 3}}})"),
            "decode.schedule.step");
  EXPECT_EQ(field_of(R"({"decode": {"schedule": "sometimes"}})"), "decode.schedule");
  EXPECT_EQ(field_of(R"({"ablate": {"schedules": ["fixed:6", 7]}})"), "ablate.schedules[1]");
  EXPECT_EQ(field_of(R"({"paths": []})"), "paths");
  EXPECT_EQ(field_of("{not json"), "<root>");
}

TEST(RunConfig, SemanticValidation) {
  RunConfig c;
  c.decode.lambda = 1.5;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "decode.lambda");
  }
  c = RunConfig{};
  c.datastore.d_key = 128;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.decode.strategy = "cache:global";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunConfig, FlagsOverrideFileValues) {
  auto c = RunConfig::from_json_text(R"({"decode": {"k": 4, "lambda": 0.6, "beam": 2}})");
  Overrides ov;
  ov.k = 16;
  ov.schedule = "fixed:6";
  ov.index = "ivf";
  ov.apply(c);
  EXPECT_EQ(c.decode.k, 16u);
  EXPECT_EQ(c.decode.lambda, 0.6);
  EXPECT_EQ(c.decode.beam, 2u);
  EXPECT_EQ(c.decode.schedule.mode, ScheduleMode::kFixed);
  EXPECT_EQ(c.datastore.index, "ivf");
  Overrides geo;
  geo.i_max = 32;
  geo.apply(c);
  EXPECT_EQ(c.decode.schedule.mode, ScheduleMode::kGeometric);
  EXPECT_EQ(c.decode.schedule.i_max, 32u);
  auto d = c.decode_config();
  EXPECT_EQ(d.mix.k, 16);
  EXPECT_EQ(d.beam_size, 2u);
}

TEST(Cli, DumpConfigReflectsFlags) {
  auto r = run({"translate", "--dump-config", "--k", "5", "--strategy", "vanilla"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(r.out);
  EXPECT_EQ(doc["decode"]["k"], 5);
  EXPECT_EQ(doc["decode"]["strategy"], "vanilla");
}

TEST(Cli, BadFlagsAreValidationErrors) {
  EXPECT_EQ(run({"translate", "--index", "hnsw"}).code, 1);
  EXPECT_EQ(run({"translate", "--k", "many"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  auto r = run({"translate", "--strategy", "cache:global"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("decode.strategy"), std::string::npos);
}

TEST_F(Workspace, TranslateBaseEmitsOneRecordPerLine) {
  auto r = run({"translate", "--config", config_, "--strategy", "base"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto recs = records(r.out);
  ASSERT_EQ(recs.size(), 3u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i]["id"], i);
    for (const char* key : {"hypothesis", "bleu", "tokens", "ds_searches", "cache_searches",
                            "wall_ms"}) {
      EXPECT_TRUE(recs[i].contains(key)) << key;
    }
    EXPECT_EQ(recs[i]["ds_searches"], 0);
  }
}

TEST_F(Workspace, MissingDatastorePathIsValidationError) {
  auto cfg = json::parse(slurp(config_));
  cfg["paths"].erase("datastore");
  const auto path = dir_ + "/no_store.json";
  std::ofstream(path) << cfg.dump();
  auto r = run({"translate", "--config", path, "--strategy", "cache:sentence_level"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("paths.datastore"), std::string::npos) << r.err;
  auto gone = run({"translate", "--config", config_, "--datastore", dir_ + "/absent.bin"});
  EXPECT_EQ(gone.code, 1);
  EXPECT_NE(gone.err.find("paths.datastore"), std::string::npos);
}

TEST_F(Workspace, CorruptDatastoreIsRuntimeError) {
  const auto bad = dir_ + "/corrupt.bin";
  std::ofstream(bad) << "XXXXgarbage";
  auto r = run({"translate", "--config", config_, "--datastore", bad});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("BadMagic"), std::string::npos) << r.err;
}

TEST_F(Workspace, AblateOverFiveSchedules) {
  auto r = run({"ablate", "--config", config_});
  ASSERT_EQ(r.code, 0) << r.err;
  auto recs = records(r.out);
  ASSERT_EQ(recs.size(), 5u);
  std::vector<std::string> schedules;
  for (const auto& rec : recs) {
    EXPECT_TRUE(rec.contains("bleu"));
    EXPECT_TRUE(rec.contains("searches_per_token"));
    schedules.push_back(rec["schedule"]);
  }
  EXPECT_EQ(schedules, (std::vector<std::string>{"fixed(6)", "fixed(8)", "geometric(2,8)",
                                                 "geometric(2,16)", "geometric(2,32)"}));
}

TEST_F(Workspace, TranslationOutputIsReproducible) {
  const auto a = dir_ + "/hyp_a.txt", b = dir_ + "/hyp_b.txt";
  ASSERT_EQ(run({"translate", "--config", config_, "--output", a}).code, 0);
  ASSERT_EQ(run({"translate", "--config", config_, "--output", b}).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST_F(Workspace, IvfStoreAndBench) {
  const auto store = dir_ + "/store_ivf.bin";
  auto built = run({"build-datastore", "--config", config_, "--datastore", store, "--index",
                    "ivf"});
  ASSERT_EQ(built.code, 0) << built.err;
  EXPECT_TRUE(records(built.out)[0].contains("n_clusters"));
  auto r = run({"bench", "--config", config_, "--datastore", store, "--index", "ivf", "--nprobe",
                "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto recs = records(r.out);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_GT(recs[0]["tokens"].get<int>(), 0);
  EXPECT_NE(r.err.find("tokens_per_sec"), std::string::npos);
}

TEST_F(Workspace, OnTheFlyReportsBlocks) {
  auto cfg = json::parse(slurp(config_));
  cfg["paths"]["test_source"] = cfg["paths"]["train_source"];
  cfg["paths"]["test_target"] = cfg["paths"]["train_target"];
  cfg["onthefly"] = {{"warm_fraction", 0.2}, {"update_block", 80}, {"report_block", 120}};
  const auto path = dir_ + "/stream.json";
  std::ofstream(path) << cfg.dump();
  auto r = run({"onthefly", "--config", path, "--strategy", "vanilla", "--lambda", "0.8"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto recs = records(r.out);
  ASSERT_EQ(recs.size(), 3u);  // 240 translated: two report blocks plus the summary
  EXPECT_EQ(recs[0]["begin"], 60);
  EXPECT_EQ(recs.back()["type"], "summary");
  EXPECT_EQ(recs.back()["updates"], 2);
}

TEST(CliBinary, ExitCodes) {
  auto status = [](const std::string& args) {
    const std::string cmd = std::string(CHUNKSTORE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status("translate --beam zero"), 1);
  const auto bad = fixtures::temp_path("cli_bad_vocab.txt");
  std::ofstream(bad) << "not a vocabulary\n";
  const auto src = fixtures::temp_path("cli_src.txt");
  std::ofstream(src) << "a b\n";
  const auto model = fixtures::temp_path("cli_model.bin");
  std::ofstream(model) << "junk";
  EXPECT_EQ(status("translate --strategy base --vocab " + bad + " --model " + model +
                   " --test-src " + src),
            2);
}
