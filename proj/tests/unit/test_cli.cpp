#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "config.hpp"
#include "seg/engine.hpp"
#include "seg/io.hpp"

namespace seg::cli {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("seg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int seg(const std::string& args) {
    const std::string cmd = std::string(SEG_CLI_PATH) + " " + args + " > " +
                            (dir_ / "stdout.txt").string() + " 2> " + (dir_ / "stderr.txt").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }
  std::string scene(const char* name) const {
    return std::string(SEG_SCENES_DIR) + "/" + name;
  }
  std::string stdout_text() const { return io::read_text(dir_ / "stdout.txt"); }
  std::string stderr_text() const { return io::read_text(dir_ / "stderr.txt"); }

  fs::path dir_;
};

TEST_F(Cli, PlayIsByteDeterministic) {
  const std::string args = "play --scene " + scene("five-obstacles.json") +
                           " --m 16 --controller 'mcts(blend,25)' --seed 7 --k-max 12 --trace";
  ASSERT_EQ(seg(args + " --out " + (dir_ / "a").string()), 0) << stderr_text();
  ASSERT_EQ(seg(args + " --out " + (dir_ / "b").string() + " --workers 1"), 0) << stderr_text();
  EXPECT_EQ(io::read_text(dir_ / "a/record.json"), io::read_text(dir_ / "b/record.json"));
  EXPECT_EQ(io::read_text(dir_ / "a/trace.jsonl"), io::read_text(dir_ / "b/trace.jsonl"));
  const GameRecord r =
      game_record_from_json(nlohmann::json::parse(io::read_text(dir_ / "a/record.json")));
  EXPECT_EQ(r.seed, 7u);
  EXPECT_EQ(r.k_max, 12);
  EXPECT_NE(stdout_text().find("outcome"), std::string::npos);
}

TEST_F(Cli, SweepWritesOneRowPerFreeCell) {
  const fs::path out = dir_ / "sweep";
  ASSERT_EQ(seg("sweep --scene " + scene("circle.json") +
                " --m 12 --controller distance --k-max 10 --out " + out.string()),
            0)
      << stderr_text();
  const std::string csv = io::read_text(out / "sweep.csv");
  const GameContext ctx(load_scene(scene("circle.json")), Grid2D(12));
  std::size_t free = 0;
  for (std::size_t k = 0; k < ctx.grid().size(); ++k) free += ctx.phi()[k] > 0.0 ? 1 : 0;
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), free + 1);
  const auto summary = nlohmann::json::parse(io::read_text(out / "summary.json"));
  EXPECT_EQ(summary["n_games"].get<int>() + summary["filtered_starts"].get<int>(),
            static_cast<int>(free));
  EXPECT_EQ(io::read_field(out / "slice").field.grid().m(), 12);
  EXPECT_TRUE(fs::exists(out / "slice.pgm"));
}

TEST_F(Cli, FieldsDumpsSixPanels) {
  const fs::path out = dir_ / "fields";
  ASSERT_EQ(seg("fields --scene " + scene("circle.json") + " --m 24 --vantage 0.125,0.5 --out " +
                out.string()),
            0)
      << stderr_text();
  for (const char* name :
       {"phi", "visibility", "grazing", "auxiliary", "auxiliary_visibility", "shadow"}) {
    const auto d = io::read_field(out / name);
    EXPECT_EQ(d.name, name);
    EXPECT_EQ(d.field.size(), 24u * 24u);
    EXPECT_EQ(fs::file_size(out / (std::string(name) + ".pgm")), 13u + 24u * 24u);
  }
}

TEST_F(Cli, SolveAndSlice) {
  const fs::path out = dir_ / "solve";
  ASSERT_EQ(seg("solve --scene " + scene("circle.json") + " --m 8 --T 0.5 --out " + out.string()),
            0)
      << stderr_text();
  const ValueFunction4D v = io::read_value(out / "value");
  EXPECT_EQ(v.size(), 4096u);
  EXPECT_GT(v.iterations, 0);
  EXPECT_FALSE(io::read_text(out / "convergence.log").empty());
  ASSERT_EQ(seg("slice --value " + (out / "value").string() + " --fix-pursuer 1,4 --out " +
                out.string()),
            0)
      << stderr_text();
  EXPECT_EQ(io::read_field(out / "slice").field.size(), 64u);
  EXPECT_NE(seg("slice --value " + (out / "value").string() + " --out " + out.string()), 0);

  const fs::path st = dir_ / "stationary";
  ASSERT_EQ(seg("solve --stationary --scene " + scene("circle.json") + " --m 16 --out " +
                st.string()),
            0)
      << stderr_text();
  EXPECT_EQ(io::read_field(st / "stationary").field.size(), 256u);
}

TEST_F(Cli, HistogramFromSearch) {
  const fs::path out = dir_ / "hist";
  ASSERT_EQ(seg("histogram --scene " + scene("circle.json") +
                " --m 16 --controller 'mcts(distance,120)' --block 50 --out " + out.string()),
            0)
      << stderr_text();
  const auto h = nlohmann::json::parse(io::read_text(out / "histogram.json"));
  EXPECT_EQ(h["blocks"].size(), 3u);
  EXPECT_NE(stdout_text().find("leaves 120"), std::string::npos);
  ASSERT_EQ(seg("histogram --trace-file " + (out / "trace.jsonl").string() + " --scene " +
                scene("circle.json") + " --m 16 --out " + (dir_ / "again").string() +
                " --block 50"),
            0)
      << stderr_text();
  EXPECT_EQ(io::read_text(dir_ / "again/histogram.json"), io::read_text(out / "histogram.json"));
}

TEST_F(Cli, ConfigFileAndOverrides) {
  io::write_text(dir_ / "run.json",
                 nlohmann::json{{"scene", scene("circle.json")}, {"m", 12}, {"k_max", 9},
                                {"controller", "shadow"}}
                     .dump());
  ASSERT_EQ(seg("play --config " + (dir_ / "run.json").string() + " --k-max 4 --out " +
                (dir_ / "p").string()),
            0)
      << stderr_text();
  const GameRecord r =
      game_record_from_json(nlohmann::json::parse(io::read_text(dir_ / "p/record.json")));
  EXPECT_EQ(r.k_max, 4);
  EXPECT_EQ(r.controller, "shadow");
  EXPECT_DOUBLE_EQ(r.dt, 1.5 / 12.0);
}

TEST_F(Cli, ErrorsExitNonzero) {
  io::write_text(dir_ / "bad.json", "{\"m\": 16,");
  EXPECT_NE(seg("play --config " + (dir_ / "bad.json").string()), 0);
  EXPECT_NE(stderr_text().find("bad.json"), std::string::npos);
  io::write_text(dir_ / "unknown.json", "{\"grid\": 16}");
  EXPECT_NE(seg("play --config " + (dir_ / "unknown.json").string()), 0);
  io::write_text(dir_ / "scene.json", "{\"shapes\": [");
  EXPECT_NE(seg("fields --scene " + (dir_ / "scene.json").string() + " --out " + dir_.string()), 0);
  EXPECT_NE(stderr_text().find("scene.json"), std::string::npos);
  EXPECT_NE(seg("frobnicate"), 0);
  EXPECT_NE(seg(""), 0);
  EXPECT_NE(seg("play --controller greedy --scene " + scene("circle.json")), 0);
  EXPECT_EQ(seg("--help"), 0);
}

TEST(Config, ParsingHelpers) {
  RunConfig c;
  apply_json(c, {{"m", 40}, {"controller", "mcts(shadow,5)"}});
  EXPECT_EQ(c.m, 40);
  EXPECT_EQ(c.controller, "mcts(shadow,5)");
  EXPECT_THROW(apply_json(c, {{"nope", 1}}), std::invalid_argument);
  EXPECT_THROW(apply_json(c, {{"m", "x"}}), std::invalid_argument);
  EXPECT_EQ(to_json(c)["m"], 40);
  EXPECT_EQ(parse_cells("1,2; 3,4"), (std::vector<Cell>{{1, 2}, {3, 4}}));
  EXPECT_TRUE(parse_cells("").empty());
  EXPECT_THROW(parse_cell("1.5,2"), std::invalid_argument);
  EXPECT_THROW(parse_point("0.5"), std::invalid_argument);
  EXPECT_DOUBLE_EQ(parse_point("0.25, 0.75").y, 0.75);
}

}  // namespace
}  // namespace seg::cli
