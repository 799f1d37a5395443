#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "oracle/tictactoe_minimax.hpp"
#include "sclab/cli/analyze.hpp"
#include "sclab/cli/config.hpp"
#include "sclab/cli/factory.hpp"
#include "sclab/eval/evaluation.hpp"
#include "sclab/games/tictactoe.hpp"

using namespace sclab;
namespace fs = std::filesystem;

namespace {

struct RunOutput {
  int code = -1;
  std::string out;
};

RunOutput run_cli(const std::string& args) {
  const std::string cmd = std::string(SCLAB_CLI_PATH) + " " + args + " 2>&1";
  RunOutput r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sclab_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  const auto cfg = parse_config("");
  EXPECT_EQ(cfg.search.visits, 1000u);
  EXPECT_EQ(cfg.search.nscl, kNsclInfinite);
  EXPECT_EQ(cfg.search.c_puct, 1.5);
  EXPECT_EQ(cfg.game, GameId::Chess);
  const auto comments_only = parse_config("# nothing here\n\n   # indented\n");
  EXPECT_EQ(comments_only.search, cfg.search);
}

TEST(Config, TypedValues) {
  const auto cfg = parse_config(
      "n_scl = 5\nvisits=400  # inline comment\ngame = tictactoe\ntemperature = 0:1.2,30:0.15\n");
  EXPECT_EQ(cfg.search.nscl, 5u);
  EXPECT_EQ(cfg.search.visits, 400u);
  EXPECT_EQ(cfg.game, GameId::TicTacToe);
  EXPECT_EQ(cfg.search.temperature, tau2_schedule());
  EXPECT_EQ(parse_config("n_scl = inf").search.nscl, kNsclInfinite);
}

TEST(Config, TypeErrorNamesKeyAndLine) {
  try {
    parse_config("visits = 10\n\nn_scl = banana\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "n_scl");
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Config, RejectsUnknownDuplicateAndMalformed) {
  EXPECT_THROW(parse_config("nscl_typo = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("visits = 3\nvisits = 4\n"), ConfigError);
  EXPECT_THROW(parse_config("visits 3\n"), ConfigError);
  EXPECT_THROW(parse_config("visits = -3\n"), ConfigError);
  EXPECT_THROW(parse_config("game = go\n"), ConfigError);
  EXPECT_THROW(parse_config("temperature = 0:1,0:2\n"), ConfigError);
}

TEST(Config, GetSetRoundTrip) {
  RunConfig cfg;
  for (const auto& key : config_schema()) {
    const std::string v = get_config_value(cfg, key.name);
    RunConfig other;
    set_config_value(other, key.name, v);
    EXPECT_EQ(get_config_value(other, key.name), v) << key.name;
  }
}

TEST(Config, HelpListsEveryKeyWithDefault) {
  const auto help = config_help();
  for (const auto& key : config_schema()) {
    EXPECT_NE(help.find(key.name), std::string::npos) << key.name;
  }
  EXPECT_NE(help.find("1000"), std::string::npos);
  EXPECT_NE(help.find("inf"), std::string::npos);
}

TEST(Factory, EvaluatorChoices) {
  RunConfig cfg;
  cfg.game = GameId::TicTacToe;
  EXPECT_NE(make_evaluator<TicTacToe>(cfg), nullptr);
  cfg.evaluator = "heuristic";
  EXPECT_THROW(make_evaluator<TicTacToe>(cfg), UnsupportedGameError);
  cfg.evaluator = "net";
  EXPECT_THROW(make_evaluator<TicTacToe>(cfg), ConfigError);
  cfg.evaluator = "magic";
  EXPECT_THROW(make_evaluator<TicTacToe>(cfg), ConfigError);
  cfg.start = "XXX";
  EXPECT_THROW(start_states<TicTacToe>(cfg), ConfigError);
  cfg.start = "X...O....;....X....";
  EXPECT_EQ(start_states<TicTacToe>(cfg).size(), 2u);
}

TEST(Analyze, HiddenForcedWinIsFlagged) {
  // X to move wins by force, but no move wins at once.
  const std::string board = ".......OX";
  oracle::TicTacToeSolver sol;
  ASSERT_EQ(sol.value(board), 1);
  const auto s = TicTacToe::parse(board);
  for (auto a : s.legal_actions()) {
    const auto t = s.apply(a).terminal();
    ASSERT_TRUE(!t || t->value == OutcomeValue::Draw);
  }
  const UniformEvaluator<TicTacToe> u;
  const auto r = analyze_position(s, u, 16, 4096, 0.5);
  EXPECT_TRUE(r.flagged);
  EXPECT_GT(r.value_high - r.value_low, 0.5);
  EXPECT_GT(r.value_high, 0.5);
  EXPECT_EQ(r.raw_value, 0.0);
}

TEST(Analyze, ContractChecks) {
  const UniformEvaluator<TicTacToe> u;
  EXPECT_THROW(analyze_position(TicTacToe::parse("XXXOO...."), u, 16, 64, 0.5), ContractError);
  EXPECT_THROW(analyze_position(TicTacToe::initial(), u, 64, 16, 0.5), ContractError);
  EXPECT_THROW(analyze_position(TicTacToe::initial(), u, 16, 64, -1.0), ContractError);
}

TEST(Analyze, PgnScanCoversNonTerminalPositions) {
  const UniformEvaluator<TicTacToe> u;
  const std::string pgn = "[Variant \"TicTacToe\"]\n\n1. b2 a3 2. c1 a1 *\n";
  const auto reports = analyze_pgn<TicTacToe>(pgn, u, 8, 32, 0.5);
  ASSERT_EQ(reports.size(), 5u);
  EXPECT_EQ(reports[0].ply, 0);
  EXPECT_EQ(reports[4].ply, 4);
  EXPECT_EQ(reports[4].position, "O...X.O.X");
}

TEST(CliBinary, ExitCodes) {
  EXPECT_EQ(run_cli("perft --depth 2").code, 0);
  EXPECT_EQ(run_cli("perft --depth 2").out, "400\n");
  EXPECT_EQ(run_cli("perft --fen nonsense --depth 1").code, 2);
  EXPECT_EQ(run_cli("bogus").code, 2);
  const auto dir = scratch("codes");
  write(dir / "bad.conf", "n_scl = banana\n");
  const auto bad = run_cli("selfplay --config " + (dir / "bad.conf").string());
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("n_scl"), std::string::npos);
  EXPECT_NE(bad.out.find("line 1"), std::string::npos);
  EXPECT_EQ(run_cli("selfplay --config " + (dir / "missing.conf").string()).code, 2);
  EXPECT_EQ(run_cli("analyze --set game=tictactoe --fen XXXOO....").code, 2);
  write(dir / "ckpt.conf", "game = tictactoe\nevaluator = net\ncheckpoint = " +
                               (dir / "garbage.tnet").string() + "\n");
  write(dir / "garbage.tnet", "not a network");
  EXPECT_EQ(run_cli("selfplay --games 1 --config " + (dir / "ckpt.conf").string()).code, 2);
  write(dir / "file", "");
  const auto unwritable = run_cli("selfplay --set game=tictactoe --set visits=8 --set games=1 "
                                  "--set output_dir=" + (dir / "file" / "out").string());
  EXPECT_EQ(unwritable.code, 3) << unwritable.out;
  fs::remove_all(dir);
}

TEST(CliBinary, HelpEnumeratesKeys) {
  const auto r = run_cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const auto& key : config_schema()) EXPECT_NE(r.out.find(key.name), std::string::npos) << key.name;
}

TEST(CliBinary, SelfplayOutputsAreByteStable) {
  const auto dir = scratch("selfplay");
  write(dir / "c.conf", "game = tictactoe\nvisits = 32\nn_scl = 3\ngames = 6\nworkers = 2\n"
                        "output_dir = " + (dir / "out").string() + "\n");
  ASSERT_EQ(run_cli("selfplay --config " + (dir / "c.conf").string()).code, 0);
  const auto pgn = slurp(dir / "out" / "selfplay.pgn");
  const auto csv = slurp(dir / "out" / "selfplay_metrics.csv");
  EXPECT_EQ(csv.substr(0, 19), "metric,param,value\n");
  EXPECT_NE(csv.find("wl_over_d,3,"), std::string::npos);
  ASSERT_EQ(run_cli("selfplay --config " + (dir / "c.conf").string()).code, 0);
  EXPECT_EQ(slurp(dir / "out" / "selfplay.pgn"), pgn);
  EXPECT_EQ(slurp(dir / "out" / "selfplay_metrics.csv"), csv);
  fs::remove_all(dir);
}

TEST(CliBinary, AnalyzeFlagsHiddenWin) {
  const auto r = run_cli("analyze --set game=tictactoe --set n_low=16 --set n_high=4096 --fen .......OX");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "game,ply,position,raw,v_low,v_high,best_low,best_high,flagged");
  EXPECT_EQ(r.out.back(), '\n');
  EXPECT_NE(r.out.find(",1\n"), std::string::npos);
}
