// sclab: command-line entry point for the search-contempt lab.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sclab/sclab.hpp"

namespace fs = std::filesystem;
using namespace sclab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read " + what + " '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Loads a config file (if any) and applies `--set key=value` overrides.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig{} : parse_config(read_file(path, "config file"));
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError(kv, 0, "override must look like key=value");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  try {
    cfg.search_config().validate();
  } catch (const ContractError& e) {
    throw ConfigError("", 0, e.what());
  }
  return cfg;
}

std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(10) << x;
  return o.str();
}

std::string ratio_text(const SelfPlayStats& s) { return s.ratio_infinite ? "inf" : fmt(s.ratio); }

/// metric,param,value rows for one batch.
void append_metrics(std::ostringstream& csv, const SelfPlayStats& s, const std::string& param,
                    const std::string& curve_metric) {
  csv << "games," << param << ',' << s.games() << '\n';
  csv << "w," << param << ',' << s.w << '\n';
  csv << "d," << param << ',' << s.d << '\n';
  csv << "l," << param << ',' << s.l << '\n';
  csv << "wl_over_d," << param << ',' << ratio_text(s) << '\n';
  for (const auto& [m, f] : s.repeat_curve) csv << curve_metric << ',' << m << ',' << fmt(f) << '\n';
}

template <GameState S>
std::vector<GameRecord<S>> run_batch(const RunConfig& cfg, const Evaluator<S>& eval) {
  const auto starts = start_states<S>(cfg);
  return batch_selfplay(static_cast<std::size_t>(cfg.games), starts.front(), eval,
                        cfg.search_config(), cfg.search.seed, cfg.workers, cfg.max_plies);
}

template <GameState S>
int selfplay(const RunConfig& cfg) {
  const auto eval = make_evaluator<S>(cfg);
  auto games = run_batch<S>(cfg, *eval);
  for (auto& g : games) g.white = g.black = cfg.name;
  const auto stats = wdl_ratio(games);
  const fs::path dir(cfg.output_dir);
  write_file(dir / "selfplay.pgn", export_pgn(games, "sclab selfplay"));
  std::ostringstream csv;
  csv << "metric,param,value\n";
  const std::string nscl = get_config_value(cfg, "n_scl");
  append_metrics(csv, stats, nscl, "repeat_fraction");
  write_file(dir / "selfplay_metrics.csv", csv.str());
  std::cout << "games " << stats.games() << "  w " << stats.w << "  d " << stats.d << "  l "
            << stats.l << "  (w+l)/d " << ratio_text(stats) << '\n';
  return 0;
}

template <GameState S>
int sweep(const RunConfig& base, const std::string& param, const std::vector<std::string>& values) {
  std::ostringstream csv;
  csv << "metric,param,value\n";
  const std::string label = param == "n_scl" ? "nscl" : param;
  for (const auto& v : values) {
    RunConfig cfg = base;
    set_config_value(cfg, param, v);
    const auto eval = make_evaluator<S>(cfg);
    const auto games = run_batch<S>(cfg, *eval);
    const auto stats = wdl_ratio(games);
    std::ostringstream curve;
    curve << "repeat_fraction_" << label << '_' << v;
    append_metrics(csv, stats, v, curve.str());
    std::cout << param << ' ' << v << "  w " << stats.w << "  d " << stats.d << "  l " << stats.l
              << "  (w+l)/d " << ratio_text(stats) << '\n';
  }
  write_file(fs::path(base.output_dir) / "sweep_metrics.csv", csv.str());
  return 0;
}

template <GameState S>
int match(const RunConfig& a, const RunConfig& b, int games, std::uint64_t seed) {
  const auto ea = make_evaluator<S>(a);
  const auto eb = make_evaluator<S>(b);
  std::string name_a = a.name, name_b = b.name;
  if (name_a == name_b) {
    name_a += "-a";
    name_b += "-b";
  }
  const Engine<S> engine_a{ea.get(), a.search_config(), name_a};
  const Engine<S> engine_b{eb.get(), b.search_config(), name_b};
  const auto result =
      play_match(engine_a, engine_b, games, start_states<S>(a), seed, a.workers, a.max_plies);
  const fs::path dir(a.output_dir);
  const std::string summary = match_summary(result, name_a, name_b);
  write_file(dir / "match.pgn", export_pgn(result.games, "sclab match"));
  write_file(dir / "match_games.csv", match_games_csv(result));
  write_file(dir / "match_summary.txt", summary);
  std::cout << summary;
  return 0;
}

template <GameState S>
int train(const RunConfig& cfg) {
  TrainingSchedule sched;
  sched.iterations = cfg.iterations;
  sched.target_ratio = cfg.target_ratio;
  sched.games_per_iteration = cfg.games_per_iteration;
  sched.steps_per_iteration = cfg.steps_per_iteration;
  sched.batch_size = cfg.batch_size;
  sched.learning_rate = cfg.learning_rate;
  sched.visits = cfg.search.visits;
  sched.nscl = std::min<std::uint64_t>(cfg.search.nscl, cfg.search.visits);
  sched.plateau_window = cfg.plateau_window;
  sched.max_visits = cfg.max_visits;
  sched.c_puct = cfg.search.c_puct;
  sched.temperature = cfg.search.temperature;
  sched.buffer_capacity = cfg.buffer_capacity;
  sched.hidden_width = cfg.hidden_width;
  sched.max_plies = cfg.max_plies;
  sched.workers = cfg.workers;
  sched.output_dir = cfg.output_dir;
  try {
    sched.validate();
  } catch (const ContractError& e) {
    throw ConfigError("", 0, e.what());
  }
  const auto run = training_loop(sched, start_states<S>(cfg).front(), cfg.search.seed);
  std::cout << training_log_csv(run.log);
  return 0;
}

template <GameState S>
int analyze(const RunConfig& cfg, const std::string& position, const std::string& pgn_path) {
  const auto eval = make_evaluator<S>(cfg);
  std::vector<AnalysisReport> reports;
  if (!pgn_path.empty()) {
    reports = analyze_pgn<S>(read_file(pgn_path, "PGN file"), *eval, cfg.n_low, cfg.n_high,
                             cfg.threshold, cfg.search_config());
  } else {
    S state = [&] {
      try {
        return S::parse(position);
      } catch (const std::exception& e) {
        throw ConfigError("", 0, std::string("invalid position: ") + e.what());
      }
    }();
    if (state.terminal()) throw ConfigError("", 0, "position is terminal; nothing to search");
    reports.push_back(analyze_position(state, *eval, cfg.n_low, cfg.n_high, cfg.threshold,
                                       cfg.search_config()));
  }
  std::cout << analysis_csv(reports);
  return 0;
}

template <template <class> class Fn, class... Args>
int dispatch(GameId game, Args&&... args) {
  if (game == GameId::Chess) return Fn<ChessState>::run(std::forward<Args>(args)...);
  return Fn<TicTacToe>::run(std::forward<Args>(args)...);
}

template <class S> struct SelfplayCmd { static int run(const RunConfig& c) { return selfplay<S>(c); } };
template <class S> struct TrainCmd { static int run(const RunConfig& c) { return train<S>(c); } };
template <class S> struct SweepCmd {
  static int run(const RunConfig& c, const std::string& p, const std::vector<std::string>& v) {
    return sweep<S>(c, p, v);
  }
};
template <class S> struct MatchCmd {
  static int run(const RunConfig& a, const RunConfig& b, int g, std::uint64_t s) {
    return match<S>(a, b, g, s);
  }
};
template <class S> struct AnalyzeCmd {
  static int run(const RunConfig& c, const std::string& f, const std::string& p) {
    return analyze<S>(c, f, p);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sclab: search-contempt MCTS lab (self-play, matches, training, analysis)"};
  app.require_subcommand(1);
  app.footer(config_help());

  std::vector<std::string> overrides;
  auto add_set = [&overrides](CLI::App* sub) {
    sub->add_option("--set", overrides, "override a config key (key=value); repeatable");
  };

  std::string fen(chess::kStartFen);
  int depth = 1;
  auto* perft = app.add_subcommand("perft", "count leaf nodes of the legal chess move tree");
  perft->add_option("--fen", fen, "position (default: standard start)");
  perft->add_option("--depth", depth, "search depth")->required()->check(CLI::Range(0, 12));

  std::string config;
  std::string nscl;
  std::optional<int> games;
  std::optional<std::uint64_t> seed;
  auto* sp = app.add_subcommand("selfplay", "play a self-play batch; writes PGN and metrics CSV");
  sp->add_option("--config", config, "config file");
  sp->add_option("--nscl", nscl, "override n_scl");
  sp->add_option("--games", games, "override games");
  sp->add_option("--seed", seed, "override seed");
  add_set(sp);

  std::string config_a, config_b;
  auto* mt = app.add_subcommand("match", "color-balanced match between two configs");
  mt->add_option("--config-a", config_a, "engine A config")->required();
  mt->add_option("--config-b", config_b, "engine B config")->required();
  mt->add_option("--games", games, "number of games (even)");
  mt->add_option("--seed", seed, "base seed (default: seed of config A)");
  add_set(mt);

  std::string param = "nscl";
  std::vector<std::string> values;
  auto* sw = app.add_subcommand("sweep", "self-play batches over values of one config key");
  sw->add_option("--config", config, "config file");
  sw->add_option("--param", param, "config key to sweep (nscl is an alias of n_scl)");
  sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  add_set(sw);

  auto* tr = app.add_subcommand("train", "closed self-play training loop");
  tr->add_option("--config", config, "config file");
  add_set(tr);

  std::string position, pgn;
  auto* an = app.add_subcommand("analyze", "compare low- and high-budget search values");
  an->add_option("--config", config, "config file");
  auto* fen_opt = an->add_option("--fen", position, "position to analyze");
  auto* pgn_opt = an->add_option("--pgn", pgn, "scan every position of a PGN file");
  fen_opt->excludes(pgn_opt);
  add_set(an);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*perft) {
      const auto state = ChessState::parse(fen);
      std::cout << chess::perft(state.board(), depth) << '\n';
      return 0;
    }
    if (*sp) {
      RunConfig cfg = load_config(config, overrides);
      if (!nscl.empty()) set_config_value(cfg, "n_scl", nscl);
      if (games) set_config_value(cfg, "games", std::to_string(*games));
      if (seed) set_config_value(cfg, "seed", std::to_string(*seed));
      return dispatch<SelfplayCmd>(cfg.game, cfg);
    }
    if (*mt) {
      const RunConfig a = load_config(config_a, overrides);
      const RunConfig b = load_config(config_b, overrides);
      if (a.game != b.game) throw ConfigError("game", 0, "match configs name different games");
      const int n = games.value_or(a.games);
      if (n < 2 || n % 2 != 0) throw ConfigError("games", 0, "match needs a positive even game count");
      return dispatch<MatchCmd>(a.game, a, b, n, seed.value_or(a.search.seed));
    }
    if (*sw) {
      const RunConfig cfg = load_config(config, overrides);
      if (param == "nscl") param = "n_scl";
      RunConfig probe = cfg;
      for (const auto& v : values) set_config_value(probe, param, v);  // validate up front
      return dispatch<SweepCmd>(cfg.game, cfg, param, values);
    }
    if (*tr) {
      const RunConfig cfg = load_config(config, overrides);
      return dispatch<TrainCmd>(cfg.game, cfg);
    }
    if (*an) {
      const RunConfig cfg = load_config(config, overrides);
      if (position.empty() && pgn.empty()) throw ConfigError("", 0, "analyze needs --fen or --pgn");
      if (cfg.n_low >= cfg.n_high) throw ConfigError("n_low", 0, "n_low must be below n_high");
      return dispatch<AnalyzeCmd>(cfg.game, cfg, position, pgn);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedGameError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
