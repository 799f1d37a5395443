#pragma once

// Flat `key = value` run configuration with a fixed schema.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sclab/core/game.hpp"
#include "sclab/search/config.hpp"

namespace sclab {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& msg)
      : std::runtime_error(format(key, line, msg)), key_(std::move(key)), line_(line) {}

  const std::string& key() const { return key_; }
  /// 1-based line in the config text, or 0 for command-line overrides.
  int line() const { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& msg) {
    std::string s = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    if (!key.empty()) s += "key '" + key + "': ";
    return s + msg;
  }
  std::string key_;
  int line_;
};

struct RunConfig {
  GameId game = GameId::Chess;
  /// auto | uniform | heuristic | net
  std::string evaluator = "auto";
  std::string checkpoint;
  SearchConfig search = default_search();
  double dirichlet_alpha = 0.0;  // 0 disables root noise
  double dirichlet_fraction = 0.25;
  int games = 100;
  /// Start positions separated by ';'. Empty means the standard start.
  std::string start;
  int max_plies = 512;
  unsigned workers = 1;
  std::string output_dir = "out";
  std::string name = "engine";

  // Training.
  int iterations = 20;
  int games_per_iteration = 200;
  int steps_per_iteration = 200;
  int batch_size = 64;
  double learning_rate = 0.1;
  double target_ratio = 1.0;
  int plateau_window = 3;
  std::uint32_t max_visits = 4096;
  std::size_t buffer_capacity = 100000;
  std::size_t hidden_width = 64;

  // Analysis.
  std::uint32_t n_low = 16;
  std::uint32_t n_high = 4096;
  double threshold = 0.5;

  static SearchConfig default_search() {
    SearchConfig c;
    c.c_puct = 1.5;
    c.visits = 1000;
    c.nscl = kNsclInfinite;
    return c;
  }

  SearchConfig search_config() const {
    SearchConfig c = search;
    if (dirichlet_alpha > 0.0) c.noise = DirichletNoise{dirichlet_alpha, dirichlet_fraction};
    return c;
  }

  std::vector<std::string> start_positions() const {
    std::vector<std::string> out;
    std::string cur;
    for (char c : start + ";") {
      if (c == ';') {
        const auto b = cur.find_first_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
        cur.clear();
      } else {
        cur += c;
      }
    }
    return out;
  }
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class Int>
Int parse_int(const std::string& key, int line, const std::string& v, Int lo) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(key, line, "expected an integer, got '" + v + "'");
  if (x < static_cast<long long>(lo))
    throw ConfigError(key, line, "must be >= " + std::to_string(static_cast<long long>(lo)));
  return static_cast<Int>(x);
}

inline double parse_real(const std::string& key, int line, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
    throw ConfigError(key, line, "expected a real number, got '" + v + "'");
  return x;
}

inline std::string fmt_real(double x) {
  std::ostringstream o;
  o << x;
  return o.str();
}

inline TemperatureSchedule parse_schedule(const std::string& key, int line, const std::string& v) {
  std::vector<TemperatureSchedule::Step> steps;
  // Steps are separated by ',' or whitespace ("0:1,8:0" or "0:1 8:0").
  std::string spaced = v;
  for (char& c : spaced)
    if (c == ',') c = ' ';
  std::string item;
  std::istringstream in(spaced);
  while (in >> item) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError(key, line, "expected 'ply:tau' pairs, got '" + item + "'");
    const int ply = parse_int<int>(key, line, trim(item.substr(0, colon)), 0);
    const double tau = parse_real(key, line, trim(item.substr(colon + 1)));
    steps.emplace_back(ply, tau);
  }
  try {
    return TemperatureSchedule(std::move(steps));
  } catch (const std::exception& e) {
    throw ConfigError(key, line, e.what());
  }
}

}  // namespace config_detail

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string& value, int line)> set;
  std::function<std::string(const RunConfig&)> get;
};

/// Every accepted key, in documentation order.
inline const std::vector<ConfigKey>& config_schema() {
  using namespace config_detail;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    auto add = [&k](std::string name, std::string help, auto set, auto get) {
      k.push_back({std::move(name), std::move(help), set, get});
    };
#define SCLAB_INT_KEY(NAME, FIELD, TYPE, LO, HELP)                                        \
  add(NAME, HELP,                                                                          \
      [](RunConfig& c, const std::string& v, int line) {                                   \
        c.FIELD = parse_int<TYPE>(NAME, line, v, LO);                                      \
      },                                                                                   \
      [](const RunConfig& c) { return std::to_string(c.FIELD); })
#define SCLAB_REAL_KEY(NAME, FIELD, HELP)                                                  \
  add(NAME, HELP,                                                                          \
      [](RunConfig& c, const std::string& v, int line) { c.FIELD = parse_real(NAME, line, v); }, \
      [](const RunConfig& c) { return fmt_real(c.FIELD); })
#define SCLAB_STRING_KEY(NAME, FIELD, HELP)                                                \
  add(NAME, HELP, [](RunConfig& c, const std::string& v, int) { c.FIELD = v; },            \
      [](const RunConfig& c) { return c.FIELD; })

    add("game", "chess | tictactoe",
        [](RunConfig& c, const std::string& v, int line) {
          if (v == "chess") c.game = GameId::Chess;
          else if (v == "tictactoe") c.game = GameId::TicTacToe;
          else throw ConfigError("game", line, "expected chess or tictactoe, got '" + v + "'");
        },
        [](const RunConfig& c) { return std::string(game_name(c.game)); });
    add("evaluator", "auto | uniform | heuristic | net (auto: heuristic for chess, uniform otherwise)",
        [](RunConfig& c, const std::string& v, int line) {
          if (v != "auto" && v != "uniform" && v != "heuristic" && v != "net")
            throw ConfigError("evaluator", line, "unknown evaluator '" + v + "'");
          c.evaluator = v;
        },
        [](const RunConfig& c) { return c.evaluator; });
    SCLAB_STRING_KEY("checkpoint", checkpoint, "TinyNet checkpoint for evaluator = net");
    add("c_puct", "PUCT exploration constant",
        [](RunConfig& c, const std::string& v, int line) {
          c.search.c_puct = parse_real("c_puct", line, v);
          if (!(c.search.c_puct > 0.0)) throw ConfigError("c_puct", line, "must be positive");
        },
        [](const RunConfig& c) { return fmt_real(c.search.c_puct); });
    SCLAB_INT_KEY("visits", search.visits, std::uint32_t, 1, "playouts per move (N)");
    add("n_scl", "search-contempt threshold N_scl; 'inf' disables freezing",
        [](RunConfig& c, const std::string& v, int line) {
          if (v == "inf" || v == "infinity") c.search.nscl = kNsclInfinite;
          else c.search.nscl = parse_int<std::uint64_t>("n_scl", line, v, 1);
        },
        [](const RunConfig& c) {
          return c.search.nscl == kNsclInfinite ? std::string("inf") : std::to_string(c.search.nscl);
        });
    add("temperature", "schedule 'ply:tau,ply:tau,...' (0-based plies; spaces may replace commas)",
        [](RunConfig& c, const std::string& v, int line) {
          c.search.temperature = parse_schedule("temperature", line, v);
        },
        [](const RunConfig& c) { return c.search.temperature.to_string(); });
    SCLAB_INT_KEY("seed", search.seed, std::uint64_t, 0, "base random seed");
    SCLAB_REAL_KEY("dirichlet_alpha", dirichlet_alpha, "root noise alpha; 0 disables noise");
    SCLAB_REAL_KEY("dirichlet_fraction", dirichlet_fraction, "root noise mixing fraction");
    SCLAB_REAL_KEY("fpu", search.fpu, "Q assigned to unvisited edges");
    SCLAB_INT_KEY("games", games, int, 1, "games per batch or match");
    SCLAB_STRING_KEY("start", start, "start position(s), ';'-separated; empty = standard start");
    SCLAB_INT_KEY("max_plies", max_plies, int, 1, "ply cap; longer games are scored as draws");
    SCLAB_INT_KEY("workers", workers, unsigned, 1, "worker threads for game batches");
    SCLAB_STRING_KEY("output_dir", output_dir, "directory for PGN/CSV/checkpoint output");
    SCLAB_STRING_KEY("name", name, "engine name used in PGN and match reports");
    SCLAB_INT_KEY("iterations", iterations, int, 0, "training iterations");
    SCLAB_INT_KEY("games_per_iteration", games_per_iteration, int, 1, "self-play games per training iteration");
    SCLAB_INT_KEY("steps_per_iteration", steps_per_iteration, int, 0, "SGD steps per training iteration");
    SCLAB_INT_KEY("batch_size", batch_size, int, 1, "SGD minibatch size");
    SCLAB_REAL_KEY("learning_rate", learning_rate, "SGD learning rate");
    SCLAB_REAL_KEY("target_ratio", target_ratio, "(w+l)/d target for the N_scl controller");
    SCLAB_INT_KEY("plateau_window", plateau_window, int, 1, "unchanged N_scl iterations before N doubles");
    SCLAB_INT_KEY("max_visits", max_visits, std::uint32_t, 1, "cap on N when the controller doubles it");
    SCLAB_INT_KEY("buffer_capacity", buffer_capacity, std::size_t, 1, "replay buffer capacity");
    SCLAB_INT_KEY("hidden_width", hidden_width, std::size_t, 1, "TinyNet hidden layer width");
    SCLAB_INT_KEY("n_low", n_low, std::uint32_t, 1, "analyze: low visit budget");
    SCLAB_INT_KEY("n_high", n_high, std::uint32_t, 2, "analyze: high visit budget");
    SCLAB_REAL_KEY("threshold", threshold, "analyze: |V(n_low) - V(n_high)| puzzle threshold");
#undef SCLAB_INT_KEY
#undef SCLAB_REAL_KEY
#undef SCLAB_STRING_KEY
    return k;
  }();
  return keys;
}

/// Sets one key. `line` is 0 for command-line overrides.
inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                             int line = 0) {
  for (const auto& k : config_schema()) {
    if (k.name == key) {
      k.set(cfg, value, line);
      return;
    }
  }
  throw ConfigError(key, line, "unknown key");
}

/// Current value of one key, formatted as in config files.
inline std::string get_config_value(const RunConfig& cfg, const std::string& key) {
  for (const auto& k : config_schema())
    if (k.name == key) return k.get(cfg);
  throw ConfigError(key, 0, "unknown key");
}

/// Parses `key = value` lines; '#' starts a comment. Missing keys keep their
/// defaults; each key may appear at most once.
inline RunConfig parse_config(std::string_view text, RunConfig cfg = {}) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::vector<std::string> seen;
  for (int line = 1; std::getline(in, raw); ++line) {
    const auto hash = raw.find('#');
    const std::string body = config_detail::trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("", line, "expected 'key = value'");
    const std::string key = config_detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = config_detail::trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ConfigError("", line, "missing key before '='");
    for (const auto& s : seen)
      if (s == key) throw ConfigError(key, line, "duplicate key");
    seen.push_back(key);
    set_config_value(cfg, key, value, line);
  }
  return cfg;
}

/// The documented key list with defaults, as printed by `--help`.
inline std::string config_help() {
  const RunConfig defaults;
  std::ostringstream out;
  out << "Config keys (key = value, '#' comments):\n";
  for (const auto& k : config_schema()) {
    std::string d = k.get(defaults);
    if (d.empty()) d = "\"\"";
    out << "  " << k.name << " = " << d << "\n      " << k.help << "\n";
  }
  return out.str();
}

}  // namespace sclab
