#pragma once

// Misevaluation mining: positions where a shallow search and a deep search
// disagree by more than a threshold are reported as puzzle candidates.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/eval/evaluation.hpp"
#include "sclab/search/search.hpp"
#include "sclab/selfplay/pgn.hpp"

namespace sclab {

struct AnalysisReport {
  std::string position;
  int game_index = -1;  // -1 for single-position analysis
  int ply = 0;
  double raw_value = 0.0;
  double value_low = 0.0;
  double value_high = 0.0;
  std::string best_low;
  std::string best_high;
  bool flagged = false;
};

/// Values are from the side to move. `base` supplies c_puct, N_scl and seed;
/// both searches pick moves greedily.
template <GameState S>
AnalysisReport analyze_position(const S& state, const Evaluator<S>& evaluator,
                                std::uint32_t n_low, std::uint32_t n_high, double threshold,
                                SearchConfig base = {}) {
  if (n_low < 1 || n_low >= n_high) throw ContractError("analyze needs 1 <= n_low < n_high");
  if (!(threshold >= 0.0)) throw ContractError("analyze threshold must be >= 0");
  if (state.terminal()) throw ContractError("cannot analyze a terminal position");
  base.temperature = TemperatureSchedule::constant(0.0);
  base.noise.reset();

  AnalysisReport r;
  r.position = state.to_string();
  r.ply = state.ply();
  r.raw_value = evaluator.evaluate(state).value;

  auto run = [&](std::uint32_t n, double& value, std::string& best) {
    SearchConfig cfg = base;
    cfg.visits = n;
    const auto res = Search<S>(evaluator, cfg).run(state);
    value = res.root_value;
    best = state.action_text(res.chosen_action);
  };
  run(n_low, r.value_low, r.best_low);
  run(n_high, r.value_high, r.best_high);
  r.flagged = std::abs(r.value_low - r.value_high) > threshold;
  return r;
}

/// Scans every non-terminal position of every game in a PGN text.
template <GameState S>
std::vector<AnalysisReport> analyze_pgn(std::string_view pgn, const Evaluator<S>& evaluator,
                                        std::uint32_t n_low, std::uint32_t n_high,
                                        double threshold, const SearchConfig& base = {}) {
  std::vector<AnalysisReport> out;
  const auto games = import_pgn<S>(pgn);
  for (std::size_t gi = 0; gi < games.size(); ++gi) {
    S state = S::parse(games[gi].start);
    for (std::size_t i = 0;; ++i) {
      if (!state.terminal()) {
        out.push_back(analyze_position(state, evaluator, n_low, n_high, threshold, base));
        out.back().game_index = static_cast<int>(gi);
      }
      if (i == games[gi].moves.size()) break;
      state = state.apply(games[gi].moves[i]);
    }
  }
  return out;
}

inline std::string analysis_csv(const std::vector<AnalysisReport>& reports) {
  std::ostringstream out;
  out << "game,ply,position,raw,v_low,v_high,best_low,best_high,flagged\n";
  out << std::fixed << std::setprecision(6);
  for (const auto& r : reports) {
    out << r.game_index << ',' << r.ply << ",\"" << r.position << "\"," << r.raw_value << ','
        << r.value_low << ',' << r.value_high << ',' << r.best_low << ',' << r.best_high << ','
        << (r.flagged ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace sclab
