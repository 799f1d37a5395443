#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/parallel.hpp"
#include "sclab/selfplay/selfplay.hpp"

namespace sclab {

struct EloEstimate {
  double elo = 0.0;
  double stderr_elo = 0.0;
  double score = 0.0;
  /// Score is 0 or 1: the logistic inversion diverges and `elo` is +-inf.
  bool unbounded = false;
};

/// Logistic Elo difference 400 log10(s / (1 - s)) for score s = (w + d/2) / n.
/// The standard error propagates the per-game score variance through
/// d(elo)/ds = 400 / (ln 10 * s (1 - s)).
inline EloEstimate elo_estimate(int w, int d, int l) {
  if (w < 0 || d < 0 || l < 0) throw ContractError("negative game counts");
  const int n = w + d + l;
  if (n == 0) throw ContractError("elo_estimate needs at least one game");
  EloEstimate e;
  e.score = (w + 0.5 * d) / n;
  if (e.score <= 0.0 || e.score >= 1.0) {
    e.unbounded = true;
    e.elo = e.score >= 1.0 ? INFINITY : -INFINITY;
    e.stderr_elo = INFINITY;
    return e;
  }
  const double s = e.score;
  // log10 of the points ratio, written as a difference so that swapping w
  // and l negates it exactly.
  e.elo = 400.0 * (std::log10(w + 0.5 * d) - std::log10(l + 0.5 * d));
  const double var = (w * (1.0 - s) * (1.0 - s) + d * (0.5 - s) * (0.5 - s) + l * s * s) / n;
  const double se_score = std::sqrt(var / n);
  e.stderr_elo = 400.0 / (std::log(10.0) * s * (1.0 - s)) * se_score;
  return e;
}

template <GameState S>
struct MatchResult {
  std::vector<GameRecord<S>> games;
  /// From engine A's perspective.
  int w = 0, d = 0, l = 0;
  double score = 0.0;
  EloEstimate elo;

  int n() const { return w + d + l; }
  double win_percentage() const { return n() ? 100.0 * w / n() : 0.0; }
};

template <GameState S>
MatchResult<S> tally_match(std::vector<GameRecord<S>> games, const std::vector<bool>& a_white) {
  MatchResult<S> r;
  for (std::size_t i = 0; i < games.size(); ++i) {
    const double v = games[i].outcome.value_for(a_white[i] ? Player::P1 : Player::P2);
    if (v > 0) ++r.w;
    else if (v < 0) ++r.l;
    else ++r.d;
  }
  r.games = std::move(games);
  r.elo = elo_estimate(r.w, r.d, r.l);
  r.score = r.elo.score;
  return r;
}

/// Color-balanced match. Game i starts from starts[(i / 2) % starts.size()];
/// engine A has the first player's pieces in even-numbered games and the
/// second player's in odd-numbered ones. Game i is seeded with
/// derive_seed(base_seed, i).
template <GameState S>
MatchResult<S> play_match(const Engine<S>& a, const Engine<S>& b, int n_games,
                          const std::vector<S>& starts, std::uint64_t base_seed,
                          unsigned workers = 1, int max_plies = kDefaultMaxPlies) {
  if (n_games <= 0 || n_games % 2 != 0)
    throw ContractError("match needs a positive, even number of games");
  if (starts.empty()) throw ContractError("match needs at least one start position");
  std::vector<GameRecord<S>> games(static_cast<std::size_t>(n_games));
  std::vector<bool> a_white(games.size());
  for (std::size_t i = 0; i < games.size(); ++i) a_white[i] = i % 2 == 0;
  parallel_for(games.size(), workers, [&](std::size_t i) {
    const S& start = starts[(i / 2) % starts.size()];
    const auto seed = derive_seed(base_seed, i);
    games[i] = a_white[i] ? play_game(start, a, b, seed, max_plies)
                          : play_game(start, b, a, seed, max_plies);
  });
  return tally_match(std::move(games), a_white);
}

struct SweepPoint {
  std::uint32_t nodes = 0;
  int w = 0, d = 0, l = 0;
  double win_percentage = 0.0;
  double score = 0.0;
};

/// For each node count, plays a match with engine A's visit budget set to it
/// (and engine B's too unless `only_a`) and reports A's win percentage.
template <GameState S>
std::vector<SweepPoint> win_percentage_sweep(const Engine<S>& a, const Engine<S>& b,
                                             const std::vector<std::uint32_t>& node_counts,
                                             int games_per_point, const std::vector<S>& starts,
                                             std::uint64_t base_seed, bool only_a = false,
                                             unsigned workers = 1) {
  if (node_counts.empty()) throw ContractError("sweep needs at least one node count");
  std::vector<SweepPoint> table;
  for (std::size_t k = 0; k < node_counts.size(); ++k) {
    Engine<S> ea = a, eb = b;
    ea.config.visits = node_counts[k];
    if (!only_a) eb.config.visits = node_counts[k];
    const auto m = play_match(ea, eb, games_per_point, starts, derive_seed(base_seed, k), workers);
    table.push_back({node_counts[k], m.w, m.d, m.l, m.win_percentage(), m.score});
  }
  return table;
}

/// `game_idx,white,black,result,plies` rows.
template <GameState S>
std::string match_games_csv(const MatchResult<S>& m) {
  std::ostringstream out;
  out << "game_idx,white,black,result,plies\n";
  for (std::size_t i = 0; i < m.games.size(); ++i) {
    const auto& g = m.games[i];
    out << i << ',' << g.white << ',' << g.black << ',' << result_token(g.outcome.value) << ','
        << g.moves.size() << '\n';
  }
  return out.str();
}

template <GameState S>
std::string match_summary(const MatchResult<S>& m, const std::string& a_name,
                          const std::string& b_name) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << a_name << " vs " << b_name << ": " << m.n() << " games\n";
  out << "  wins " << m.w << "  draws " << m.d << "  losses " << m.l << "\n";
  out << "  score " << m.score << "  win% " << m.win_percentage() << "\n";
  if (m.elo.unbounded) out << "  elo unbounded (score " << m.score << ")\n";
  else out << "  elo " << m.elo.elo << " +- " << m.elo.stderr_elo << "\n";
  return out.str();
}

}  // namespace sclab
