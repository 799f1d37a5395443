#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sclab/core/parallel.hpp"
#include "sclab/core/rng.hpp"
#include "sclab/eval/evaluation.hpp"
#include "sclab/search/search.hpp"
#include "sclab/selfplay/record.hpp"
#include "sclab/selfplay/training_example.hpp"

namespace sclab {

/// Games longer than this are scored as draws.
inline constexpr int kDefaultMaxPlies = 512;

template <GameState S>
struct Engine {
  const Evaluator<S>* evaluator = nullptr;
  SearchConfig config;
  std::string name = "engine";
};

/// Plays one game between two engines. Every move searches a fresh tree; the
/// search seed for the move at ply index k is derive_seed(game_seed, k).
template <GameState S>
GameRecord<S> play_game(const S& start, const Engine<S>& white, const Engine<S>& black,
                        std::uint64_t game_seed, int max_plies = kDefaultMaxPlies) {
  if (start.terminal()) throw ContractError("cannot start a game from a terminal position");
  require(white.evaluator && black.evaluator, "engine without an evaluator");
  GameRecord<S> rec;
  rec.start = start.to_string();
  rec.white_config = white.config;
  rec.black_config = black.config;
  rec.white = white.name;
  rec.black = black.name;
  rec.seed = game_seed;

  S state = start;
  for (int k = 0;; ++k) {
    if (auto outcome = state.terminal()) {
      rec.outcome = *outcome;
      break;
    }
    if (k >= max_plies) {
      rec.outcome = {OutcomeValue::Draw, OutcomeReason::PlyLimit};
      break;
    }
    const Engine<S>& mover = state.side_to_move() == Player::P1 ? white : black;
    SearchConfig cfg = mover.config;
    cfg.seed = derive_seed(game_seed, static_cast<std::uint64_t>(k));
    auto result = Search<S>(*mover.evaluator, cfg).run(state);
    rec.moves.push_back(result.chosen_action);
    rec.policies.push_back({std::move(result.actions), std::move(result.visit_counts),
                            std::move(result.policy)});
    state = detail::apply_trusted(state, rec.moves.back());
  }
  return rec;
}

/// Self-play: both sides share one evaluator and config.
template <GameState S>
GameRecord<S> play_game(const S& start, const Evaluator<S>& evaluator, const SearchConfig& cfg,
                        std::uint64_t game_seed, int max_plies = kDefaultMaxPlies) {
  const Engine<S> engine{&evaluator, cfg, "selfplay"};
  return play_game(start, engine, engine, game_seed, max_plies);
}

/// Game i uses seed base_seed + i; output order and content do not depend on
/// `workers`.
template <GameState S>
std::vector<GameRecord<S>> batch_selfplay(std::size_t n_games, const S& start,
                                          const Evaluator<S>& evaluator,
                                          const SearchConfig& cfg, std::uint64_t base_seed,
                                          unsigned workers = 1,
                                          int max_plies = kDefaultMaxPlies) {
  if (n_games < 1) throw ContractError("batch needs at least one game");
  std::vector<GameRecord<S>> games(n_games);
  parallel_for(n_games, workers, [&](std::size_t i) {
    games[i] = play_game(start, evaluator, cfg, base_seed + i, max_plies);
  });
  return games;
}

/// Replays a record from its start position; throws if a move is illegal.
template <GameState S>
S replay(const GameRecord<S>& rec) {
  S state = S::parse(rec.start);
  for (const auto& m : rec.moves) state = state.apply(m);
  return state;
}

// ---------------------------------------------------------------------------
// Batch metrics

/// Fraction of games whose first m plies are shared with at least one other
/// game. A game shorter than m is keyed by its complete move list plus an
/// end marker, so it only matches games identical to it in full.
template <GameState S>
double repeat_fraction(const std::vector<GameRecord<S>>& games, std::size_t m) {
  if (m < 1) throw ContractError("repeat_fraction needs m >= 1");
  if (games.empty()) return 0.0;
  using Key = std::pair<std::vector<typename S::Action>, bool>;
  std::map<Key, std::size_t> counts;
  std::vector<Key> keys;
  keys.reserve(games.size());
  for (const auto& g : games) {
    const std::size_t len = std::min(m, g.moves.size());
    Key k{{g.moves.begin(), g.moves.begin() + static_cast<std::ptrdiff_t>(len)},
          g.moves.size() < m};
    ++counts[k];
    keys.push_back(std::move(k));
  }
  std::size_t repeated = 0;
  for (const auto& k : keys)
    if (counts[k] >= 2) ++repeated;
  return static_cast<double>(repeated) / static_cast<double>(games.size());
}

struct SelfPlayStats {
  int w = 0, d = 0, l = 0;
  /// (w + l) / d; +infinity when d == 0 (see `ratio_infinite`).
  double ratio = 0.0;
  bool ratio_infinite = false;
  /// (m, repeat_fraction(m)) for m = 1 .. longest game.
  std::vector<std::pair<int, double>> repeat_curve;

  int games() const { return w + d + l; }
};

/// Win/draw/loss tallies from P1's (white's) perspective.
inline SelfPlayStats wdl_stats(int w, int d, int l) {
  SelfPlayStats s;
  s.w = w;
  s.d = d;
  s.l = l;
  if (d == 0) {
    s.ratio = std::numeric_limits<double>::infinity();
    s.ratio_infinite = true;
  } else {
    s.ratio = static_cast<double>(w + l) / d;
  }
  return s;
}

template <GameState S>
SelfPlayStats wdl_ratio(const std::vector<GameRecord<S>>& games) {
  if (games.empty()) throw ContractError("wdl_ratio needs at least one game");
  int w = 0, d = 0, l = 0;
  std::size_t longest = 0;
  for (const auto& g : games) {
    switch (g.outcome.value) {
      case OutcomeValue::P1Win: ++w; break;
      case OutcomeValue::P2Win: ++l; break;
      case OutcomeValue::Draw: ++d; break;
    }
    longest = std::max(longest, g.moves.size());
  }
  SelfPlayStats s = wdl_stats(w, d, l);
  for (std::size_t m = 1; m <= longest; ++m)
    s.repeat_curve.emplace_back(static_cast<int>(m), repeat_fraction(games, m));
  return s;
}

/// One-sided two-proportion z-test of H1: decisive rate of `a` > that of `b`.
/// Returns the p-value. (w+l)/d is monotone in the decisive rate (w+l)/n, so
/// this tests the ordering of the two ratios.
inline double decisive_rate_p_value(const SelfPlayStats& a, const SelfPlayStats& b) {
  const double na = a.games(), nb = b.games();
  const double xa = a.w + a.l, xb = b.w + b.l;
  const double pa = xa / na, pb = xb / nb;
  const double pooled = (xa + xb) / (na + nb);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  if (se == 0.0) return pa > pb ? 0.0 : 1.0;
  const double z = (pa - pb) / se;
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

// ---------------------------------------------------------------------------
// Training data

/// One example per move; the value target is the final result from the
/// position's side to move (ply-capped games count as draws).
template <GameState S>
std::vector<TrainingExample> extract_training_examples(const GameRecord<S>& rec) {
  std::vector<TrainingExample> out;
  out.reserve(rec.moves.size());
  S state = S::parse(rec.start);
  for (std::size_t i = 0; i < rec.moves.size(); ++i) {
    const auto& pol = rec.policies.at(i);
    TrainingExample ex;
    ex.features = state.features();
    ex.slots.reserve(pol.actions.size());
    for (const auto& a : pol.actions)
      ex.slots.push_back(static_cast<std::uint32_t>(state.policy_slot(a)));
    ex.policy = pol.policy;
    ex.value = rec.outcome.value_for(state.side_to_move());
    out.push_back(std::move(ex));
    state = detail::apply_trusted(state, rec.moves[i]);
  }
  return out;
}

}  // namespace sclab
