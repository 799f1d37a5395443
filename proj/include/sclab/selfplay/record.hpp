#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sclab/core/game.hpp"
#include "sclab/search/config.hpp"

namespace sclab {

/// Root statistics recorded for one move of a game.
template <class A>
struct MovePolicy {
  std::vector<A> actions;
  std::vector<std::uint32_t> visits;
  std::vector<double> policy;
  friend bool operator==(const MovePolicy&, const MovePolicy&) = default;
};

template <GameState S>
struct GameRecord {
  using Action = typename S::Action;

  /// Start position in the game's text form (FEN for chess).
  std::string start;
  std::vector<Action> moves;
  std::vector<MovePolicy<Action>> policies;
  Outcome outcome{OutcomeValue::Draw, OutcomeReason::PlyLimit};
  SearchConfig white_config;
  SearchConfig black_config;
  std::string white = "engine";
  std::string black = "engine";
  std::uint64_t seed = 0;

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

}  // namespace sclab
