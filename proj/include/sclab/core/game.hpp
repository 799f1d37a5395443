#pragma once

#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sclab {

enum class Player : std::uint8_t { P1 = 0, P2 = 1 };

constexpr Player opponent(Player p) {
  return p == Player::P1 ? Player::P2 : Player::P1;
}

enum class OutcomeValue : std::uint8_t { P1Win, P2Win, Draw };

enum class OutcomeReason : std::uint8_t {
  Checkmate,
  Stalemate,
  FiftyMove,
  ThreefoldRepetition,
  InsufficientMaterial,
  ToyWin,
  ToyDraw,
  /// Game stopped by the self-play/match ply cap and scored as a draw.
  PlyLimit,
};

struct Outcome {
  OutcomeValue value;
  OutcomeReason reason;

  friend bool operator==(const Outcome&, const Outcome&) = default;

  /// Game result from `p`'s point of view: +1 win, 0 draw, -1 loss.
  double value_for(Player p) const {
    if (value == OutcomeValue::Draw) return 0.0;
    const bool p1_won = value == OutcomeValue::P1Win;
    return (p1_won == (p == Player::P1)) ? 1.0 : -1.0;
  }
};

inline const char* to_string(OutcomeReason r) {
  switch (r) {
    case OutcomeReason::Checkmate: return "checkmate";
    case OutcomeReason::Stalemate: return "stalemate";
    case OutcomeReason::FiftyMove: return "fifty-move";
    case OutcomeReason::ThreefoldRepetition: return "threefold";
    case OutcomeReason::InsufficientMaterial: return "insufficient-material";
    case OutcomeReason::ToyWin: return "win";
    case OutcomeReason::ToyDraw: return "draw";
    case OutcomeReason::PlyLimit: return "ply-limit";
  }
  return "?";
}

/// PGN-style result token.
inline const char* result_token(OutcomeValue v) {
  switch (v) {
    case OutcomeValue::P1Win: return "1-0";
    case OutcomeValue::P2Win: return "0-1";
    case OutcomeValue::Draw: return "1/2-1/2";
  }
  return "*";
}

enum class GameId : std::uint32_t { TicTacToe = 0, Chess = 1 };

/// What the search, evaluators and self-play require of a game state.
///
/// States are immutable values. `legal_actions()` is empty exactly when
/// `terminal()` is engaged, and actions come back in ascending `Action`
/// order. Players alternate every ply.
template <class S>
concept GameState = std::regular<typename S::Action> &&
    std::totally_ordered<typename S::Action> &&
    requires(const S& s, const typename S::Action& a, std::string_view text) {
  { S::kGameId } -> std::convertible_to<GameId>;
  { S::kFeatureSize } -> std::convertible_to<std::size_t>;
  { S::kPolicySize } -> std::convertible_to<std::size_t>;
  { S::initial() } -> std::same_as<S>;
  { S::parse(text) } -> std::same_as<S>;
  { s.to_string() } -> std::same_as<std::string>;
  { s.legal_actions() } -> std::same_as<std::vector<typename S::Action>>;
  { s.apply(a) } -> std::same_as<S>;
  { s.terminal() } -> std::same_as<std::optional<Outcome>>;
  { s.side_to_move() } -> std::same_as<Player>;
  { s.ply() } -> std::convertible_to<int>;
  { s.position_key() } -> std::same_as<std::uint64_t>;
  { s.action_text(a) } -> std::same_as<std::string>;
  { s.parse_action(text) } -> std::same_as<typename S::Action>;
  { s.policy_slot(a) } -> std::convertible_to<std::size_t>;
  { s.features() } -> std::same_as<std::vector<float>>;
};

inline const char* game_name(GameId id) {
  return id == GameId::Chess ? "chess" : "tictactoe";
}

}  // namespace sclab
