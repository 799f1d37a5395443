#pragma once

// 3x3 tic-tac-toe. Small enough that test oracles solve it exhaustively.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/game.hpp"

namespace sclab {

class TicTacToe {
 public:
  /// Cell index 0..8, row-major from the top-left corner.
  using Action = std::uint8_t;

  static constexpr GameId kGameId = GameId::TicTacToe;
  /// Own 9 cells, opponent 9 cells, side flag.
  static constexpr std::size_t kFeatureSize = 19;
  static constexpr std::size_t kPolicySize = 9;

  enum Cell : std::uint8_t { Empty = 0, X = 1, O = 2 };

  static TicTacToe initial() { return TicTacToe{}; }

  /// Nine characters from {X, O, .} in row-major order, for example
  /// "X.O.X...." . Whitespace and '/' separators are ignored. X moves first,
  /// so the side to move follows from the piece counts.
  static TicTacToe parse(std::string_view text) {
    TicTacToe t;
    int n = 0, xs = 0, os = 0;
    for (char c : text) {
      if (c == ' ' || c == '/' || c == '\t' || c == '\n') continue;
      if (n == 9) throw ParseError("tic-tac-toe position has more than 9 cells");
      switch (c) {
        case 'X': case 'x': t.cells_[n] = X; ++xs; break;
        case 'O': case 'o': t.cells_[n] = O; ++os; break;
        case '.': case '-': case '_': t.cells_[n] = Empty; break;
        default:
          throw ParseError(std::string("bad tic-tac-toe cell character '") + c + "'");
      }
      ++n;
    }
    if (n != 9) throw ParseError("tic-tac-toe position needs exactly 9 cells");
    if (xs != os && xs != os + 1)
      throw ParseError("tic-tac-toe piece counts impossible (X moves first)");
    t.ply_ = xs + os;
    const int x_lines = t.lines_for(X), o_lines = t.lines_for(O);
    if (x_lines > 0 && o_lines > 0)
      throw ParseError("both sides have three in a row");
    if (x_lines > 0 && xs != os + 1) throw ParseError("X won but O moved after");
    if (o_lines > 0 && xs != os) throw ParseError("O won but X moved after");
    return t;
  }

  std::string to_string() const {
    std::string s(9, '.');
    for (int i = 0; i < 9; ++i)
      s[i] = cells_[i] == X ? 'X' : cells_[i] == O ? 'O' : '.';
    return s;
  }

  Cell cell(int i) const { return cells_[i]; }
  Player side_to_move() const { return (ply_ % 2 == 0) ? Player::P1 : Player::P2; }
  int ply() const { return ply_; }

  std::vector<Action> legal_actions() const {
    std::vector<Action> out;
    if (winner() != Empty) return out;
    for (std::uint8_t i = 0; i < 9; ++i)
      if (cells_[i] == Empty) out.push_back(i);
    return out;
  }

  TicTacToe apply(Action a) const {
    if (a >= 9 || cells_[a] != Empty || winner() != Empty)
      throw ContractError("illegal tic-tac-toe action " + std::to_string(a));
    TicTacToe next = *this;
    next.cells_[a] = mover_mark();
    ++next.ply_;
    return next;
  }

  std::optional<Outcome> terminal() const {
    const Cell w = winner();
    if (w == X) return Outcome{OutcomeValue::P1Win, OutcomeReason::ToyWin};
    if (w == O) return Outcome{OutcomeValue::P2Win, OutcomeReason::ToyWin};
    if (ply_ == 9) return Outcome{OutcomeValue::Draw, OutcomeReason::ToyDraw};
    return std::nullopt;
  }

  /// Base-3 encoding of the board; unique per position.
  std::uint64_t position_key() const {
    std::uint64_t k = 0;
    for (int i = 8; i >= 0; --i) k = k * 3 + cells_[i];
    return k;
  }

  /// Cells are written as file letter + rank digit with rank 3 at the top:
  /// cell 0 = "a3", cell 8 = "c1".
  std::string action_text(Action a) const {
    std::string s = "a1";
    s[0] = static_cast<char>('a' + a % 3);
    s[1] = static_cast<char>('3' - a / 3);
    return s;
  }

  Action parse_action(std::string_view text) const {
    if (text.size() == 2 && text[0] >= 'a' && text[0] <= 'c' && text[1] >= '1' &&
        text[1] <= '3') {
      return static_cast<Action>((('3' - text[1]) * 3) + (text[0] - 'a'));
    }
    if (text.size() == 1 && text[0] >= '0' && text[0] <= '8')
      return static_cast<Action>(text[0] - '0');
    throw ParseError("bad tic-tac-toe move '" + std::string(text) + "'");
  }

  std::size_t policy_slot(Action a) const { return a; }

  /// Side-to-move perspective. The final entry is 1 when X is to move.
  std::vector<float> features() const {
    std::vector<float> f(kFeatureSize, 0.0f);
    const Cell own = mover_mark();
    for (int i = 0; i < 9; ++i) {
      if (cells_[i] == Empty) continue;
      f[(cells_[i] == own ? 0 : 9) + i] = 1.0f;
    }
    f[18] = side_to_move() == Player::P1 ? 1.0f : 0.0f;
    return f;
  }

  friend bool operator==(const TicTacToe&, const TicTacToe&) = default;

 private:
  static constexpr std::array<std::array<int, 3>, 8> kLines{{
      {0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
      {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6},
  }};

  Cell mover_mark() const { return ply_ % 2 == 0 ? X : O; }

  int lines_for(Cell c) const {
    int n = 0;
    for (const auto& l : kLines)
      if (cells_[l[0]] == c && cells_[l[1]] == c && cells_[l[2]] == c) ++n;
    return n;
  }

  Cell winner() const {
    for (const auto& l : kLines) {
      const Cell c = cells_[l[0]];
      if (c != Empty && c == cells_[l[1]] && c == cells_[l[2]]) return c;
    }
    return Empty;
  }

  std::array<Cell, 9> cells_{};
  int ply_ = 0;
};

}  // namespace sclab
