#pragma once

// Static chess evaluator: material value plus capture/promotion-biased
// move priors.

#include <algorithm>
#include <bit>
#include <cmath>

#include "sclab/eval/evaluation.hpp"
#include "sclab/games/chess.hpp"

namespace sclab {

class HeuristicEvaluator final : public Evaluator<ChessState> {
 public:
  /// Pawn, knight, bishop, rook, queen, king (in pawns).
  static constexpr double kPieceValue[6] = {1.0, 3.0, 3.0, 5.0, 9.0, 0.0};
  /// Attacker weight for MVV-LVA; the king is treated as the most valuable.
  static constexpr double kAttackerValue[6] = {1.0, 3.0, 3.0, 5.0, 9.0, 10.0};
  static constexpr double kValueScale = 4.0;

  using Evaluator<ChessState>::evaluate;

  /// Material balance in pawns from the side to move.
  static double material_diff(const chess::Board& b) {
    using namespace chess;
    double diff = 0.0;
    for (int t = Pawn; t <= Queen; ++t) {
      const auto pt = static_cast<PieceType>(t);
      diff += kPieceValue[t] * (std::popcount(b.pieces(b.side(), pt)) -
                                std::popcount(b.pieces(other(b.side()), pt)));
    }
    return diff;
  }

  /// Victim value minus a tenth of the attacker value for captures, plus the
  /// promoted piece's gain over a pawn for promotions; zero for quiet moves.
  static double move_score(const chess::Board& b, chess::Move m) {
    using namespace chess;
    double score = 0.0;
    const PieceType mover = piece_type(b.piece_at(m.from));
    if (b.is_capture(m)) {
      const std::uint8_t victim = b.piece_at(m.to);
      const double victim_value = victim == kNoPiece ? kPieceValue[Pawn]
                                                     : kPieceValue[piece_type(victim)];
      score += victim_value - kAttackerValue[mover] / 10.0;
    }
    if (m.promo != NoPromo) score += kPieceValue[promo_piece(m.promo)] - kPieceValue[Pawn];
    return score;
  }

  Evaluation evaluate(const ChessState& s, std::span<const chess::Move> legal) const override {
    if (legal.empty()) throw ContractError("heuristic evaluator needs a non-terminal state");
    Evaluation e;
    e.value = std::tanh(material_diff(s.board()) / kValueScale);
    e.priors.resize(legal.size());
    double max_score = -1e300;
    for (std::size_t i = 0; i < legal.size(); ++i) {
      e.priors[i] = move_score(s.board(), legal[i]);
      max_score = std::max(max_score, e.priors[i]);
    }
    double sum = 0.0;
    for (double& p : e.priors) sum += (p = std::exp(p - max_score));
    for (double& p : e.priors) p /= sum;
    return e;
  }

  std::string name() const override { return "heuristic"; }
};

}  // namespace sclab
