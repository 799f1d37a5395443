#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/chess_0x88.hpp"
#include "sclab/core/rng.hpp"
#include "sclab/games/chess.hpp"

using namespace sclab;
using chess::Move;

namespace {

std::vector<std::string> uci_list(const ChessState& s) {
  std::vector<std::string> out;
  for (const auto& m : s.legal_actions()) out.push_back(chess::uci(m));
  std::sort(out.begin(), out.end());
  return out;
}

ChessState play(ChessState s, const std::vector<std::string>& moves) {
  for (const auto& m : moves) s = s.apply(s.parse_action(m));
  return s;
}

int sq(int file, int rank) { return rank * 8 + file; }

const char* kKiwipete = "r3k2r/p1ppqpb1/bn2pnp1/3PN3/1p2P3/2N2Q1p/PPPBBPPP/R3K2R w KQkq - 0 1";

}  // namespace

TEST(ChessFen, StartPosition) {
  const auto s = ChessState::initial();
  EXPECT_EQ(s.side_to_move(), Player::P1);
  EXPECT_EQ(s.ply(), 0);
  EXPECT_EQ(s.fen(), std::string(chess::kStartFen));
  EXPECT_FALSE(s.terminal());
}

TEST(ChessFen, RoundTrip) {
  for (const char* fen : {kKiwipete, "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
                          "rnbqkbnr/pp1ppppp/8/2p5/4P3/8/PPPP1PPP/RNBQKBNR w KQkq c6 0 2",
                          "4k3/8/8/8/8/8/8/4K2R b K - 12 40"}) {
    const auto s = ChessState::parse(fen);
    EXPECT_EQ(s.fen(), fen);
    EXPECT_EQ(ChessState::parse(s.fen()).position_key(), s.position_key());
  }
}

TEST(ChessFen, Errors) {
  EXPECT_THROW(ChessState::parse("not a fen"), ParseError);
  EXPECT_THROW(ChessState::parse("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq -"),
               ParseError);  // five fields
  EXPECT_THROW(ChessState::parse("rnbqkbnr/ppppzppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"),
               ParseError);  // bad piece
  EXPECT_THROW(ChessState::parse("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR x KQkq - 0 1"),
               ParseError);  // bad side
  EXPECT_THROW(ChessState::parse("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBN1 w KQkq - 0 1"),
               ParseError);  // castling right without the rook
  EXPECT_THROW(ChessState::parse("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1 x"),
               ParseError);  // seven fields
  EXPECT_THROW(ChessState::parse("rnbqkbnr/pppppppp/9/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1"),
               ParseError);  // rank too long
}

TEST(ChessFen, QueenOddsMatchesOracle) {
  const auto s = ChessState::parse(chess::kQueenOddsFen);
  EXPECT_EQ(s.board().piece_at(3), chess::kNoPiece);  // d1 empty
  const oracle::Board0x88 o{std::string(chess::kQueenOddsFen)};
  EXPECT_EQ(uci_list(s), o.legal_uci());
  EXPECT_EQ(s.legal_actions().size(), o.legal_uci().size());
}

TEST(ChessMoves, StartHasTwentyMoves) {
  EXPECT_EQ(ChessState::initial().legal_actions().size(), 20u);
}

TEST(ChessMoves, LegalOrderIsFromToPromo) {
  const auto s = ChessState::parse("n3k3/1P6/8/8/8/8/8/4K3 w - - 0 1");
  const auto moves = s.legal_actions();
  EXPECT_TRUE(std::is_sorted(moves.begin(), moves.end()));
  std::vector<std::string> promos;
  for (const auto& m : moves)
    if (m.promo != chess::NoPromo) promos.push_back(chess::uci(m));
  // Promotion order within one (from, to): knight, bishop, rook, queen.
  ASSERT_EQ(promos.size(), 8u);
  EXPECT_EQ(promos[0], "b7a8n");
  EXPECT_EQ(promos[3], "b7a8q");
  EXPECT_EQ(promos[4], "b7b8n");
}

TEST(ChessMoves, E4) {
  const auto s = play(ChessState::initial(), {"e2e4"});
  EXPECT_EQ(s.side_to_move(), Player::P2);
  EXPECT_EQ(s.ply(), 1);
  EXPECT_EQ(s.fen(), "rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq e3 0 1");
}

TEST(ChessMoves, IllegalMoveThrows) {
  const auto s = ChessState::initial();
  EXPECT_THROW(s.apply(Move{static_cast<std::uint8_t>(sq(4, 1)), static_cast<std::uint8_t>(sq(4, 4)), chess::NoPromo}), ContractError);
  EXPECT_THROW(s.parse_action("e2e5"), ParseError);
}

TEST(ChessMoves, FoolsMate) {
  const auto s = play(ChessState::initial(), {"f2f3", "e7e5", "g2g4", "d8h4"});
  EXPECT_TRUE(s.legal_actions().empty());
  ASSERT_TRUE(s.terminal());
  EXPECT_EQ(s.terminal()->value, OutcomeValue::P2Win);
  EXPECT_EQ(s.terminal()->reason, OutcomeReason::Checkmate);
  EXPECT_TRUE(oracle::Board0x88(s.fen()).legal_uci().empty());
}

TEST(ChessMoves, Stalemate) {
  const auto s = ChessState::parse("7k/5Q2/6K1/8/8/8/8/8 b - - 0 1");
  ASSERT_TRUE(s.terminal());
  EXPECT_EQ(s.terminal()->value, OutcomeValue::Draw);
  EXPECT_EQ(s.terminal()->reason, OutcomeReason::Stalemate);
}

TEST(ChessMoves, ThreefoldRepetition) {
  const auto before = play(ChessState::initial(),
                           {"g1f3", "g8f6", "f3g1", "f6g8", "g1f3", "g8f6", "f3g1"});
  EXPECT_FALSE(before.terminal());
  EXPECT_FALSE(before.legal_actions().empty());
  const auto after = play(before, {"f6g8"});
  ASSERT_TRUE(after.terminal());
  EXPECT_EQ(after.terminal()->value, OutcomeValue::Draw);
  EXPECT_EQ(after.terminal()->reason, OutcomeReason::ThreefoldRepetition);
  EXPECT_TRUE(after.legal_actions().empty());
  EXPECT_EQ(after.repetition_count(), 3);
}

TEST(ChessMoves, FiftyMoveRule) {
  const auto s = ChessState::parse("4k3/8/8/8/8/8/8/R3K3 w - - 99 80");
  EXPECT_FALSE(s.terminal());
  const auto t = play(s, {"a1a2"});
  ASSERT_TRUE(t.terminal());
  EXPECT_EQ(t.terminal()->reason, OutcomeReason::FiftyMove);
  // A capture or pawn move resets the clock.
  const auto p = ChessState::parse("4k3/8/8/8/8/8/P7/4K3 w - - 99 80");
  EXPECT_FALSE(play(p, {"a2a3"}).terminal());
}

TEST(ChessMoves, InsufficientMaterial) {
  for (const char* fen : {"4k3/8/8/8/8/8/8/4K3 w - - 0 1", "4k3/8/8/8/8/8/8/4KN2 w - - 0 1",
                          "4k3/8/8/8/8/8/8/4KB2 b - - 0 1", "4kb2/8/8/8/8/8/8/4K3 w - - 0 1"}) {
    const auto s = ChessState::parse(fen);
    ASSERT_TRUE(s.terminal()) << fen;
    EXPECT_EQ(s.terminal()->reason, OutcomeReason::InsufficientMaterial);
    EXPECT_TRUE(s.legal_actions().empty());
  }
  // KNNK and KRK are playable.
  EXPECT_FALSE(ChessState::parse("4k3/8/8/8/8/8/8/3NKN2 w - - 0 1").terminal());
  EXPECT_FALSE(ChessState::parse("4k3/8/8/8/8/8/8/4KR2 w - - 0 1").terminal());
}

TEST(ChessMoves, CastlingAndEnPassant) {
  const auto s = ChessState::parse(kKiwipete);
  const auto moves = uci_list(s);
  EXPECT_TRUE(std::binary_search(moves.begin(), moves.end(), "e1g1"));
  EXPECT_TRUE(std::binary_search(moves.begin(), moves.end(), "e1c1"));
  const auto after = play(s, {"e1g1"});
  EXPECT_EQ(after.board().piece_at(sq(5, 0)),
            chess::make_piece(chess::White, chess::Rook));

  const auto ep = play(ChessState::initial(), {"e2e4", "a7a6", "e4e5", "d7d5"});
  const auto ep_moves = uci_list(ep);
  EXPECT_TRUE(std::binary_search(ep_moves.begin(), ep_moves.end(), "e5d6"));
  const auto taken = play(ep, {"e5d6"});
  EXPECT_EQ(taken.board().piece_at(sq(3, 4)), chess::kNoPiece);
}

TEST(ChessMoves, Perft) {
  const auto start = ChessState::initial();
  const std::uint64_t expected[] = {1, 20, 400, 8902, 197281};
  for (int d = 0; d <= 4; ++d) EXPECT_EQ(chess::perft(start.board(), d), expected[d]);
  const auto kiwi = ChessState::parse(kKiwipete);
  EXPECT_EQ(chess::perft(kiwi.board(), 3), 97862u);
  const auto p3 = ChessState::parse("8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1");
  EXPECT_EQ(chess::perft(p3.board(), 4), 43238u);
}

TEST(ChessMoves, PerftMatchesOracle) {
  for (const char* fen : {kKiwipete, "8/2p5/3p4/KP5r/1R3p1k/8/4P1P1/8 w - - 0 1",
                          "r3k2r/Pppp1ppp/1b3nbN/nP6/BBP1P3/q4N2/Pp1P2PP/R2Q1RK1 w kq - 0 1"}) {
    const auto s = ChessState::parse(fen);
    EXPECT_EQ(chess::perft(s.board(), 2), oracle::Board0x88(fen).perft(2)) << fen;
  }
}

// Every state within depth 3 of the start: same legal move set as the oracle.
TEST(ChessMoves, Depth3AgreesWithOracle) {
  std::vector<ChessState> frontier{ChessState::initial()};
  std::size_t checked = 0;
  for (int depth = 0; depth <= 3; ++depth) {
    std::vector<ChessState> next;
    for (const auto& s : frontier) {
      ASSERT_EQ(uci_list(s), oracle::Board0x88(s.fen()).legal_uci()) << s.fen();
      ++checked;
      if (depth < 3)
        for (const auto& m : s.legal_actions()) next.push_back(s.apply(m));
    }
    frontier = std::move(next);
  }
  EXPECT_EQ(checked, 1u + 20u + 400u + 8902u);
}

// Random games: legal sets agree with the oracle and terminal iff no moves.
TEST(ChessMoves, RandomGamesAgreeWithOracle) {
  Rng rng(11);
  for (int game = 0; game < 40; ++game) {
    auto s = ChessState::initial();
    for (int ply = 0; ply < 200; ++ply) {
      const auto moves = s.legal_actions();
      ASSERT_EQ(moves.empty(), s.terminal().has_value());
      if (moves.empty()) break;
      if (!s.terminal()) {
        ASSERT_EQ(uci_list(s), oracle::Board0x88(s.fen()).legal_uci()) << s.fen();
      }
      s = s.apply(moves[rng.below(moves.size())]);
    }
  }
}

TEST(ChessKey, ChangesAfterEveryStartMove) {
  const auto s = ChessState::initial();
  std::set<std::uint64_t> keys{s.position_key()};
  for (const auto& m : s.legal_actions()) {
    const auto k = s.apply(m).position_key();
    EXPECT_NE(k, s.position_key());
    keys.insert(k);
  }
  EXPECT_EQ(keys.size(), 21u);
}

TEST(ChessKey, Transposition) {
  const auto back = play(ChessState::initial(), {"g1f3", "g8f6", "f3g1", "f6g8"});
  EXPECT_EQ(back.position_key(), ChessState::initial().position_key());
  const auto a = play(ChessState::initial(), {"g1f3", "g8f6", "b1c3"});
  const auto b = play(ChessState::initial(), {"b1c3", "g8f6", "g1f3"});
  EXPECT_EQ(a.position_key(), b.position_key());
}

TEST(ChessKey, EpOnlyWhenCapturable) {
  // After 1.e4 no black pawn can capture on e3: the key ignores the ep square.
  const auto e4 = play(ChessState::initial(), {"e2e4"});
  const auto same =
      ChessState::parse("rnbqkbnr/pppppppp/8/8/4P3/8/PPPP1PPP/RNBQKBNR b KQkq - 0 1");
  EXPECT_EQ(e4.position_key(), same.position_key());
  const auto with_ep =
      ChessState::parse("rnbqkbnr/ppp1pppp/8/3pP3/8/8/PPPP1PPP/RNBQKBNR w KQkq d6 0 3");
  const auto without =
      ChessState::parse("rnbqkbnr/ppp1pppp/8/3pP3/8/8/PPPP1PPP/RNBQKBNR w KQkq - 0 3");
  EXPECT_NE(with_ep.position_key(), without.position_key());
}

TEST(ChessSan, Notation) {
  auto s = ChessState::initial();
  EXPECT_EQ(s.san(s.parse_action("g1f3")), "Nf3");
  EXPECT_EQ(s.san(s.parse_action("e2e4")), "e4");
  const auto mate = play(s, {"f2f3", "e7e5", "g2g4"});
  EXPECT_EQ(mate.san(mate.parse_action("d8h4")), "Qh4#");
  const auto kiwi = ChessState::parse(kKiwipete);
  EXPECT_EQ(kiwi.san(kiwi.parse_action("e1g1")), "O-O");
  EXPECT_EQ(kiwi.san(kiwi.parse_action("e1c1")), "O-O-O");
  EXPECT_EQ(kiwi.parse_action("O-O"), kiwi.parse_action("e1g1"));
  // Knights on b1 and f1 both reach d2.
  const auto two_knights = ChessState::parse("4k3/8/8/8/8/8/8/1N2KN2 w - - 0 1");
  EXPECT_EQ(two_knights.san(two_knights.parse_action("b1d2")), "Nbd2");
  EXPECT_EQ(two_knights.parse_action("Nfd2"), two_knights.parse_action("f1d2"));
  const auto promo = ChessState::parse("4k3/1P6/8/8/8/8/8/4K3 w - - 0 1");
  EXPECT_EQ(promo.san(promo.parse_action("b7b8q")), "b8=Q+");
  EXPECT_EQ(promo.parse_action("b8=N"), promo.parse_action("b7b8n"));
}

TEST(ChessSan, EverySanParsesBack) {
  Rng rng(5);
  auto s = ChessState::parse(kKiwipete);
  for (int ply = 0; ply < 60 && !s.terminal(); ++ply) {
    for (const auto& m : s.legal_actions()) ASSERT_EQ(s.parse_action(s.san(m)), m);
    const auto moves = s.legal_actions();
    s = s.apply(moves[rng.below(moves.size())]);
  }
}

TEST(ChessPolicy, SlotsAreDistinctAndInRange) {
  Rng rng(9);
  for (int game = 0; game < 20; ++game) {
    auto s = ChessState::initial();
    for (int ply = 0; ply < 120 && !s.terminal(); ++ply) {
      std::set<std::size_t> slots;
      const auto moves = s.legal_actions();
      for (const auto& m : moves) {
        const auto slot = s.policy_slot(m);
        ASSERT_LT(slot, ChessState::kPolicySize);
        slots.insert(slot);
      }
      ASSERT_EQ(slots.size(), moves.size()) << s.fen();
      s = s.apply(moves[rng.below(moves.size())]);
    }
  }
}

TEST(ChessPolicy, KnownSlots) {
  const auto s = ChessState::initial();
  // e2e4: from e2 (12), north distance 2 -> plane 1.
  EXPECT_EQ(s.policy_slot(s.parse_action("e2e4")), 12u * 73 + 1);
  // g1f3: knight (dr=+2, df=-1).
  const auto slot = s.policy_slot(s.parse_action("g1f3"));
  EXPECT_EQ(slot / 73, 6u);
  EXPECT_GE(slot % 73, 56u);
  EXPECT_LT(slot % 73, 64u);
  // Black's e7e5 uses the same plane as white's e2e4 after flipping.
  const auto b = play(s, {"a2a3"});
  EXPECT_EQ(b.policy_slot(b.parse_action("e7e5")), 12u * 73 + 1);
}
