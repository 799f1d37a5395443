#include <gtest/gtest.h>

#include <set>

#include "oracle/tictactoe_minimax.hpp"
#include "sclab/games/tictactoe.hpp"

using namespace sclab;

TEST(TicTacToe, EmptyBoardHasNineActions) {
  const auto s = TicTacToe::initial();
  EXPECT_EQ(s.legal_actions().size(), 9u);
  EXPECT_EQ(s.side_to_move(), Player::P1);
  EXPECT_EQ(s.ply(), 0);
  EXPECT_FALSE(s.terminal());
}

TEST(TicTacToe, CenterMove) {
  const auto s = TicTacToe::initial().apply(4);
  EXPECT_EQ(s.to_string(), "....X....");
  EXPECT_EQ(s.side_to_move(), Player::P2);
  EXPECT_EQ(s.ply(), 1);
}

TEST(TicTacToe, ThreeInARowIsP1Win) {
  const auto s = TicTacToe::parse("XXXOO....");
  ASSERT_TRUE(s.terminal());
  EXPECT_EQ(s.terminal()->value, OutcomeValue::P1Win);
  EXPECT_EQ(s.terminal()->reason, OutcomeReason::ToyWin);
  EXPECT_TRUE(s.legal_actions().empty());
}

TEST(TicTacToe, FullBoardDraw) {
  const auto s = TicTacToe::parse("XOXXOOOXX");
  ASSERT_TRUE(s.terminal());
  EXPECT_EQ(s.terminal()->value, OutcomeValue::Draw);
}

TEST(TicTacToe, ParseRejectsBadInput) {
  EXPECT_THROW(TicTacToe::parse("XXX"), ParseError);
  EXPECT_THROW(TicTacToe::parse("XXXXOOOO.."), ParseError);
  EXPECT_THROW(TicTacToe::parse("OO......."), ParseError);
  EXPECT_THROW(TicTacToe::parse("XXXOOO..."), ParseError);
  EXPECT_THROW(TicTacToe::parse("XXXOO..O."), ParseError);
  EXPECT_THROW(TicTacToe::parse("Q........"), ParseError);
}

TEST(TicTacToe, IllegalApplyThrows) {
  const auto s = TicTacToe::initial().apply(0);
  EXPECT_THROW(s.apply(0), ContractError);
  EXPECT_THROW(s.apply(9), ContractError);
}

TEST(TicTacToe, ActionText) {
  const auto s = TicTacToe::initial();
  EXPECT_EQ(s.action_text(0), "a3");
  EXPECT_EQ(s.action_text(8), "c1");
  EXPECT_EQ(s.parse_action("b2"), 4);
  EXPECT_EQ(s.parse_action("7"), 7);
  EXPECT_THROW(s.parse_action("d4"), ParseError);
}

TEST(TicTacToe, Features) {
  const auto empty = TicTacToe::initial().features();
  ASSERT_EQ(empty.size(), 19u);
  for (int i = 0; i < 18; ++i) EXPECT_EQ(empty[i], 0.0f);
  EXPECT_EQ(empty[18], 1.0f);

  // O to move: O's stone is "own", X's are "opponent".
  const auto f = TicTacToe::parse("X...O...X").features();
  EXPECT_EQ(f[18], 0.0f);
  EXPECT_EQ(f[4], 1.0f);
  EXPECT_EQ(f[9 + 0], 1.0f);
  EXPECT_EQ(f[9 + 8], 1.0f);
  const auto g = TicTacToe::parse("X...O....").features();
  EXPECT_EQ(g[18], 1.0f);  // X to move (2 stones placed)
  const auto h = TicTacToe::parse("X........").features();
  EXPECT_EQ(h[18], 0.0f);
  EXPECT_EQ(h[9 + 0], 1.0f);
  EXPECT_EQ(h[0], 0.0f);
}

TEST(TicTacToe, ExhaustiveAgreementWithOracle) {
  const auto boards = oracle::TicTacToeSolver::reachable();
  EXPECT_EQ(boards.size(), 5478u);
  std::set<std::uint64_t> keys;
  int nonterminal = 0;
  for (const auto& b : boards) {
    const auto s = TicTacToe::parse(b);
    EXPECT_EQ(s.to_string(), b);
    const bool oracle_terminal = oracle::TicTacToeSolver::terminal(b);
    ASSERT_EQ(s.terminal().has_value(), oracle_terminal) << b;
    ASSERT_EQ(s.legal_actions().empty(), oracle_terminal) << b;
    if (oracle_terminal) {
      const char w = oracle::TicTacToeSolver::winner(b);
      const auto v = s.terminal()->value;
      EXPECT_EQ(v, w == 'X' ? OutcomeValue::P1Win : w == 'O' ? OutcomeValue::P2Win
                                                                : OutcomeValue::Draw);
    } else {
      ++nonterminal;
    }
    keys.insert(s.position_key());
  }
  EXPECT_EQ(nonterminal, 4520);
  EXPECT_EQ(keys.size(), boards.size());
}

TEST(TicTacToe, ApplyIsPure) {
  const auto s = TicTacToe::parse("X...O....");
  EXPECT_EQ(s.apply(2), s.apply(2));
  EXPECT_EQ(s.to_string(), "X...O....");
}
