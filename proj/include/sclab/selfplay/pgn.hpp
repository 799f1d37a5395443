#pragma once

// PGN export and import.
//
// Tag order per game: Event, Site, Date, Round, White, Black, Result, then
// SetUp and FEN when the game does not start from the standard position,
// then Variant (tic-tac-toe only) and Termination. Chess movetext is SAN;
// tic-tac-toe moves are cell names (a3 .. c1). Lines wrap before 80 columns.
// Date is always "????.??.??" so exports are byte-stable.

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/games/chess.hpp"
#include "sclab/games/tictactoe.hpp"
#include "sclab/selfplay/record.hpp"

namespace sclab {

template <GameState S>
std::string move_san(const S& state, const typename S::Action& a) {
  if constexpr (std::same_as<S, ChessState>) {
    return state.san(a);
  } else {
    return state.action_text(a);
  }
}

inline std::string pgn_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

template <GameState S>
std::string export_pgn(const std::vector<GameRecord<S>>& games, std::string_view event = "sclab") {
  if (games.empty()) throw ContractError("export_pgn needs at least one game");
  std::ostringstream out;
  const std::string initial = S::initial().to_string();
  for (std::size_t gi = 0; gi < games.size(); ++gi) {
    const auto& g = games[gi];
    const char* result = result_token(g.outcome.value);
    out << "[Event \"" << pgn_escape(event) << "\"]\n";
    out << "[Site \"?\"]\n";
    out << "[Date \"????.??.??\"]\n";
    out << "[Round \"" << gi + 1 << "\"]\n";
    out << "[White \"" << pgn_escape(g.white) << "\"]\n";
    out << "[Black \"" << pgn_escape(g.black) << "\"]\n";
    out << "[Result \"" << result << "\"]\n";
    if (g.start != initial) {
      out << "[SetUp \"1\"]\n";
      out << "[FEN \"" << pgn_escape(g.start) << "\"]\n";
    }
    if constexpr (S::kGameId == GameId::TicTacToe) out << "[Variant \"TicTacToe\"]\n";
    out << "[Termination \"" << to_string(g.outcome.reason) << "\"]\n\n";

    S state = S::parse(g.start);
    std::string line;
    auto emit = [&](const std::string& token) {
      if (!line.empty() && line.size() + 1 + token.size() > 79) {
        out << line << '\n';
        line.clear();
      }
      if (!line.empty()) line += ' ';
      line += token;
    };
    for (std::size_t i = 0; i < g.moves.size(); ++i) {
      const int ply = state.ply();
      const int number = ply / 2 + 1;
      if (state.side_to_move() == Player::P1) emit(std::to_string(number) + ".");
      else if (i == 0) emit(std::to_string(number) + "...");
      emit(move_san(state, g.moves[i]));
      state = state.apply(g.moves[i]);
    }
    emit(result);
    out << line << "\n\n";
  }
  return out.str();
}

template <GameState S>
struct PgnGame {
  std::map<std::string, std::string> tags;
  std::string start;
  std::vector<typename S::Action> moves;
  std::string result = "*";
};

/// Parses every game in `text`. Comments, variations, NAGs and move numbers
/// are skipped; moves may be SAN or long algebraic. Each move is validated by
/// replaying it from the start position.
template <GameState S>
std::vector<PgnGame<S>> import_pgn(std::string_view text) {
  std::vector<PgnGame<S>> games;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto skip_space = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  while (true) {
    skip_space();
    if (i >= n) break;
    PgnGame<S> game;
    while (i < n && text[i] == '[') {
      const std::size_t close = text.find(']', i);
      if (close == std::string_view::npos) throw ParseError("unterminated PGN tag");
      const std::string_view tag = text.substr(i + 1, close - i - 1);
      const std::size_t sp = tag.find(' ');
      const std::size_t q1 = tag.find('"'), q2 = tag.rfind('"');
      if (sp == std::string_view::npos || q1 == std::string_view::npos || q2 <= q1)
        throw ParseError("malformed PGN tag");
      std::string value;
      for (std::size_t k = q1 + 1; k < q2; ++k) {
        if (tag[k] == '\\' && k + 1 < q2) ++k;
        value += tag[k];
      }
      game.tags[std::string(tag.substr(0, sp))] = value;
      i = close + 1;
      skip_space();
    }
    const auto fen = game.tags.find("FEN");
    S state = fen != game.tags.end() ? S::parse(fen->second) : S::initial();
    game.start = state.to_string();

    bool done = false;
    while (!done) {
      skip_space();
      if (i >= n) break;
      const char c = text[i];
      if (c == '[') break;  // next game without a result token
      if (c == '{') {
        const std::size_t close = text.find('}', i);
        if (close == std::string_view::npos) throw ParseError("unterminated PGN comment");
        i = close + 1;
        continue;
      }
      if (c == ';') {
        while (i < n && text[i] != '\n') ++i;
        continue;
      }
      if (c == '(') {
        int depth = 0;
        do {
          if (text[i] == '(') ++depth;
          if (text[i] == ')') --depth;
          ++i;
        } while (i < n && depth > 0);
        continue;
      }
      std::size_t end = i;
      while (end < n && !std::isspace(static_cast<unsigned char>(text[end])) &&
             text[end] != '{' && text[end] != '(' && text[end] != ';')
        ++end;
      std::string token(text.substr(i, end - i));
      i = end;
      if (token == "1-0" || token == "0-1" || token == "1/2-1/2" || token == "*") {
        game.result = token;
        done = true;
        continue;
      }
      if (token[0] == '$') continue;
      // Strip a leading move number ("12." / "12...").
      std::size_t p = 0;
      while (p < token.size() && std::isdigit(static_cast<unsigned char>(token[p]))) ++p;
      if (p > 0 && p < token.size() && token[p] == '.') {
        while (p < token.size() && token[p] == '.') ++p;
        token = token.substr(p);
      } else if (p == token.size()) {
        continue;
      }
      if (token.empty()) continue;
      const auto move = state.parse_action(token);
      state = state.apply(move);
      game.moves.push_back(move);
    }
    games.push_back(std::move(game));
  }
  return games;
}

}  // namespace sclab
