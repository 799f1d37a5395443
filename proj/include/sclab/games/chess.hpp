#pragma once

// Standard chess: bitboard move generation, FEN, SAN/UCI move text,
// Zobrist position keys and draw detection (stalemate, fifty-move,
// threefold repetition, KK/KNK/KBK).
//
// Squares are numbered a1 = 0, b1 = 1, ..., h8 = 63.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdlib>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/game.hpp"
#include "sclab/core/rng.hpp"

namespace sclab::chess {

using Bitboard = std::uint64_t;

enum Color : std::uint8_t { White = 0, Black = 1 };
enum PieceType : std::uint8_t { Pawn, Knight, Bishop, Rook, Queen, King };

constexpr std::uint8_t kNoPiece = 12;

constexpr std::uint8_t make_piece(Color c, PieceType t) { return c * 6 + t; }
constexpr Color piece_color(std::uint8_t p) { return static_cast<Color>(p / 6); }
constexpr PieceType piece_type(std::uint8_t p) { return static_cast<PieceType>(p % 6); }
constexpr Color other(Color c) { return static_cast<Color>(c ^ 1); }

constexpr int file_of(int sq) { return sq & 7; }
constexpr int rank_of(int sq) { return sq >> 3; }
constexpr Bitboard bit(int sq) { return Bitboard{1} << sq; }

/// Promotion codes, ordered so that Move compares lexicographically on
/// (from, to, promotion) with "no promotion" first.
enum Promotion : std::uint8_t { NoPromo = 0, PromoKnight, PromoBishop, PromoRook, PromoQueen };

constexpr PieceType promo_piece(std::uint8_t promo) {
  return static_cast<PieceType>(promo);  // PromoKnight == Knight, ...
}

struct Move {
  std::uint8_t from = 0;
  std::uint8_t to = 0;
  std::uint8_t promo = NoPromo;

  friend auto operator<=>(const Move&, const Move&) = default;
  friend bool operator==(const Move&, const Move&) = default;
};

inline std::string square_name(int sq) {
  return {static_cast<char>('a' + file_of(sq)), static_cast<char>('1' + rank_of(sq))};
}

inline std::optional<int> parse_square(std::string_view s) {
  if (s.size() != 2 || s[0] < 'a' || s[0] > 'h' || s[1] < '1' || s[1] > '8')
    return std::nullopt;
  return (s[1] - '1') * 8 + (s[0] - 'a');
}

/// Long algebraic (UCI) text: "e2e4", "e7e8q".
inline std::string uci(Move m) {
  std::string s = square_name(m.from) + square_name(m.to);
  if (m.promo != NoPromo) s += " nbrq"[m.promo];
  return s;
}

namespace detail {

// Directions: N, NE, E, SE, S, SW, W, NW.
constexpr int kDirDelta[8] = {8, 9, 1, -7, -8, -9, -1, 7};
constexpr int kDirFile[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDirRank[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr bool kDirPositive[8] = {true, true, true, false, false, false, false, true};

struct Tables {
  Bitboard knight[64]{};
  Bitboard king[64]{};
  Bitboard pawn[2][64]{};
  Bitboard ray[8][64]{};
  std::uint64_t zobrist_piece[12][64]{};
  std::uint64_t zobrist_castle[16]{};
  std::uint64_t zobrist_ep[8]{};
  std::uint64_t zobrist_side = 0;
};

constexpr Bitboard step_targets(int sq, const int (*offsets)[2], int n) {
  Bitboard b = 0;
  for (int i = 0; i < n; ++i) {
    const int f = file_of(sq) + offsets[i][0], r = rank_of(sq) + offsets[i][1];
    if (f >= 0 && f < 8 && r >= 0 && r < 8) b |= bit(r * 8 + f);
  }
  return b;
}

constexpr Tables make_tables() {
  Tables t{};
  constexpr int knight_off[8][2] = {{1, 2}, {2, 1}, {2, -1}, {1, -2},
                                    {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}};
  constexpr int king_off[8][2] = {{0, 1}, {1, 1}, {1, 0}, {1, -1},
                                  {0, -1}, {-1, -1}, {-1, 0}, {-1, 1}};
  constexpr int wp_off[2][2] = {{-1, 1}, {1, 1}};
  constexpr int bp_off[2][2] = {{-1, -1}, {1, -1}};
  for (int sq = 0; sq < 64; ++sq) {
    t.knight[sq] = step_targets(sq, knight_off, 8);
    t.king[sq] = step_targets(sq, king_off, 8);
    t.pawn[White][sq] = step_targets(sq, wp_off, 2);
    t.pawn[Black][sq] = step_targets(sq, bp_off, 2);
    for (int d = 0; d < 8; ++d) {
      Bitboard b = 0;
      int f = file_of(sq) + kDirFile[d], r = rank_of(sq) + kDirRank[d];
      while (f >= 0 && f < 8 && r >= 0 && r < 8) {
        b |= bit(r * 8 + f);
        f += kDirFile[d];
        r += kDirRank[d];
      }
      t.ray[d][sq] = b;
    }
  }
  std::uint64_t s = 0x5c1ab5eed0000001ULL;
  auto next = [&s]() { s = mix64(s); return s; };
  for (auto& piece : t.zobrist_piece)
    for (auto& k : piece) k = next();
  for (int c = 1; c < 16; ++c) t.zobrist_castle[c] = next();
  for (auto& k : t.zobrist_ep) k = next();
  t.zobrist_side = next();
  return t;
}

inline constexpr Tables kTables = make_tables();

inline Bitboard ray_attacks(int sq, int dir, Bitboard occ) {
  Bitboard a = kTables.ray[dir][sq];
  const Bitboard blockers = a & occ;
  if (blockers) {
    const int b = kDirPositive[dir] ? std::countr_zero(blockers)
                                    : 63 - std::countl_zero(blockers);
    a ^= kTables.ray[dir][b];
  }
  return a;
}

inline Bitboard bishop_attacks(int sq, Bitboard occ) {
  return ray_attacks(sq, 1, occ) | ray_attacks(sq, 3, occ) |
         ray_attacks(sq, 5, occ) | ray_attacks(sq, 7, occ);
}

inline Bitboard rook_attacks(int sq, Bitboard occ) {
  return ray_attacks(sq, 0, occ) | ray_attacks(sq, 2, occ) |
         ray_attacks(sq, 4, occ) | ray_attacks(sq, 6, occ);
}

// Castling-right bits kept after a piece leaves or lands on a square.
constexpr std::array<std::uint8_t, 64> make_castle_mask() {
  std::array<std::uint8_t, 64> m{};
  for (auto& x : m) x = 15;
  m[4] = 15 & ~3;    // e1
  m[7] = 15 & ~1;    // h1
  m[0] = 15 & ~2;    // a1
  m[60] = 15 & ~12;  // e8
  m[63] = 15 & ~4;   // h8
  m[56] = 15 & ~8;   // a8
  return m;
}
inline constexpr auto kCastleMask = make_castle_mask();

}  // namespace detail

enum CastleRight : std::uint8_t {
  WhiteKingside = 1,
  WhiteQueenside = 2,
  BlackKingside = 4,
  BlackQueenside = 8
};

/// Fixed-capacity move list; 256 exceeds the legal-move maximum (218).
struct MoveList {
  std::array<Move, 256> moves;
  int size = 0;
  void push(Move m) { moves[size++] = m; }
  const Move* begin() const { return moves.data(); }
  const Move* end() const { return moves.data() + size; }
};

/// Raw position without repetition history.
class Board {
 public:
  Board() { mailbox_.fill(kNoPiece); }

  static Board from_fen(std::string_view fen);
  std::string fen() const;

  Color side() const { return side_; }
  std::uint8_t castling() const { return castling_; }
  int ep_square() const { return ep_; }
  int halfmove_clock() const { return halfmove_; }
  int fullmove_number() const { return fullmove_; }
  std::uint8_t piece_at(int sq) const { return mailbox_[sq]; }
  Bitboard pieces(Color c, PieceType t) const { return bb_[make_piece(c, t)]; }
  Bitboard occupancy(Color c) const { return occ_[c]; }
  Bitboard occupancy() const { return occ_[0] | occ_[1]; }

  int king_square(Color c) const { return std::countr_zero(pieces(c, King)); }

  bool attacked(int sq, Color by) const { return attacked(sq, by, occupancy()); }

  bool attacked(int sq, Color by, Bitboard occ) const {
    using detail::kTables;
    if (kTables.pawn[other(by)][sq] & pieces(by, Pawn)) return true;
    if (kTables.knight[sq] & pieces(by, Knight)) return true;
    if (kTables.king[sq] & pieces(by, King)) return true;
    const Bitboard queens = pieces(by, Queen);
    if (detail::bishop_attacks(sq, occ) & (pieces(by, Bishop) | queens)) return true;
    if (detail::rook_attacks(sq, occ) & (pieces(by, Rook) | queens)) return true;
    return false;
  }

  bool in_check() const { return attacked(king_square(side_), other(side_)); }

  /// The en-passant square only counts as position state when a pawn of the
  /// side to move could capture onto it.
  bool ep_capturable() const {
    return ep_ >= 0 &&
           (detail::kTables.pawn[other(side_)][ep_] & pieces(side_, Pawn)) != 0;
  }

  std::uint64_t key() const {
    std::uint64_t k = piece_key_ ^ detail::kTables.zobrist_castle[castling_];
    if (side_ == Black) k ^= detail::kTables.zobrist_side;
    if (ep_capturable()) k ^= detail::kTables.zobrist_ep[file_of(ep_)];
    return k;
  }

  void pseudo_legal_moves(MoveList& out) const;

  /// Legal moves in ascending (from, to, promotion) order.
  void legal_moves(MoveList& out) const {
    MoveList pseudo;
    pseudo_legal_moves(pseudo);
    out.size = 0;
    for (const Move& m : pseudo)
      if (is_legal_pseudo(m)) out.push(m);
    std::sort(out.moves.begin(), out.moves.begin() + out.size);
  }

  bool has_legal_move() const {
    MoveList pseudo;
    pseudo_legal_moves(pseudo);
    for (const Move& m : pseudo)
      if (is_legal_pseudo(m)) return true;
    return false;
  }

  /// Does not validate `m`; callers pass pseudo-legal or legal moves only.
  Board make(Move m) const;

  bool is_capture(Move m) const {
    return mailbox_[m.to] != kNoPiece ||
           (piece_type(mailbox_[m.from]) == Pawn && m.to == ep_);
  }

  bool insufficient_material() const {
    const Bitboard heavy = pieces(White, Pawn) | pieces(Black, Pawn) |
                           pieces(White, Rook) | pieces(Black, Rook) |
                           pieces(White, Queen) | pieces(Black, Queen);
    if (heavy) return false;
    const int minors = std::popcount(pieces(White, Knight) | pieces(Black, Knight) |
                                     pieces(White, Bishop) | pieces(Black, Bishop));
    return minors <= 1;
  }

  friend bool operator==(const Board& a, const Board& b) {
    return a.bb_ == b.bb_ && a.side_ == b.side_ && a.castling_ == b.castling_ &&
           a.ep_ == b.ep_ && a.halfmove_ == b.halfmove_ && a.fullmove_ == b.fullmove_;
  }

 private:
  void put(int sq, std::uint8_t p) {
    bb_[p] |= bit(sq);
    occ_[piece_color(p)] |= bit(sq);
    mailbox_[sq] = p;
    piece_key_ ^= detail::kTables.zobrist_piece[p][sq];
  }
  void remove(int sq) {
    const std::uint8_t p = mailbox_[sq];
    bb_[p] &= ~bit(sq);
    occ_[piece_color(p)] &= ~bit(sq);
    mailbox_[sq] = kNoPiece;
    piece_key_ ^= detail::kTables.zobrist_piece[p][sq];
  }

  bool is_legal_pseudo(Move m) const {
    const Board next = make(m);
    return !next.attacked(next.king_square(side_), next.side_);
  }

  void add_pawn_moves(MoveList& out, int from, int to) const {
    if (rank_of(to) == 0 || rank_of(to) == 7) {
      for (std::uint8_t p = PromoKnight; p <= PromoQueen; ++p)
        out.push({static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to), p});
    } else {
      out.push({static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to), NoPromo});
    }
  }

  std::array<Bitboard, 12> bb_{};
  std::array<Bitboard, 2> occ_{};
  std::array<std::uint8_t, 64> mailbox_{};
  Color side_ = White;
  std::uint8_t castling_ = 0;
  int ep_ = -1;
  int halfmove_ = 0;
  int fullmove_ = 1;
  std::uint64_t piece_key_ = 0;
};

inline void Board::pseudo_legal_moves(MoveList& out) const {
  using detail::kTables;
  out.size = 0;
  const Color us = side_, them = other(side_);
  const Bitboard own = occ_[us], enemy = occ_[them], occ = own | enemy;

  auto emit = [&out](int from, Bitboard targets) {
    while (targets) {
      const int to = std::countr_zero(targets);
      targets &= targets - 1;
      out.push({static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to), NoPromo});
    }
  };

  const int forward = us == White ? 8 : -8;
  const int start_rank = us == White ? 1 : 6;
  for (Bitboard b = pieces(us, Pawn); b; b &= b - 1) {
    const int from = std::countr_zero(b);
    const int one = from + forward;
    if (!(occ & bit(one))) {
      add_pawn_moves(out, from, one);
      const int two = one + forward;
      if (rank_of(from) == start_rank && !(occ & bit(two))) add_pawn_moves(out, from, two);
    }
    Bitboard caps = kTables.pawn[us][from] & enemy;
    if (ep_ >= 0 && (kTables.pawn[us][from] & bit(ep_))) caps |= bit(ep_);
    for (; caps; caps &= caps - 1) add_pawn_moves(out, from, std::countr_zero(caps));
  }
  for (Bitboard b = pieces(us, Knight); b; b &= b - 1) {
    const int from = std::countr_zero(b);
    emit(from, kTables.knight[from] & ~own);
  }
  for (Bitboard b = pieces(us, Bishop) | pieces(us, Queen); b; b &= b - 1) {
    const int from = std::countr_zero(b);
    emit(from, detail::bishop_attacks(from, occ) & ~own);
  }
  for (Bitboard b = pieces(us, Rook) | pieces(us, Queen); b; b &= b - 1) {
    const int from = std::countr_zero(b);
    emit(from, detail::rook_attacks(from, occ) & ~own);
  }
  const int ksq = king_square(us);
  emit(ksq, kTables.king[ksq] & ~own);

  // Castling; the destination square itself is checked by the legality filter.
  const int base = us == White ? 0 : 56;
  const std::uint8_t ks = us == White ? WhiteKingside : BlackKingside;
  const std::uint8_t qs = us == White ? WhiteQueenside : BlackQueenside;
  if ((castling_ & ks) && !(occ & (bit(base + 5) | bit(base + 6))) &&
      !attacked(base + 4, them) && !attacked(base + 5, them)) {
    out.push({static_cast<std::uint8_t>(base + 4), static_cast<std::uint8_t>(base + 6), NoPromo});
  }
  if ((castling_ & qs) && !(occ & (bit(base + 1) | bit(base + 2) | bit(base + 3))) &&
      !attacked(base + 4, them) && !attacked(base + 3, them)) {
    out.push({static_cast<std::uint8_t>(base + 4), static_cast<std::uint8_t>(base + 2), NoPromo});
  }
}

inline Board Board::make(Move m) const {
  Board b = *this;
  const Color us = side_;
  const std::uint8_t piece = mailbox_[m.from];
  const PieceType type = piece_type(piece);

  ++b.halfmove_;
  if (type == Pawn) b.halfmove_ = 0;
  if (mailbox_[m.to] != kNoPiece) {
    b.remove(m.to);
    b.halfmove_ = 0;
  } else if (type == Pawn && m.to == ep_) {
    b.remove(us == White ? m.to - 8 : m.to + 8);
  }
  b.remove(m.from);
  b.put(m.to, m.promo != NoPromo ? make_piece(us, promo_piece(m.promo)) : piece);

  if (type == King && (m.to - m.from == 2 || m.from - m.to == 2)) {
    const bool kingside = m.to > m.from;
    const int rook_from = kingside ? m.from + 3 : m.from - 4;
    const int rook_to = kingside ? m.from + 1 : m.from - 1;
    b.remove(rook_from);
    b.put(rook_to, make_piece(us, Rook));
  }

  b.ep_ = -1;
  if (type == Pawn && (m.to - m.from == 16 || m.from - m.to == 16))
    b.ep_ = (m.from + m.to) / 2;
  b.castling_ &= detail::kCastleMask[m.from] & detail::kCastleMask[m.to];
  b.side_ = other(us);
  if (us == Black) ++b.fullmove_;
  return b;
}

inline Board Board::from_fen(std::string_view fen) {
  std::vector<std::string> fields;
  {
    std::istringstream in{std::string(fen)};
    std::string f;
    while (in >> f) fields.push_back(f);
  }
  if (fields.size() != 6)
    throw ParseError("FEN must have 6 fields, got " + std::to_string(fields.size()));

  Board b;
  int rank = 7, file = 0;
  for (char c : fields[0]) {
    if (c == '/') {
      if (file != 8 || rank == 0) throw ParseError("FEN rank has wrong length");
      --rank;
      file = 0;
    } else if (c >= '1' && c <= '8') {
      file += c - '0';
      if (file > 8) throw ParseError("FEN rank overflows 8 files");
    } else {
      static constexpr std::string_view kChars = "PNBRQKpnbrqk";
      const auto idx = kChars.find(c);
      if (idx == std::string_view::npos)
        throw ParseError(std::string("illegal FEN piece character '") + c + "'");
      if (file >= 8) throw ParseError("FEN rank overflows 8 files");
      b.put(rank * 8 + file, static_cast<std::uint8_t>(idx));
      ++file;
    }
  }
  if (rank != 0 || file != 8) throw ParseError("FEN board must have 8 full ranks");

  if (fields[1] == "w") b.side_ = White;
  else if (fields[1] == "b") b.side_ = Black;
  else throw ParseError("FEN side to move must be 'w' or 'b'");

  if (fields[2] != "-") {
    for (char c : fields[2]) {
      switch (c) {
        case 'K': b.castling_ |= WhiteKingside; break;
        case 'Q': b.castling_ |= WhiteQueenside; break;
        case 'k': b.castling_ |= BlackKingside; break;
        case 'q': b.castling_ |= BlackQueenside; break;
        default: throw ParseError(std::string("bad FEN castling character '") + c + "'");
      }
    }
  }

  if (std::popcount(b.pieces(White, King)) != 1 || std::popcount(b.pieces(Black, King)) != 1)
    throw ParseError("FEN must have exactly one king per side");
  constexpr Bitboard kBackRanks = 0xff000000000000ffULL;
  if ((b.pieces(White, Pawn) | b.pieces(Black, Pawn)) & kBackRanks)
    throw ParseError("FEN has pawns on the first or last rank");

  auto has = [&b](int sq, std::uint8_t p) { return b.mailbox_[sq] == p; };
  const auto wk = make_piece(White, King), wr = make_piece(White, Rook);
  const auto bk = make_piece(Black, King), br = make_piece(Black, Rook);
  if (((b.castling_ & WhiteKingside) && !(has(4, wk) && has(7, wr))) ||
      ((b.castling_ & WhiteQueenside) && !(has(4, wk) && has(0, wr))) ||
      ((b.castling_ & BlackKingside) && !(has(60, bk) && has(63, br))) ||
      ((b.castling_ & BlackQueenside) && !(has(60, bk) && has(56, br))))
    throw ParseError("FEN castling rights impossible for the king/rook placement");

  if (fields[3] != "-") {
    const auto ep = parse_square(fields[3]);
    if (!ep) throw ParseError("bad FEN en-passant square '" + fields[3] + "'");
    const int want_rank = b.side_ == White ? 5 : 2;
    if (rank_of(*ep) != want_rank) throw ParseError("FEN en-passant square on wrong rank");
    const int pawn_sq = b.side_ == White ? *ep - 8 : *ep + 8;
    if (!has(pawn_sq, make_piece(other(b.side_), Pawn)) || b.mailbox_[*ep] != kNoPiece)
      throw ParseError("FEN en-passant square without a double-pushed pawn");
    b.ep_ = *ep;
  }

  auto parse_int = [](const std::string& s, const char* what) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0)
      throw ParseError(std::string("bad FEN ") + what + " '" + s + "'");
    return v;
  };
  b.halfmove_ = parse_int(fields[4], "halfmove clock");
  b.fullmove_ = parse_int(fields[5], "fullmove number");
  if (b.fullmove_ < 1) throw ParseError("FEN fullmove number must be >= 1");

  if (b.attacked(b.king_square(other(b.side_)), b.side_))
    throw ParseError("FEN side not to move is in check");
  return b;
}

inline std::string Board::fen() const {
  std::string s;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const std::uint8_t p = mailbox_[rank * 8 + file];
      if (p == kNoPiece) {
        ++empty;
        continue;
      }
      if (empty) s += static_cast<char>('0' + empty);
      empty = 0;
      s += "PNBRQKpnbrqk"[p];
    }
    if (empty) s += static_cast<char>('0' + empty);
    if (rank) s += '/';
  }
  s += side_ == White ? " w " : " b ";
  if (castling_ == 0) s += '-';
  if (castling_ & WhiteKingside) s += 'K';
  if (castling_ & WhiteQueenside) s += 'Q';
  if (castling_ & BlackKingside) s += 'k';
  if (castling_ & BlackQueenside) s += 'q';
  s += ' ';
  s += ep_ >= 0 ? square_name(ep_) : "-";
  s += ' ' + std::to_string(halfmove_) + ' ' + std::to_string(fullmove_);
  return s;
}

inline constexpr std::string_view kStartFen =
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// Chess start with White's d1 queen removed.
inline constexpr std::string_view kQueenOddsFen =
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNB1KBNR w KQkq - 0 1";

/// Immutable game state: a Board plus the chain of earlier position keys
/// needed for threefold-repetition detection.
class ChessState {
 public:
  using Action = Move;

  static constexpr GameId kGameId = GameId::Chess;
  /// 12 piece planes x 64, perspective marker, 4 castling, 8 en-passant files.
  static constexpr std::size_t kFeatureSize = 781;
  /// 64 from-squares x 73 move types.
  static constexpr std::size_t kPolicySize = 4672;

  ChessState() : ChessState(Board::from_fen(kStartFen)) {}

  explicit ChessState(const Board& b)
      : board_(b),
        ply_(2 * (b.fullmove_number() - 1) + (b.side() == Black ? 1 : 0)),
        history_(std::make_shared<const KeyNode>(KeyNode{b.key(), nullptr})) {}

  static ChessState initial() { return ChessState(); }
  static ChessState parse(std::string_view fen) { return ChessState(Board::from_fen(fen)); }
  static ChessState from_fen(std::string_view fen) { return parse(fen); }

  std::string to_string() const { return board_.fen(); }
  std::string fen() const { return board_.fen(); }
  const Board& board() const { return board_; }

  Player side_to_move() const { return board_.side() == White ? Player::P1 : Player::P2; }
  int ply() const { return ply_; }
  std::uint64_t position_key() const { return board_.key(); }
  bool in_check() const { return board_.in_check(); }

  std::vector<Move> legal_actions() const {
    if (draw_by_rule()) return {};
    MoveList list;
    board_.legal_moves(list);
    return {list.begin(), list.end()};
  }

  ChessState apply(Move m) const {
    if (!is_legal(m)) throw ContractError("illegal chess move " + uci(m) + " in " + fen());
    return apply_unchecked(m);
  }

  /// For callers holding a move taken from legal_actions() of this state.
  ChessState apply_unchecked(Move m) const {
    Board b = board_.make(m);
    const std::uint64_t key = b.key();
    return ChessState(std::move(b), ply_ + 1,
                      std::make_shared<const KeyNode>(KeyNode{key, history_}));
  }

  bool is_legal(Move m) const {
    if (draw_by_rule()) return false;
    MoveList list;
    board_.legal_moves(list);
    return std::binary_search(list.begin(), list.end(), m);
  }

  std::optional<Outcome> terminal() const {
    if (!board_.has_legal_move()) {
      if (board_.in_check()) {
        return Outcome{board_.side() == White ? OutcomeValue::P2Win : OutcomeValue::P1Win,
                       OutcomeReason::Checkmate};
      }
      return Outcome{OutcomeValue::Draw, OutcomeReason::Stalemate};
    }
    if (board_.insufficient_material())
      return Outcome{OutcomeValue::Draw, OutcomeReason::InsufficientMaterial};
    if (board_.halfmove_clock() >= 100)
      return Outcome{OutcomeValue::Draw, OutcomeReason::FiftyMove};
    if (repetition_count() >= 3)
      return Outcome{OutcomeValue::Draw, OutcomeReason::ThreefoldRepetition};
    return std::nullopt;
  }

  /// Occurrences of the current position since the last irreversible move,
  /// counting the current one.
  int repetition_count() const {
    const std::uint64_t key = history_->key;
    int count = 1;
    const KeyNode* node = history_->prev.get();
    for (int back = 1; node && back <= board_.halfmove_clock(); ++back) {
      if (back % 2 == 0 && node->key == key) ++count;
      node = node->prev.get();
    }
    return count;
  }

  std::string action_text(Move m) const { return uci(m); }

  /// Accepts long algebraic ("e2e4", "e7e8q") or SAN ("Nf3", "exd5", "O-O").
  Move parse_action(std::string_view text) const;

  /// Standard algebraic notation with check/mate suffix.
  std::string san(Move m) const;

  std::size_t policy_slot(Move m) const;
  std::vector<float> features() const;

 private:
  struct KeyNode {
    std::uint64_t key;
    std::shared_ptr<const KeyNode> prev;
  };

  ChessState(Board b, int ply, std::shared_ptr<const KeyNode> history)
      : board_(std::move(b)), ply_(ply), history_(std::move(history)) {}

  bool draw_by_rule() const {
    return board_.insufficient_material() || board_.halfmove_clock() >= 100 ||
           repetition_count() >= 3;
  }

  Board board_;
  int ply_ = 0;
  std::shared_ptr<const KeyNode> history_;
};

inline std::string ChessState::san(Move m) const {
  const std::uint8_t piece = board_.piece_at(m.from);
  const PieceType type = piece_type(piece);
  std::string s;
  if (type == King && (m.to - m.from == 2 || m.from - m.to == 2)) {
    s = m.to > m.from ? "O-O" : "O-O-O";
  } else {
    MoveList list;
    board_.legal_moves(list);
    const bool capture = board_.is_capture(m);
    if (type == Pawn) {
      if (capture) s += static_cast<char>('a' + file_of(m.from));
    } else {
      s += "PNBRQK"[type];
      bool ambiguous = false, same_file = false, same_rank = false;
      for (const Move& o : list) {
        if (o.to != m.to || o.from == m.from || board_.piece_at(o.from) != piece) continue;
        ambiguous = true;
        same_file |= file_of(o.from) == file_of(m.from);
        same_rank |= rank_of(o.from) == rank_of(m.from);
      }
      if (ambiguous) {
        if (!same_file) s += static_cast<char>('a' + file_of(m.from));
        else if (!same_rank) s += static_cast<char>('1' + rank_of(m.from));
        else s += square_name(m.from);
      }
    }
    if (capture) s += 'x';
    s += square_name(m.to);
    if (m.promo != NoPromo) {
      s += '=';
      s += "PNBRQK"[promo_piece(m.promo)];
    }
  }
  const Board next = board_.make(m);
  if (next.in_check()) s += next.has_legal_move() ? '+' : '#';
  return s;
}

inline Move ChessState::parse_action(std::string_view text) const {
  MoveList list;
  board_.legal_moves(list);
  for (const Move& m : list)
    if (uci(m) == text) return m;
  std::string want(text);
  while (!want.empty() && (want.back() == '+' || want.back() == '#' ||
                           want.back() == '!' || want.back() == '?'))
    want.pop_back();
  if (want == "0-0") want = "O-O";
  if (want == "0-0-0") want = "O-O-O";
  for (const Move& m : list) {
    std::string s = san(m);
    while (!s.empty() && (s.back() == '+' || s.back() == '#')) s.pop_back();
    if (s == want) return m;
  }
  throw ParseError("no legal move '" + std::string(text) + "' in " + fen());
}

inline std::size_t ChessState::policy_slot(Move m) const {
  const bool flip = board_.side() == Black;
  const int from = flip ? m.from ^ 56 : m.from;
  const int to = flip ? m.to ^ 56 : m.to;
  const int df = file_of(to) - file_of(from), dr = rank_of(to) - rank_of(from);
  int plane;
  if (m.promo != NoPromo && m.promo != PromoQueen) {
    // Underpromotions: (capture toward a-file, push, capture toward h-file)
    // x (knight, bishop, rook).
    plane = 64 + (df + 1) * 3 + (m.promo - PromoKnight);
  } else if ((df * df + dr * dr) == 5) {
    constexpr int kKnight[5][5] = {{-1, 4, -1, 3, -1},
                                   {5, -1, -1, -1, 2},
                                   {-1, -1, -1, -1, -1},
                                   {6, -1, -1, -1, 1},
                                   {-1, 7, -1, 0, -1}};
    // Rows are dr = -2..2, columns df = -2..2; indices follow the knight
    // offset order (1,2),(2,1),(2,-1),(1,-2),(-1,-2),(-2,-1),(-2,1),(-1,2).
    plane = 56 + kKnight[dr + 2][df + 2];
  } else {
    const int dist = std::max(std::abs(df), std::abs(dr));
    const int sf = (df > 0) - (df < 0), sr = (dr > 0) - (dr < 0);
    int dir = 0;
    for (int d = 0; d < 8; ++d)
      if (detail::kDirFile[d] == sf && detail::kDirRank[d] == sr) dir = d;
    plane = dir * 7 + (dist - 1);
  }
  return static_cast<std::size_t>(from) * 73 + plane;
}

inline std::vector<float> ChessState::features() const {
  std::vector<float> f(kFeatureSize, 0.0f);
  const Color us = board_.side();
  const bool flip = us == Black;
  for (int sq = 0; sq < 64; ++sq) {
    const std::uint8_t p = board_.piece_at(sq);
    if (p == kNoPiece) continue;
    const int plane = (piece_color(p) == us ? 0 : 6) + piece_type(p);
    f[plane * 64 + (flip ? sq ^ 56 : sq)] = 1.0f;
  }
  f[768] = 1.0f;
  const std::uint8_t c = board_.castling();
  const bool own_k = c & (us == White ? WhiteKingside : BlackKingside);
  const bool own_q = c & (us == White ? WhiteQueenside : BlackQueenside);
  const bool opp_k = c & (us == White ? BlackKingside : WhiteKingside);
  const bool opp_q = c & (us == White ? BlackQueenside : WhiteQueenside);
  f[769] = own_k;
  f[770] = own_q;
  f[771] = opp_k;
  f[772] = opp_q;
  if (board_.ep_square() >= 0) f[773 + file_of(board_.ep_square())] = 1.0f;
  return f;
}

/// Leaf count of the legal move tree. Draw rules are ignored, as usual for
/// move generator verification.
inline std::uint64_t perft(const Board& b, int depth) {
  if (depth <= 0) return 1;
  MoveList list;
  b.legal_moves(list);
  if (depth == 1) return list.size;
  std::uint64_t n = 0;
  for (const Move& m : list) n += perft(b.make(m), depth - 1);
  return n;
}

}  // namespace sclab::chess

namespace sclab {
using chess::ChessState;
}  // namespace sclab
