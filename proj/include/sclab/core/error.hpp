#pragma once

#include <stdexcept>
#include <string>

namespace sclab {

/// Raised when a caller violates an operation's precondition.
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Malformed textual input (FEN, PGN, move text, checkpoint files).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class UnsupportedGameError : public std::runtime_error {
 public:
  explicit UnsupportedGameError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Raised by training when a loss component stops being finite.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace sclab
