#pragma once

#include <memory>
#include <vector>

#include "sclab/cli/config.hpp"
#include "sclab/eval/evaluation.hpp"
#include "sclab/eval/heuristic.hpp"
#include "sclab/eval/tinynet.hpp"
#include "sclab/games/chess.hpp"

namespace sclab {

/// Builds the evaluator named by `cfg.evaluator`. Configuration mistakes
/// raise ConfigError.
template <GameState S>
std::unique_ptr<Evaluator<S>> make_evaluator(const RunConfig& cfg) {
  std::string kind = cfg.evaluator;
  if (kind == "auto") kind = std::same_as<S, ChessState> ? "heuristic" : "uniform";
  if (kind == "uniform") return std::make_unique<UniformEvaluator<S>>();
  if (kind == "heuristic") {
    if constexpr (std::same_as<S, ChessState>) {
      return std::make_unique<HeuristicEvaluator>();
    } else {
      throw UnsupportedGameError("the heuristic evaluator only supports chess");
    }
  }
  if (kind == "net") {
    if (cfg.checkpoint.empty()) throw ConfigError("checkpoint", 0, "evaluator = net needs a checkpoint");
    auto net = std::make_shared<const TinyNet>(TinyNet::load_file(cfg.checkpoint));
    if (net->game() != S::kGameId)
      throw ConfigError("checkpoint", 0, "checkpoint was trained for a different game");
    return std::make_unique<NetEvaluator<S>>(std::move(net));
  }
  throw ConfigError("evaluator", 0, "unknown evaluator '" + kind + "'");
}

/// Start positions from `cfg.start`, or the standard start when empty.
template <GameState S>
std::vector<S> start_states(const RunConfig& cfg) {
  std::vector<S> out;
  for (const auto& text : cfg.start_positions()) {
    try {
      out.push_back(S::parse(text));
    } catch (const std::exception& e) {
      throw ConfigError("start", 0, std::string("bad start position: ") + e.what());
    }
  }
  if (out.empty()) out.push_back(S::initial());
  return out;
}

}  // namespace sclab
