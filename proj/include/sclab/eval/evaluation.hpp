#pragma once

#include <span>
#include <string>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/game.hpp"

namespace sclab {

/// Policy/value output for one state. `priors` is aligned with the legal
/// action list the evaluator was given; `value` is from the side to move.
struct Evaluation {
  std::vector<double> priors;
  double value = 0.0;
};

template <GameState S>
class Evaluator {
 public:
  using Action = typename S::Action;

  virtual ~Evaluator() = default;

  virtual Evaluation evaluate(const S& state, std::span<const Action> legal) const = 0;
  virtual std::string name() const = 0;

  Evaluation evaluate(const S& state) const {
    if (state.terminal()) throw ContractError("cannot evaluate a terminal state");
    const auto legal = state.legal_actions();
    return evaluate(state, legal);
  }
};

template <GameState S>
class UniformEvaluator final : public Evaluator<S> {
 public:
  using typename Evaluator<S>::Action;
  using Evaluator<S>::evaluate;

  Evaluation evaluate(const S&, std::span<const Action> legal) const override {
    if (legal.empty()) throw ContractError("uniform evaluator needs a non-terminal state");
    return {std::vector<double>(legal.size(), 1.0 / static_cast<double>(legal.size())), 0.0};
  }
  std::string name() const override { return "uniform"; }
};

}  // namespace sclab
