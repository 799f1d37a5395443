#pragma once

#include <cstdint>
#include <vector>

namespace sclab {

/// One position's training target. The policy target is stored sparsely:
/// `slots[i]` is the network output index of the i-th legal action and
/// `policy[i]` its target probability. `value` is the game result from the
/// position's side to move (-1, 0 or +1).
struct TrainingExample {
  std::vector<float> features;
  std::vector<std::uint32_t> slots;
  std::vector<double> policy;
  double value = 0.0;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

}  // namespace sclab
