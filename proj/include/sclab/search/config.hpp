#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sclab/core/error.hpp"

namespace sclab {

/// N_scl value meaning "never freeze" (plain PUCT).
inline constexpr std::uint64_t kNsclInfinite = std::numeric_limits<std::uint64_t>::max();

/// Piecewise-constant temperature by ply: each (threshold, tau) entry applies
/// from its threshold ply (0-based) until the next entry's threshold. Plies
/// before the first threshold use the first tau.
class TemperatureSchedule {
 public:
  using Step = std::pair<int, double>;

  TemperatureSchedule() : steps_{{0, 0.0}} {}
  TemperatureSchedule(std::initializer_list<Step> steps) : steps_(steps) { validate(); }
  explicit TemperatureSchedule(std::vector<Step> steps) : steps_(std::move(steps)) {
    validate();
  }

  static TemperatureSchedule constant(double tau) { return TemperatureSchedule{{0, tau}}; }

  double at(int ply) const {
    double tau = steps_.front().second;
    for (const auto& [threshold, t] : steps_) {
      if (ply >= threshold) tau = t;
      else break;
    }
    return tau;
  }

  const std::vector<Step>& steps() const { return steps_; }

  /// "0:1.0,8:0" form, as used in config files.
  std::string to_string() const {
    std::string s;
    for (const auto& [threshold, tau] : steps_) {
      if (!s.empty()) s += ',';
      s += std::to_string(threshold) + ':' + format_real(tau);
    }
    return s;
  }

  friend bool operator==(const TemperatureSchedule&, const TemperatureSchedule&) = default;

 private:
  static std::string format_real(double x) {
    std::string s = std::to_string(x);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  void validate() const {
    if (steps_.empty()) throw ContractError("temperature schedule is empty");
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      if (steps_[i].second < 0.0) throw ContractError("temperature must be >= 0");
      if (i > 0 && steps_[i].first <= steps_[i - 1].first)
        throw ContractError("temperature thresholds must be strictly increasing");
    }
  }

  std::vector<Step> steps_;
};

/// tau = 1.0 for the first 8 plies, then greedy.
inline TemperatureSchedule tau1_schedule() { return {{0, 1.0}, {8, 0.0}}; }
/// tau = 1.2 for the first 30 plies, then 0.15.
inline TemperatureSchedule tau2_schedule() { return {{0, 1.2}, {30, 0.15}}; }

struct DirichletNoise {
  double alpha = 0.3;
  double fraction = 0.25;
  friend bool operator==(const DirichletNoise&, const DirichletNoise&) = default;
};

struct SearchConfig {
  double c_puct = 1.5;
  /// Total playouts per search, including the one that expands the root.
  std::uint32_t visits = 1000;
  std::uint64_t nscl = kNsclInfinite;
  TemperatureSchedule temperature = tau1_schedule();
  std::uint64_t seed = 0;
  std::optional<DirichletNoise> noise;
  /// Q used for edges that have never been visited.
  double fpu = 0.0;

  void validate() const {
    if (!(c_puct > 0.0)) throw ContractError("c_puct must be positive");
    if (visits < 1) throw ContractError("search needs at least one visit");
    if (nscl < 1) throw ContractError("N_scl must be positive");
    if (noise && (noise->alpha <= 0.0 || noise->fraction < 0.0 || noise->fraction > 1.0))
      throw ContractError("bad Dirichlet noise parameters");
  }

  friend bool operator==(const SearchConfig&, const SearchConfig&) = default;
};

}  // namespace sclab
