#pragma once

// Single-hidden-layer policy/value network with manual backpropagation.
//
//   h = tanh(W1 x + b1)
//   logits = Wp h + bp        (softmax restricted to legal slots)
//   v = tanh(wv . h + bv)
//
// Loss per example: cross-entropy(target policy, softmax) + (z - v)^2,
// averaged over the batch.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/game.hpp"
#include "sclab/core/rng.hpp"
#include "sclab/eval/evaluation.hpp"
#include "sclab/selfplay/training_example.hpp"

namespace sclab {

class TinyNet {
 public:
  static constexpr std::uint32_t kVersion = 1;
  static constexpr char kMagic[4] = {'T', 'N', 'E', 'T'};

  struct Loss {
    double policy = 0.0;
    double value = 0.0;
    double total() const { return policy + value; }
  };

  struct Forward {
    std::vector<double> hidden;
    std::vector<double> policy;  // over the given legal slots
    double value = 0.0;
  };

  TinyNet() = default;

  TinyNet(GameId game, std::size_t inputs, std::size_t hidden, std::size_t actions)
      : game_(game),
        inputs_(inputs),
        hidden_(hidden),
        actions_(actions),
        w1_(hidden * inputs, 0.0),
        b1_(hidden, 0.0),
        wp_(actions * hidden, 0.0),
        bp_(actions, 0.0),
        wv_(hidden, 0.0),
        bv_(0.0) {
    require(inputs > 0 && hidden > 0 && actions > 0, "network dimensions must be positive");
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static TinyNet random(GameId game, std::size_t inputs, std::size_t hidden,
                        std::size_t actions, std::uint64_t seed) {
    TinyNet net(game, inputs, hidden, actions);
    Rng rng(seed);
    auto fill = [&rng](std::vector<double>& v, std::size_t fan_in) {
      const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (double& w : v) w = (2.0 * rng.uniform() - 1.0) * s;
    };
    fill(net.w1_, inputs);
    fill(net.wp_, hidden);
    fill(net.wv_, hidden);
    return net;
  }

  template <GameState S>
  static TinyNet random_for(std::size_t hidden, std::uint64_t seed) {
    return random(S::kGameId, S::kFeatureSize, hidden, S::kPolicySize, seed);
  }

  GameId game() const { return game_; }
  std::size_t input_size() const { return inputs_; }
  std::size_t hidden_size() const { return hidden_; }
  std::size_t action_size() const { return actions_; }
  std::size_t parameter_count() const {
    return w1_.size() + b1_.size() + wp_.size() + bp_.size() + wv_.size() + 1;
  }

  /// Visits every parameter in checkpoint order: W1, b1, Wp, bp, wv, bv.
  template <class F>
  void for_each_parameter(F&& f) {
    for (double& x : w1_) f(x);
    for (double& x : b1_) f(x);
    for (double& x : wp_) f(x);
    for (double& x : bp_) f(x);
    for (double& x : wv_) f(x);
    f(bv_);
  }
  template <class F>
  void for_each_parameter(F&& f) const {
    const_cast<TinyNet*>(this)->for_each_parameter(
        [&f](double& x) { f(static_cast<const double&>(x)); });
  }

  Forward forward(std::span<const float> x, std::span<const std::uint32_t> slots) const {
    if (x.size() != inputs_)
      throw ContractError("feature length " + std::to_string(x.size()) +
                          " does not match network input " + std::to_string(inputs_));
    Forward out;
    out.hidden.assign(b1_.begin(), b1_.end());
    // Features are sparse and binary-valued in practice.
    for (std::size_t i = 0; i < inputs_; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      for (std::size_t j = 0; j < hidden_; ++j) out.hidden[j] += w1_[j * inputs_ + i] * xi;
    }
    for (double& h : out.hidden) h = std::tanh(h);

    out.policy.resize(slots.size());
    double max_logit = -1e300;
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (slots[k] >= actions_) throw ContractError("policy slot out of range");
      const double* row = &wp_[static_cast<std::size_t>(slots[k]) * hidden_];
      double z = bp_[slots[k]];
      for (std::size_t j = 0; j < hidden_; ++j) z += row[j] * out.hidden[j];
      out.policy[k] = z;
      max_logit = std::max(max_logit, z);
    }
    double sum = 0.0;
    for (double& p : out.policy) sum += (p = std::exp(p - max_logit));
    for (double& p : out.policy) p /= sum;

    double v = bv_;
    for (std::size_t j = 0; j < hidden_; ++j) v += wv_[j] * out.hidden[j];
    out.value = std::tanh(v);
    return out;
  }

  Loss loss(std::span<const TrainingExample> batch) const {
    return accumulate(batch, nullptr);
  }

  /// Mean batch loss; writes d(loss)/d(parameter) into `grad`, which must have
  /// the same shape as this network.
  Loss loss_and_gradient(std::span<const TrainingExample> batch, TinyNet& grad) const {
    grad = TinyNet(game_, inputs_, hidden_, actions_);
    return accumulate(batch, &grad);
  }

  /// params -= lr * grad
  void apply_gradient(const TinyNet& grad, double lr) {
    require(grad.w1_.size() == w1_.size() && grad.wp_.size() == wp_.size(),
            "gradient shape mismatch");
    auto step = [lr](std::vector<double>& p, const std::vector<double>& g) {
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    };
    step(w1_, grad.w1_);
    step(b1_, grad.b1_);
    step(wp_, grad.wp_);
    step(bp_, grad.bp_);
    step(wv_, grad.wv_);
    bv_ -= lr * grad.bv_;
  }

  // Checkpoint layout, all integers uint32 little-endian, all parameters
  // IEEE-754 binary64 little-endian:
  //   "TNET" | version | game id | inputs | hidden | actions |
  //   W1[hidden][inputs] | b1[hidden] | Wp[actions][hidden] | bp[actions] |
  //   wv[hidden] | bv
  void save(std::ostream& out) const {
    out.write(kMagic, 4);
    for (std::uint32_t v : {kVersion, static_cast<std::uint32_t>(game_),
                            static_cast<std::uint32_t>(inputs_),
                            static_cast<std::uint32_t>(hidden_),
                            static_cast<std::uint32_t>(actions_)})
      write_u32(out, v);
    for_each_parameter([&out](const double& x) { write_f64(out, x); });
    if (!out) throw std::runtime_error("failed writing network checkpoint");
  }

  static TinyNet load(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not a TNET checkpoint");
    const std::uint32_t version = read_u32(in);
    if (version != kVersion)
      throw ParseError("unsupported checkpoint version " + std::to_string(version));
    const std::uint32_t game = read_u32(in);
    if (game > static_cast<std::uint32_t>(GameId::Chess)) throw ParseError("bad game id");
    const std::uint32_t inputs = read_u32(in), hidden = read_u32(in), actions = read_u32(in);
    if (inputs == 0 || hidden == 0 || actions == 0 || hidden > (1u << 16))
      throw ParseError("bad checkpoint dimensions");
    TinyNet net(static_cast<GameId>(game), inputs, hidden, actions);
    net.for_each_parameter([&in](double& x) { x = read_f64(in); });
    if (!in) throw ParseError("truncated checkpoint");
    return net;
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save(out);
  }

  static TinyNet load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    return load(in);
  }

  friend bool operator==(const TinyNet&, const TinyNet&) = default;

 private:
  Loss accumulate(std::span<const TrainingExample> batch, TinyNet* grad) const {
    if (batch.empty()) throw ContractError("training batch is empty");
    Loss total;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    std::vector<double> dh(hidden_);
    for (const TrainingExample& ex : batch) {
      const Forward f = forward(ex.features, ex.slots);
      double ce = 0.0;
      for (std::size_t k = 0; k < ex.slots.size(); ++k)
        if (ex.policy[k] > 0.0) ce -= ex.policy[k] * std::log(std::max(f.policy[k], 1e-300));
      const double err = ex.value - f.value;
      total.policy += ce * inv_n;
      total.value += err * err * inv_n;
      if (!grad) continue;

      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t k = 0; k < ex.slots.size(); ++k) {
        const double dlogit = (f.policy[k] - ex.policy[k]) * inv_n;
        const std::size_t row = static_cast<std::size_t>(ex.slots[k]) * hidden_;
        grad->bp_[ex.slots[k]] += dlogit;
        for (std::size_t j = 0; j < hidden_; ++j) {
          grad->wp_[row + j] += dlogit * f.hidden[j];
          dh[j] += dlogit * wp_[row + j];
        }
      }
      const double dv = -2.0 * err * (1.0 - f.value * f.value) * inv_n;
      grad->bv_ += dv;
      for (std::size_t j = 0; j < hidden_; ++j) {
        grad->wv_[j] += dv * f.hidden[j];
        dh[j] += dv * wv_[j];
      }
      for (std::size_t j = 0; j < hidden_; ++j) {
        const double dpre = dh[j] * (1.0 - f.hidden[j] * f.hidden[j]);
        grad->b1_[j] += dpre;
        if (dpre == 0.0) continue;
        for (std::size_t i = 0; i < inputs_; ++i) {
          const double xi = ex.features[i];
          if (xi != 0.0) grad->w1_[j * inputs_ + i] += dpre * xi;
        }
      }
    }
    if (!std::isfinite(total.policy) || !std::isfinite(total.value))
      throw NumericError("non-finite loss (policy " + std::to_string(total.policy) +
                         ", value " + std::to_string(total.value) + ")");
    return total;
  }

  static void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  static void write_f64(std::ostream& out, double x) {
    const auto v = std::bit_cast<std::uint64_t>(x);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  static std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4] = {};
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  static double read_f64(std::istream& in) {
    unsigned char b[8] = {};
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
  }

  GameId game_ = GameId::TicTacToe;
  std::size_t inputs_ = 0, hidden_ = 0, actions_ = 0;
  std::vector<double> w1_, b1_, wp_, bp_, wv_;
  double bv_ = 0.0;
};

/// Evaluator backed by a TinyNet. Shares ownership of the network so that
/// self-play workers can hold it without copying.
template <GameState S>
class NetEvaluator final : public Evaluator<S> {
 public:
  using typename Evaluator<S>::Action;
  using Evaluator<S>::evaluate;

  explicit NetEvaluator(std::shared_ptr<const TinyNet> net) : net_(std::move(net)) {
    require(net_ != nullptr, "null network");
    if (net_->game() != S::kGameId)
      throw ContractError(std::string("network was built for ") + game_name(net_->game()));
    require(net_->input_size() == S::kFeatureSize && net_->action_size() == S::kPolicySize,
            "network dimensions do not match the game encoding");
  }

  Evaluation evaluate(const S& s, std::span<const Action> legal) const override {
    if (legal.empty()) throw ContractError("network evaluator needs a non-terminal state");
    std::vector<std::uint32_t> slots(legal.size());
    for (std::size_t i = 0; i < legal.size(); ++i)
      slots[i] = static_cast<std::uint32_t>(s.policy_slot(legal[i]));
    const auto features = s.features();
    auto f = net_->forward(features, slots);
    return {std::move(f.policy), f.value};
  }

  std::string name() const override { return "net"; }
  const TinyNet& net() const { return *net_; }

 private:
  std::shared_ptr<const TinyNet> net_;
};

}  // namespace sclab
