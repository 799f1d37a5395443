#pragma once

// Closed self-play training loop at desk scale:
//   self-play batch -> replay buffer -> SGD steps -> N_scl controller.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/rng.hpp"
#include "sclab/eval/tinynet.hpp"
#include "sclab/search/config.hpp"
#include "sclab/selfplay/selfplay.hpp"

namespace sclab {

/// FIFO ring buffer of training examples.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {
    require(capacity > 0, "replay buffer capacity must be positive");
  }

  void push(TrainingExample ex) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(ex));
  }

  template <class Range>
  void push_all(Range&& examples) {
    for (auto& ex : examples) push(std::move(ex));
  }

  /// Uniform sampling with replacement.
  std::vector<TrainingExample> sample(std::size_t n, Rng& rng) const {
    if (items_.empty()) throw ContractError("sampling from an empty replay buffer");
    std::vector<TrainingExample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(items_[rng.below(items_.size())]);
    return out;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const TrainingExample& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::deque<TrainingExample> items_;
};

/// One SGD step on the mean batch loss. Returns the loss measured before the
/// update.
inline TinyNet::Loss train_step(TinyNet& net, std::span<const TrainingExample> batch,
                                double lr) {
  TinyNet grad;
  const auto loss = net.loss_and_gradient(batch, grad);
  if (lr != 0.0) net.apply_gradient(grad, lr);
  return loss;
}

struct TrainingSchedule {
  int iterations = 20;
  double target_ratio = 1.0;
  int games_per_iteration = 200;
  int steps_per_iteration = 200;
  int batch_size = 64;
  double learning_rate = 0.1;
  std::uint32_t visits = 256;
  std::uint64_t nscl = 5;
  /// Consecutive iterations with N_scl unchanged before N doubles.
  int plateau_window = 3;
  /// Upper bound on N after doublings.
  std::uint32_t max_visits = 4096;
  double c_puct = 1.5;
  TemperatureSchedule temperature = tau1_schedule();
  std::size_t buffer_capacity = 100000;
  std::size_t hidden_width = 64;
  int max_plies = kDefaultMaxPlies;
  unsigned workers = 1;
  /// When set, checkpoints are written as iter_NNN.tnet and the log as
  /// training_log.csv in this directory.
  std::optional<std::string> output_dir;

  void validate() const {
    require(iterations >= 0, "iterations must be >= 0");
    require(games_per_iteration >= 1, "games_per_iteration must be >= 1");
    require(steps_per_iteration >= 0, "steps_per_iteration must be >= 0");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(visits >= 1 && nscl >= 1, "visits and N_scl must be >= 1");
    require(plateau_window >= 1, "plateau_window must be >= 1");
    require(target_ratio > 0.0, "target_ratio must be positive");
  }
};

/// Visit budget and N_scl carried between iterations.
struct ControllerState {
  std::uint32_t visits = 256;
  std::uint64_t nscl = 5;
  int unchanged_streak = 0;
  bool doubled = false;  // N doubled on the last update

  friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

/// Multiplicative N_scl control toward `target_ratio`:
///   ratio > 1.25 target -> N_scl = min(2 N_scl, N)
///   ratio < 0.80 target -> N_scl = max(N_scl / 2, 1)
/// After `plateau_window` consecutive updates leaving N_scl unchanged, N
/// doubles (capped at `max_visits`) and the streak restarts.
inline ControllerState nscl_controller_update(double observed_ratio, ControllerState st,
                                              const TrainingSchedule& sched) {
  if (!(observed_ratio >= 0.0)) throw ContractError("observed ratio must be >= 0");
  st.nscl = std::min<std::uint64_t>(std::max<std::uint64_t>(st.nscl, 1), st.visits);
  const std::uint64_t before = st.nscl;
  if (observed_ratio > 1.25 * sched.target_ratio) {
    st.nscl = std::min<std::uint64_t>(st.nscl * 2, st.visits);
  } else if (observed_ratio < 0.8 * sched.target_ratio) {
    st.nscl = std::max<std::uint64_t>(st.nscl / 2, 1);
  }
  st.doubled = false;
  if (st.nscl == before) {
    if (++st.unchanged_streak >= sched.plateau_window) {
      st.visits = std::min(st.visits * 2, std::max(sched.max_visits, st.visits));
      st.doubled = true;
      st.unchanged_streak = 0;
    }
  } else {
    st.unchanged_streak = 0;
  }
  return st;
}

struct TrainingLogRow {
  int iter = 0;
  int games = 0;
  int w = 0, d = 0, l = 0;
  double ratio = 0.0;
  bool ratio_infinite = false;
  std::uint32_t visits = 0;
  std::uint64_t nscl = 0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
};

struct TrainingRun {
  /// checkpoints[0] is the untrained network; checkpoints[k] follows
  /// iteration k.
  std::vector<TinyNet> checkpoints;
  std::vector<TrainingLogRow> log;
};

inline std::string training_log_csv(const std::vector<TrainingLogRow>& rows) {
  std::ostringstream out;
  out << "iter,games,w,d,l,ratio,N,N_scl,policy_loss,value_loss\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.iter << ',' << r.games << ',' << r.w << ',' << r.d << ',' << r.l << ',';
    if (r.ratio_infinite) out << "inf";
    else out << r.ratio;
    out << ',' << r.visits << ',' << r.nscl << ',' << r.policy_loss << ',' << r.value_loss
        << '\n';
  }
  return out.str();
}

/// Fully determined by (schedule, start, base_seed); `workers` only changes
/// wall-clock time.
template <GameState S>
TrainingRun training_loop(const TrainingSchedule& sched, const S& start,
                          std::uint64_t base_seed) {
  sched.validate();
  TrainingRun run;
  TinyNet net = TinyNet::random_for<S>(sched.hidden_width, derive_seed(base_seed, 0x7e7));
  run.checkpoints.push_back(net);

  std::optional<std::filesystem::path> dir;
  if (sched.output_dir) {
    dir = std::filesystem::path(*sched.output_dir);
    std::filesystem::create_directories(*dir);
  }
  auto save = [&](const TinyNet& n, int iter) {
    if (!dir) return;
    std::ostringstream name;
    name << "iter_" << std::setw(3) << std::setfill('0') << iter << ".tnet";
    n.save_file((*dir / name.str()).string());
  };
  save(net, 0);

  ReplayBuffer buffer(sched.buffer_capacity);
  Rng sample_rng(derive_seed(base_seed, 0xb0f));
  ControllerState ctl{sched.visits, std::min<std::uint64_t>(sched.nscl, sched.visits), 0, false};

  for (int iter = 1; iter <= sched.iterations; ++iter) {
    SearchConfig cfg;
    cfg.c_puct = sched.c_puct;
    cfg.visits = ctl.visits;
    cfg.nscl = ctl.nscl;
    cfg.temperature = sched.temperature;

    TrainingLogRow row;
    row.iter = iter;
    row.visits = ctl.visits;
    row.nscl = ctl.nscl;
    {
      const NetEvaluator<S> evaluator(std::make_shared<const TinyNet>(net));
      const auto games =
          batch_selfplay(static_cast<std::size_t>(sched.games_per_iteration), start, evaluator,
                         cfg, derive_seed(base_seed, static_cast<std::uint64_t>(iter)),
                         sched.workers, sched.max_plies);
      for (const auto& g : games) {
        switch (g.outcome.value) {
          case OutcomeValue::P1Win: ++row.w; break;
          case OutcomeValue::P2Win: ++row.l; break;
          case OutcomeValue::Draw: ++row.d; break;
        }
        buffer.push_all(extract_training_examples(g));
      }
      row.games = static_cast<int>(games.size());
    }
    const auto stats = wdl_stats(row.w, row.d, row.l);
    row.ratio = stats.ratio;
    row.ratio_infinite = stats.ratio_infinite;

    TinyNet::Loss sum;
    for (int step = 0; step < sched.steps_per_iteration; ++step) {
      const auto batch = buffer.sample(static_cast<std::size_t>(sched.batch_size), sample_rng);
      const auto loss = train_step(net, batch, sched.learning_rate);
      sum.policy += loss.policy;
      sum.value += loss.value;
    }
    if (sched.steps_per_iteration > 0) {
      row.policy_loss = sum.policy / sched.steps_per_iteration;
      row.value_loss = sum.value / sched.steps_per_iteration;
    }

    ctl = nscl_controller_update(stats.ratio_infinite ? 1e300 : stats.ratio, ctl, sched);
    run.checkpoints.push_back(net);
    run.log.push_back(row);
    save(net, iter);
  }
  if (dir) {
    std::ofstream log(*dir / "training_log.csv", std::ios::binary);
    log << training_log_csv(run.log);
  }
  return run;
}

}  // namespace sclab
