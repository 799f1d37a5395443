#pragma once

// Monte Carlo tree search with PUCT selection and the search-contempt
// extension.
//
// Depth parity is measured from the root (even = side to move at the root).
// Even-depth nodes always select by PUCT. An odd-depth node selects by PUCT
// until the visits below it reach N_scl; at that exact point its child visit
// counts are snapshotted ("frozen"), and every later visit samples a child
// with probability frozen_count / N_scl.
//
// Values are negamax: every stored value_sum is from the point of view of the
// player to move at the edge's parent node.
//
// Random stream consumption, in order: Dirichlet root noise (one gamma draw
// per root edge, in action order) if enabled; one draw per frozen-node
// selection, in playout order; one draw for sampling the played move when
// tau > 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "sclab/core/error.hpp"
#include "sclab/core/game.hpp"
#include "sclab/core/rng.hpp"
#include "sclab/eval/evaluation.hpp"
#include "sclab/search/config.hpp"

namespace sclab {

template <class A>
struct SearchEdge {
  A action{};
  double prior = 0.0;
  std::uint32_t visits = 0;
  double value_sum = 0.0;
  /// N_scl(s, a); meaningful only when the parent node is frozen.
  std::uint32_t frozen_count = 0;
  std::int32_t child = -1;

  double q(double fpu) const { return visits > 0 ? value_sum / visits : fpu; }
};

template <GameState S>
struct SearchNode {
  explicit SearchNode(S s) : state(std::move(s)) {}

  S state;
  std::uint32_t first_edge = 0;
  std::uint32_t num_edges = 0;
  std::uint32_t total_child_visits = 0;
  /// Sum of the frozen counts; equals N_scl once frozen.
  std::uint32_t frozen_total = 0;
  std::uint8_t depth_parity = 0;
  bool expanded = false;
  bool frozen = false;
  std::optional<double> terminal_value;
  double raw_value = 0.0;
};

template <GameState S>
struct SearchTree {
  using Action = typename S::Action;
  using Edge = SearchEdge<Action>;
  using Node = SearchNode<S>;

  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::span<Edge> edges_of(const Node& n) {
    return std::span<Edge>(edges).subspan(n.first_edge, n.num_edges);
  }
  std::span<const Edge> edges_of(const Node& n) const {
    return std::span<const Edge>(edges).subspan(n.first_edge, n.num_edges);
  }
  const Node& root() const { return nodes.front(); }
};

template <GameState S>
struct SearchResult {
  using Action = typename S::Action;

  std::vector<Action> actions;
  std::vector<std::uint32_t> visit_counts;
  std::vector<double> q;
  std::vector<double> policy;
  Action chosen_action{};
  std::size_t chosen_index = 0;
  double temperature = 0.0;
  /// Visit-weighted mean of the root edge values (side to move at the root).
  double root_value = 0.0;
  /// Evaluator value of the root position.
  double raw_value = 0.0;
  std::uint32_t playouts = 0;
};

/// argmax over edges of Q + c_puct * P * sqrt(total) / (1 + N); unvisited
/// edges use `fpu` for Q. Ties go to the earliest edge.
template <class A>
std::size_t select_child_puct(std::span<const SearchEdge<A>> edges,
                              std::uint32_t total_child_visits, double c_puct, double fpu) {
  if (edges.empty()) throw ContractError("PUCT selection on a node without edges");
  const double sqrt_total = std::sqrt(static_cast<double>(total_child_visits));
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const double u = c_puct * e.prior * sqrt_total / (1.0 + e.visits);
    const double score = e.q(fpu) + u;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

template <GameState S>
std::size_t select_child_puct(const SearchTree<S>& tree, const SearchNode<S>& node,
                              const SearchConfig& cfg) {
  if (node.depth_parity == 1 && node.frozen && node.total_child_visits > cfg.nscl)
    throw ContractError("PUCT selection on a node past its N_scl threshold");
  return select_child_puct(tree.edges_of(node), node.total_child_visits, cfg.c_puct, cfg.fpu);
}

/// Snapshots N_scl(s, a) := N(s, a) when the node's child visits equal N_scl
/// exactly. Returns true if the node froze on this call.
template <GameState S>
bool maybe_freeze(SearchTree<S>& tree, SearchNode<S>& node, std::uint64_t nscl) {
  if (node.depth_parity != 1) throw ContractError("only odd-depth nodes can freeze");
  if (node.frozen || node.total_child_visits != nscl) return false;
  for (auto& e : tree.edges_of(node)) e.frozen_count = e.visits;
  node.frozen_total = node.total_child_visits;
  node.frozen = true;
  return true;
}

/// Samples an edge with probability frozen_count / N_scl.
template <GameState S>
std::size_t select_child_frozen(const SearchTree<S>& tree, const SearchNode<S>& node,
                                Rng& rng) {
  if (!node.frozen) throw ContractError("frozen selection on an unfrozen node");
  if (node.total_child_visits <= node.frozen_total)
    throw ContractError("frozen selection before the node passed N_scl");
  const auto edges = tree.edges_of(node);
  std::uint64_t r = rng.below(node.frozen_total);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (r < edges[i].frozen_count) return i;
    r -= edges[i].frozen_count;
  }
  throw ContractError("frozen counts do not sum to the frozen total");
}

/// pi(a) proportional to N(a)^(1/tau); tau = 0 is a point mass on the most
/// visited action (earliest on ties).
inline std::vector<double> move_policy(std::span<const std::uint32_t> counts, double tau) {
  if (tau < 0.0) throw ContractError("temperature must be >= 0");
  if (counts.empty()) throw ContractError("move policy needs at least one action");
  const auto max_it = std::max_element(counts.begin(), counts.end());
  if (*max_it == 0) throw ContractError("move policy needs a visited action");
  std::vector<double> pi(counts.size(), 0.0);
  if (tau == 0.0) {
    pi[static_cast<std::size_t>(max_it - counts.begin())] = 1.0;
    return pi;
  }
  const double log_max = std::log(static_cast<double>(*max_it));
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    pi[i] = std::exp((std::log(static_cast<double>(counts[i])) - log_max) / tau);
    sum += pi[i];
  }
  for (double& p : pi) p /= sum;
  return pi;
}

/// Index drawn from `probs` with one uniform variate.
inline std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

struct PathStep {
  std::uint32_t node;
  std::uint32_t edge;  // index into tree.edges
};

/// Propagates a leaf value (from the leaf's side to move) to the root,
/// negating once per ply.
template <GameState S>
void backup(SearchTree<S>& tree, std::span<const PathStep> path, double leaf_value) {
  double v = leaf_value;
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    v = -v;
    auto& edge = tree.edges[it->edge];
    edge.visits += 1;
    edge.value_sum += v;
    tree.nodes[it->node].total_child_visits += 1;
  }
}

namespace detail {
template <class S>
S apply_trusted(const S& s, const typename S::Action& a) {
  if constexpr (requires { s.apply_unchecked(a); }) {
    return s.apply_unchecked(a);
  } else {
    return s.apply(a);
  }
}
}  // namespace detail

/// One search over a fresh tree.
template <GameState S>
class Search {
 public:
  using Action = typename S::Action;
  using Tree = SearchTree<S>;

  Search(const Evaluator<S>& evaluator, SearchConfig cfg)
      : evaluator_(evaluator), cfg_(std::move(cfg)), rng_(cfg_.seed) {
    cfg_.validate();
  }

  /// Optional per-playout trace: playout index, path, leaf value, freezes.
  void set_trace(std::ostream* out) { trace_ = out; }

  SearchResult<S> run(const S& root) {
    if (root.terminal()) throw ContractError("cannot search a terminal position");
    tree_ = Tree{};
    tree_.nodes.reserve(cfg_.visits + 1);
    rng_ = Rng(cfg_.seed);
    tree_.nodes.push_back(SearchNode<S>{root});
    for (std::uint32_t k = 0; k < cfg_.visits; ++k) playout(k);
    return collect(root);
  }

  const Tree& tree() const { return tree_; }
  Tree& tree() { return tree_; }
  Rng& rng() { return rng_; }
  const SearchConfig& config() const { return cfg_; }

 private:
  void playout(std::uint32_t k) {
    path_.clear();
    std::uint32_t idx = 0;
    double leaf;
    std::vector<std::uint32_t> froze;
    for (;;) {
      auto& node = tree_.nodes[idx];
      if (node.terminal_value) {
        leaf = *node.terminal_value;
        break;
      }
      if (!node.expanded) {
        leaf = expand(idx);
        break;
      }
      std::size_t choice;
      if (node.depth_parity == 1) {
        if (maybe_freeze(tree_, node, cfg_.nscl) && trace_) froze.push_back(idx);
        if (node.frozen && node.total_child_visits > cfg_.nscl)
          choice = select_child_frozen(tree_, node, rng_);
        else
          choice = select_child_puct(tree_, node, cfg_);
      } else {
        choice = select_child_puct(tree_, node, cfg_);
      }
      const std::uint32_t edge_idx = node.first_edge + static_cast<std::uint32_t>(choice);
      path_.push_back({idx, edge_idx});
      auto& edge = tree_.edges[edge_idx];
      if (edge.child < 0) {
        SearchNode<S> child{detail::apply_trusted(node.state, edge.action)};
        child.depth_parity = node.depth_parity ^ 1;
        const auto child_idx = static_cast<std::int32_t>(tree_.nodes.size());
        edge.child = child_idx;  // before push_back: `node`/`edge` refs die there
        tree_.nodes.push_back(std::move(child));
      }
      idx = static_cast<std::uint32_t>(tree_.edges[edge_idx].child);
    }
    backup<S>(tree_, path_, leaf);
    if (trace_) write_trace(k, leaf, froze);
  }

  double expand(std::uint32_t idx) {
    auto& node = tree_.nodes[idx];
    const auto legal = node.state.legal_actions();
    if (legal.empty()) {
      const auto outcome = node.state.terminal();
      if (!outcome) throw ContractError("state has no legal actions but no outcome");
      node.terminal_value = outcome->value_for(node.state.side_to_move());
      return *node.terminal_value;
    }
    Evaluation eval = evaluator_.evaluate(node.state, legal);
    if (eval.priors.size() != legal.size())
      throw ContractError("evaluator returned the wrong number of priors");
    if (idx == 0 && cfg_.noise) add_noise(eval.priors);
    node.first_edge = static_cast<std::uint32_t>(tree_.edges.size());
    node.num_edges = static_cast<std::uint32_t>(legal.size());
    for (std::size_t i = 0; i < legal.size(); ++i) {
      SearchEdge<Action> e;
      e.action = legal[i];
      e.prior = eval.priors[i];
      tree_.edges.push_back(e);
    }
    node.expanded = true;
    node.raw_value = eval.value;
    return eval.value;
  }

  void add_noise(std::vector<double>& priors) {
    std::vector<double> eta(priors.size());
    double sum = 0.0;
    for (double& x : eta) sum += (x = rng_.gamma(cfg_.noise->alpha));
    if (sum <= 0.0) return;
    const double f = cfg_.noise->fraction;
    for (std::size_t i = 0; i < priors.size(); ++i)
      priors[i] = (1.0 - f) * priors[i] + f * eta[i] / sum;
  }

  SearchResult<S> collect(const S& root) {
    const auto& node = tree_.nodes.front();
    const auto edges = tree_.edges_of(node);
    SearchResult<S> r;
    r.playouts = cfg_.visits;
    r.raw_value = node.raw_value;
    r.temperature = cfg_.temperature.at(root.ply());
    double w = 0.0;
    for (const auto& e : edges) {
      r.actions.push_back(e.action);
      r.visit_counts.push_back(e.visits);
      r.q.push_back(e.q(cfg_.fpu));
      w += e.value_sum;
    }
    r.root_value = node.total_child_visits > 0 ? w / node.total_child_visits : node.raw_value;
    if (node.total_child_visits == 0) {
      // Single-playout search: fall back to the highest prior.
      r.policy.assign(edges.size(), 0.0);
      std::size_t best = 0;
      for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i].prior > edges[best].prior) best = i;
      r.policy[best] = 1.0;
      r.chosen_index = best;
    } else {
      r.policy = move_policy(r.visit_counts, r.temperature);
      r.chosen_index = r.temperature == 0.0
                           ? static_cast<std::size_t>(
                                 std::max_element(r.policy.begin(), r.policy.end()) -
                                 r.policy.begin())
                           : sample_index(r.policy, rng_);
    }
    r.chosen_action = r.actions[r.chosen_index];
    return r;
  }

  void write_trace(std::uint32_t k, double leaf, const std::vector<std::uint32_t>& froze) {
    auto& out = *trace_;
    out << k << " path=";
    for (std::size_t i = 0; i < path_.size(); ++i) {
      if (i) out << ',';
      const auto& parent = tree_.nodes[path_[i].node];
      out << parent.state.action_text(tree_.edges[path_[i].edge].action);
    }
    out << " leaf=" << leaf;
    for (auto n : froze) out << " freeze=node" << n;
    out << '\n';
  }

  const Evaluator<S>& evaluator_;
  SearchConfig cfg_;
  Rng rng_;
  Tree tree_;
  std::vector<PathStep> path_;
  std::ostream* trace_ = nullptr;
};

template <GameState S>
SearchResult<S> run_search(const S& root, const Evaluator<S>& evaluator,
                           const SearchConfig& cfg) {
  return Search<S>(evaluator, cfg).run(root);
}

}  // namespace sclab
