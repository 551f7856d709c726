#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hueplan/colormap.hpp"
#include "hueplan/environment.hpp"
#include "hueplan/preference.hpp"
#include "hueplan/reward.hpp"

namespace hueplan {

struct QLearningConfig {
  double initial_q = 100.0;
  double epsilon = 0.1;
  double alpha = 0.1;
  double gamma = 1.0;
  std::size_t episodes = 10000;
  /// Probability that the chosen successor is the one reached.
  double success_probability = 0.95;
  /// Reward for an episode that strands in a dead end.
  double dead_end_penalty = -100.0;
  /// Wall-clock cap in seconds, 0 for none. Hitting it makes the result depend on machine speed.
  double time_budget = 0.0;

  void validate() const;
};

/// Action values keyed by graph edge: row s holds one entry per successor of s.
class QTable {
 public:
  QTable(const ColorGraph& graph, double initial);

  double& at(NodeId s, std::size_t action) { return q_.at(s).at(action); }
  double at(NodeId s, std::size_t action) const { return q_.at(s).at(action); }
  std::span<const double> row(NodeId s) const { return q_.at(s); }
  /// Max over the actions of s; 0 when s has none (the absorbing black state).
  double max_value(NodeId s) const;
  std::size_t entry_count() const;
  void erase(NodeId s, std::size_t action);

 private:
  std::vector<std::vector<double>> q_;
};

/// Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a')).
void q_update(QTable& q, NodeId s, std::size_t action, double reward, NodeId next, double alpha,
              double gamma);

struct Episode {
  std::vector<NodeId> nodes;
  double reward = 0.0;
  bool completed = false;
};

/// Objective and hyperparameters shared by every episode of a search.
struct SearchContext {
  const RewardModel& reward;
  Weights theta;
  QLearningConfig config;
};

/// One epsilon-greedy rollout from white with noisy transitions, updating `q`
/// after every step. A dead end removes the edge into it from `graph`.
Episode run_episode(ColorGraph& graph, const SearchContext& ctx, QTable& q, Rng& rng);

struct CriteriaReport {
  bool novel = false;
  bool passes_seed = false;
  bool in_gamut = false;
  bool ok() const { return novel && passes_seed && in_gamut; }
};

/// Criteria 1-3 for a completed white -> black path; criterion 4 (best reward)
/// belongs to the search loop.
CriteriaReport check_criteria(std::span<const NodeId> nodes, const ColorGraph& graph,
                              const std::set<std::vector<NodeId>>& corpus_paths);

struct SearchResult {
  std::optional<Trajectory> best;
  std::optional<ContinuousColormap> colormap;
  /// Total episode reward of `best` (landing reward included).
  double best_reward = -std::numeric_limits<double>::infinity();
  std::vector<double> episode_rewards;
  /// Best qualifying reward after each episode (-inf until one qualifies).
  std::vector<double> best_so_far;
  /// Stopped early by the time budget.
  bool timed_out = false;
};

SearchResult search(const ColorGraph& graph, const RewardModel& reward, const Weights& theta,
                    const QLearningConfig& config, std::span<const Trajectory> corpus,
                    std::uint64_t rng_seed);

struct PlannerVariant {
  std::string name;
  double initial_q;
  double epsilon;
};

/// Optimistic (Q0=100, eps=0.1), random (Q0=0, eps=1), traditional (Q0=0, eps=0.1).
std::vector<PlannerVariant> standard_variants();

struct BenchmarkRow {
  std::string variant;
  std::string theta_id;
  std::size_t repetition = 0;
  /// Best episode reward minus the landing reward; NaN when nothing qualified.
  double best_reward = 0.0;
  std::vector<double> trace;
};

struct NamedWeights {
  std::string id;
  Weights theta;
};

/// For every theta and repetition, runs each variant from the same rng seed.
std::vector<BenchmarkRow> benchmark_variants(const ColorGraph& graph, const RewardModel& reward,
                                             std::span<const Trajectory> corpus,
                                             std::span<const NamedWeights> thetas,
                                             std::size_t repetitions, std::size_t episodes,
                                             std::uint64_t base_seed);

struct VariantSummary {
  std::string variant;
  double mean_best_reward = 0.0;
  std::size_t runs = 0;
};

std::vector<VariantSummary> summarize(std::span<const BenchmarkRow> rows);

}  // namespace hueplan
