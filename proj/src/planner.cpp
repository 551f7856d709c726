#include "hueplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <thread>

#include "hueplan/error.hpp"

namespace hueplan {

void QLearningConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("epsilon must lie in [0, 1]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
  if (gamma != 1.0) throw ValidationError("gamma is fixed at 1.0");
  if (!(time_budget >= 0.0)) throw ValidationError("time budget must be non-negative");
  if (!(success_probability >= 0.0 && success_probability <= 1.0)) {
    throw ValidationError("success probability must lie in [0, 1]");
  }
}

QTable::QTable(const ColorGraph& graph, double initial) : q_(graph.node_count()) {
  for (NodeId s = 0; s < graph.node_count(); ++s) q_[s].assign(graph.successors(s).size(), initial);
}

double QTable::max_value(NodeId s) const {
  const auto& r = q_.at(s);
  if (r.empty()) return 0.0;
  return *std::max_element(r.begin(), r.end());
}

std::size_t QTable::entry_count() const {
  std::size_t n = 0;
  for (const auto& r : q_) n += r.size();
  return n;
}

void QTable::erase(NodeId s, std::size_t action) {
  auto& r = q_.at(s);
  r.erase(r.begin() + static_cast<std::ptrdiff_t>(action));
}

void q_update(QTable& q, NodeId s, std::size_t action, double reward, NodeId next, double alpha,
              double gamma) {
  double& v = q.at(s, action);
  v = (1.0 - alpha) * v + alpha * (reward + gamma * q.max_value(next));
}

Episode run_episode(ColorGraph& graph, const SearchContext& ctx, QTable& q, Rng& rng) {
  const QLearningConfig& cfg = ctx.config;
  const RewardConfig& rc = ctx.reward.config();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Episode ep;
  NodeId s = graph.white();
  ep.nodes.push_back(s);
  std::vector<LabColor> colors{graph.color(s)};

  while (s != graph.black()) {
    const auto succ = graph.successors(s);
    if (succ.empty()) {
      const NodeId prev = ep.nodes[ep.nodes.size() - 2];
      const auto prev_succ = graph.successors(prev);
      const auto idx = static_cast<std::size_t>(std::find(prev_succ.begin(), prev_succ.end(), s) - prev_succ.begin());
      q.erase(prev, idx);
      graph.remove_edge(prev, s);
      ep.reward += cfg.dead_end_penalty;
      return ep;
    }

    std::size_t action = 0;
    if (unit(rng) < cfg.epsilon) {
      action = std::uniform_int_distribution<std::size_t>(0, succ.size() - 1)(rng);
    } else {
      const auto row = q.row(s);
      const double best = *std::max_element(row.begin(), row.end());
      std::vector<std::size_t> ties;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] == best) ties.push_back(i);
      }
      action = ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
    }
    if (succ.size() > 1 && unit(rng) >= cfg.success_probability) {
      // Slip to a uniformly chosen different successor.
      const std::size_t other = std::uniform_int_distribution<std::size_t>(0, succ.size() - 2)(rng);
      action = other < action ? other : other + 1;
    }

    const NodeId next = succ[action];
    ep.nodes.push_back(next);
    colors.push_back(graph.color(next));
    double r = rc.step_penalty;
    if (next == graph.black()) {
      r += rc.landing_reward;
      // A single interior state has no chroma slope; such paths never qualify anyway.
      if (colors.size() >= 4) r += dot(ctx.theta, ctx.reward.featurize(colors));
    }
    q_update(q, s, action, r, next, cfg.alpha, cfg.gamma);
    ep.reward += r;
    s = next;
  }
  ep.completed = true;
  return ep;
}

CriteriaReport check_criteria(std::span<const NodeId> nodes, const ColorGraph& graph,
                              const std::set<std::vector<NodeId>>& corpus_paths) {
  CriteriaReport r;
  r.novel = !corpus_paths.contains(std::vector<NodeId>(nodes.begin(), nodes.end()));
  r.passes_seed = nodes.size() >= 4 &&
                  std::find(nodes.begin() + 1, nodes.end() - 1, graph.seed_state()) != nodes.end() - 1;
  if (r.novel && r.passes_seed) {
    const Trajectory t = graph.make_trajectory(std::vector<NodeId>(nodes.begin(), nodes.end()), "", Provenance::Synthesized);
    r.in_gamut = finalize(t, graph).raw_in_gamut;
  }
  return r;
}

SearchResult search(const ColorGraph& graph, const RewardModel& reward, const Weights& theta,
                    const QLearningConfig& config, std::span<const Trajectory> corpus,
                    std::uint64_t rng_seed) {
  config.validate();
  ColorGraph working = graph;
  QTable q(working, config.initial_q);
  Rng rng(rng_seed);
  const SearchContext ctx{reward, theta, config};

  std::set<std::vector<NodeId>> corpus_paths;
  for (const auto& t : corpus) corpus_paths.insert(t.nodes);

  SearchResult result;
  result.episode_rewards.reserve(config.episodes);
  result.best_so_far.reserve(config.episodes);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t e = 0; e < config.episodes; ++e) {
    if (config.time_budget > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >
            config.time_budget) {
      result.timed_out = true;
      break;
    }
    Episode ep = run_episode(working, ctx, q, rng);
    result.episode_rewards.push_back(ep.reward);
    // The gamut check is the expensive criterion, so it only runs on improvements.
    if (ep.completed && ep.reward > result.best_reward) {
      const CriteriaReport report = check_criteria(ep.nodes, graph, corpus_paths);
      if (report.ok()) {
        Trajectory t = graph.make_trajectory(std::move(ep.nodes), "novel", Provenance::Synthesized);
        result.colormap = finalize(t, graph);
        result.best = std::move(t);
        result.best_reward = ep.reward;
      }
    }
    result.best_so_far.push_back(result.best_reward);
  }
  return result;
}

std::vector<PlannerVariant> standard_variants() {
  return {{"optimistic", 100.0, 0.1}, {"random", 0.0, 1.0}, {"traditional", 0.0, 0.1}};
}

std::vector<BenchmarkRow> benchmark_variants(const ColorGraph& graph, const RewardModel& reward,
                                             std::span<const Trajectory> corpus,
                                             std::span<const NamedWeights> thetas,
                                             std::size_t repetitions, std::size_t episodes,
                                             std::uint64_t base_seed) {
  if (thetas.empty()) throw ValidationError("benchmark needs at least one preference model");
  const auto variants = standard_variants();
  const double landing = reward.config().landing_reward;

  struct Job {
    std::size_t theta;
    std::size_t rep;
    std::size_t variant;
  };
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    for (std::size_t r = 0; r < repetitions; ++r) {
      for (std::size_t v = 0; v < variants.size(); ++v) jobs.push_back({t, r, v});
    }
  }

  auto run = [&](const Job& job) {
    QLearningConfig cfg;
    cfg.initial_q = variants[job.variant].initial_q;
    cfg.epsilon = variants[job.variant].epsilon;
    cfg.episodes = episodes;
    const std::uint64_t seed = derive_seed(base_seed, job.theta * 1000003ull + job.rep);
    const SearchResult res = search(graph, reward, thetas[job.theta].theta, cfg, corpus, seed);
    BenchmarkRow row;
    row.variant = variants[job.variant].name;
    row.theta_id = thetas[job.theta].id;
    row.repetition = job.rep;
    row.best_reward = res.best ? res.best_reward - landing : std::nan("");
    row.trace.reserve(res.best_so_far.size());
    for (double b : res.best_so_far) row.trace.push_back(std::isfinite(b) ? b - landing : std::nan(""));
    return row;
  };

  std::vector<BenchmarkRow> rows(jobs.size());
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < jobs.size(); start += workers) {
    const std::size_t end = std::min(jobs.size(), start + workers);
    if (workers == 1) {
      rows[start] = run(jobs[start]);
      continue;
    }
    std::vector<std::future<BenchmarkRow>> futures;
    for (std::size_t i = start; i < end; ++i) futures.push_back(std::async(std::launch::async, run, jobs[i]));
    for (std::size_t i = start; i < end; ++i) rows[i] = futures[i - start].get();
  }
  return rows;
}

std::vector<VariantSummary> summarize(std::span<const BenchmarkRow> rows) {
  std::vector<VariantSummary> out;
  for (const auto& v : standard_variants()) {
    VariantSummary s{v.name, 0.0, 0};
    for (const auto& r : rows) {
      if (r.variant == v.name && !std::isnan(r.best_reward)) {
        s.mean_best_reward += r.best_reward;
        ++s.runs;
      }
    }
    if (s.runs > 0) s.mean_best_reward /= static_cast<double>(s.runs);
    out.push_back(s);
  }
  return out;
}

}  // namespace hueplan
