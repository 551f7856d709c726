#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hueplan/planner.hpp"
#include "support.hpp"

using namespace hueplan;

namespace {

Weights slope_weights(double sign) {
  Weights w{};
  w[kSlopeFeature] = sign;
  return w;
}

// Upper 1% point of chi-square with k degrees of freedom (Wilson-Hilferty).
double chi2_critical_99(double k) {
  const double z = 2.3263478740408408;
  const double c = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - c + z * std::sqrt(c), 3.0);
}

// Single-colormap environment: one white -> black chain through the seed.
Environment chain_environment() {
  Corpus one;
  one.colormaps.push_back(testing::starter().colormaps.front());
  return build_graph(one, one.colormaps[0].control_points[4], testing::shared_space());
}

double episode_reward(const std::vector<NodeId>& nodes, const ColorGraph& g, const RewardModel& model,
                      const Weights& theta) {
  std::vector<LabColor> colors;
  for (NodeId n : nodes) colors.push_back(g.color(n));
  const double A = static_cast<double>(nodes.size() - 1);
  return 10.0 + dot(theta, model.featurize(colors)) - 0.01 * A;
}

}  // namespace

TEST_SUITE("planner") {
  TEST_CASE("q update examples") {
    const Environment env = chain_environment();
    const ColorGraph& g = env.graph;
    const NodeId s = g.white();
    const NodeId next = g.successors(s)[0];

    QTable q(g, 100.0);
    q.at(s, 0) = 0.0;
    q_update(q, s, 0, -0.01, next, 0.1, 1.0);
    CHECK(q.at(s, 0) == doctest::Approx(9.999).epsilon(1e-12));

    QTable frozen(g, 100.0);
    frozen.at(s, 0) = 3.5;
    q_update(frozen, s, 0, 42.0, next, 0.0, 1.0);
    CHECK(frozen.at(s, 0) == 3.5);

    const auto& nodes = env.candidates[0].nodes;
    const NodeId last = nodes[nodes.size() - 2];
    QTable term(g, 100.0);
    q_update(term, last, 0, 7.25, g.black(), 1.0, 1.0);
    CHECK(term.at(last, 0) == 7.25);
    CHECK(term.max_value(g.black()) == 0.0);
  }

  TEST_CASE("config validation") {
    QLearningConfig c;
    CHECK_NOTHROW(c.validate());
    c.epsilon = 1.5;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.gamma = 0.9;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.time_budget = -1;
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }

  TEST_CASE("a single chain is followed whatever epsilon is") {
    Environment env = chain_environment();
    const Engine& e = testing::engine_for("#186E8D");
    for (double eps : {0.0, 0.5, 1.0}) {
      QLearningConfig cfg;
      cfg.epsilon = eps;
      ColorGraph g = env.graph;
      QTable q(g, cfg.initial_q);
      Rng rng(61);
      const SearchContext ctx{e.reward, slope_weights(1), cfg};
      for (int i = 0; i < 20; ++i) {
        const Episode ep = run_episode(g, ctx, q, rng);
        CHECK(ep.completed);
        CHECK(ep.nodes == env.candidates[0].nodes);
      }
    }
  }

  TEST_CASE("episode reward is landing plus features minus step costs") {
    const Engine& e = testing::engine_for("#186E8D");
    ColorGraph g = e.graph();
    QLearningConfig cfg;
    QTable q(g, cfg.initial_q);
    Rng rng(62);
    Rng wr(63);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      const SearchContext ctx{e.reward, random_unit_weights(wr), cfg};
      const Episode ep = run_episode(g, ctx, q, rng);
      if (!ep.completed || ep.nodes.size() < 4) continue;
      ++checked;
      CHECK(ep.reward == doctest::Approx(episode_reward(ep.nodes, g, e.reward, ctx.theta)).epsilon(1e-12));
    }
    CHECK(checked > 100);
  }

  TEST_CASE("full exploration without slips picks successors uniformly") {
    const Engine& e = testing::engine_for("#186E8D");
    const ColorGraph& base = e.graph();
    const auto first = base.successors(base.white());
    REQUIRE(first.size() >= 2);
    QLearningConfig cfg;
    cfg.epsilon = 1.0;
    cfg.success_probability = 1.0;
    const SearchContext ctx{e.reward, slope_weights(1), cfg};
    std::map<NodeId, int> counts;
    Rng rng(64);
    ColorGraph g = base;
    QTable q(g, cfg.initial_q);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      // A fresh copy keeps dead-end pruning from changing the first step's options.
      if (g.successors(g.white()).size() != first.size()) {
        g = base;
        q = QTable(g, cfg.initial_q);
      }
      ++counts[run_episode(g, ctx, q, rng).nodes[1]];
    }
    const double expected = static_cast<double>(n) / first.size();
    double chi2 = 0.0;
    for (NodeId v : first) chi2 += std::pow(counts[v] - expected, 2) / expected;
    CHECK(counts.size() == first.size());
    CHECK(chi2 < chi2_critical_99(static_cast<double>(first.size() - 1)));
  }

  TEST_CASE("dead ends are penalized and their edge pruned") {
    ColorGraph g(testing::shared_space(), {50, 0, 0});
    const auto& s = g.space().states;
    std::vector<NodeId> idx(s.size());
    for (NodeId i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](NodeId x, NodeId y) { return s[x].L > s[y].L; });
    const NodeId a = idx[100], b = idx[200], c = idx[300];
    REQUIRE(g.add_edge(g.white(), a));
    REQUIRE(g.add_edge(a, b));
    REQUIRE(g.add_edge(a, c));
    REQUIRE(g.add_edge(c, g.black()));

    const Engine& e = testing::engine_for("#186E8D");
    QLearningConfig cfg;
    cfg.epsilon = 1.0;
    QTable q(g, cfg.initial_q);
    const SearchContext ctx{e.reward, slope_weights(1), cfg};
    Rng rng(65);
    bool stranded = false;
    for (int i = 0; i < 50; ++i) {
      const std::size_t edges = g.edge_count();
      const Episode ep = run_episode(g, ctx, q, rng);
      CHECK(q.entry_count() == g.edge_count());
      if (!ep.completed) {
        stranded = true;
        CHECK(ep.nodes.back() == b);
        CHECK(ep.reward <= -100.0);
        CHECK(g.edge_count() == edges - 1);
        CHECK_FALSE(g.has_edge(a, b));
      } else {
        CHECK(ep.nodes.back() == g.black());
      }
    }
    CHECK(stranded);
  }

  TEST_CASE("Q entries track the graph's edges and episodes are valid paths") {
    const Engine& e = testing::engine_for("#E15759");
    ColorGraph g = e.graph();
    QLearningConfig cfg;
    QTable q(g, cfg.initial_q);
    const SearchContext ctx{e.reward, slope_weights(-1), cfg};
    Rng rng(66);
    for (int i = 0; i < 1000; ++i) {
      const Episode ep = run_episode(g, ctx, q, rng);
      CHECK(q.entry_count() == g.edge_count());
      if (ep.completed) {
        CHECK(e.graph().is_path(ep.nodes));
        for (std::size_t k = 1; k < ep.nodes.size(); ++k) {
          CHECK(e.graph().color(ep.nodes[k]).L < e.graph().color(ep.nodes[k - 1]).L);
        }
      }
    }
  }

  TEST_CASE("novelty can be unsatisfiable") {
    const Environment env = chain_environment();
    const Engine& e = testing::engine_for("#186E8D");
    QLearningConfig cfg;
    cfg.episodes = 200;
    const auto res = search(env.graph, e.reward, slope_weights(1), cfg, env.candidates, 1);
    CHECK_FALSE(res.best.has_value());
    CHECK_FALSE(res.colormap.has_value());
    CHECK(res.episode_rewards.size() == 200);
  }

  TEST_CASE("searches are deterministic in their seed") {
    const Engine& e = testing::engine_for("#186E8D");
    QLearningConfig cfg;
    cfg.episodes = 2000;
    const auto a = search(e.graph(), e.reward, slope_weights(1), cfg, e.candidates(), 7);
    const auto b = search(e.graph(), e.reward, slope_weights(1), cfg, e.candidates(), 7);
    REQUIRE(a.best.has_value());
    REQUIRE(b.best.has_value());
    CHECK(a.best->nodes == b.best->nodes);
    CHECK(a.best_reward == b.best_reward);
    CHECK(a.episode_rewards == b.episode_rewards);
    CHECK(a.colormap->colors == b.colormap->colors);
  }

  TEST_CASE("search results pass an independent criteria check") {
    Rng wr(67);
    for (const auto& hex : {"#186E8D", "#4E79A7", "#59A14F", "#B07AA1"}) {
      CAPTURE(hex);
      const Engine& e = testing::engine_for(hex);
      std::set<std::vector<NodeId>> corpus;
      for (const auto& t : e.candidates()) corpus.insert(t.nodes);
      for (int rep = 0; rep < 3; ++rep) {
        const Weights theta = random_unit_weights(wr);
        QLearningConfig cfg;
        cfg.episodes = 3000;
        const auto res = search(e.graph(), e.reward, theta, cfg, e.candidates(), derive_seed(68, rep));
        CHECK(res.episode_rewards.size() == 3000);
        CHECK(res.best_so_far.size() == 3000);
        for (std::size_t i = 1; i < res.best_so_far.size(); ++i) CHECK(res.best_so_far[i] >= res.best_so_far[i - 1]);
        if (!res.best) continue;
        const auto& nodes = res.best->nodes;
        CHECK_FALSE(corpus.contains(nodes));
        CHECK(nodes.size() >= 4);
        CHECK(std::find(nodes.begin() + 1, nodes.end() - 1, e.graph().seed_state()) != nodes.end() - 1);
        CHECK(e.graph().is_path(nodes));
        CHECK(res.best_reward == doctest::Approx(episode_reward(nodes, e.graph(), e.reward, theta)).epsilon(1e-12));
        CHECK(res.best_reward == res.best_so_far.back());
        CHECK(res.colormap->raw_in_gamut);
        CHECK(check_invariants(res.colormap->colors, e.graph().seed_color()).ok());
        for (const auto& c : res.colormap->colors) CHECK(in_gamut(c));
      }
    }
  }

  TEST_CASE("benchmark rows cover every variant, theta and repetition") {
    const Engine& e = testing::engine_for("#186E8D");
    const std::vector<NamedWeights> thetas{{"up", slope_weights(1)}, {"down", slope_weights(-1)}};
    const auto rows = benchmark_variants(e.graph(), e.reward, e.candidates(), thetas, 2, 300, 5);
    CHECK(rows.size() == 2 * 2 * 3);
    for (const auto& r : rows) CHECK(r.trace.size() == 300);
    const auto again = benchmark_variants(e.graph(), e.reward, e.candidates(), thetas, 2, 300, 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].variant == again[i].variant);
      CHECK((rows[i].best_reward == again[i].best_reward ||
             (std::isnan(rows[i].best_reward) && std::isnan(again[i].best_reward))));
    }
    const auto summary = summarize(rows);
    CHECK(summary.size() == 3);
    CHECK(summary[0].variant == "optimistic");
    CHECK_THROWS_AS(benchmark_variants(e.graph(), e.reward, e.candidates(), {}, 1, 10, 0), ValidationError);
  }
}
