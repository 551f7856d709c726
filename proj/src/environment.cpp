#include "hueplan/environment.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace hueplan {

namespace {

constexpr double kBoxAB = 128.0;

LabColor box_point(double u, double v, double w) {
  return {100.0 * u, -kBoxAB + 2.0 * kBoxAB * v, -kBoxAB + 2.0 * kBoxAB * w};
}

double squared(const LabColor& x, const LabColor& y) {
  const double dl = x.L - y.L;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return dl * dl + da * da + db * db;
}

std::size_t nearest_index(std::span<const LabColor> points, const LabColor& c) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = squared(points[i], c);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::size_t StateSpace::nearest(const LabColor& c) const { return nearest_index(states, c); }

double halton(std::uint64_t index, std::uint32_t base) {
  double result = 0.0;
  double f = 1.0;
  while (index > 0) {
    f /= base;
    result += f * static_cast<double>(index % base);
    index /= base;
  }
  return result;
}

StateSpace quantize_gamut(std::uint64_t rng_seed, const QuantizeOptions& options) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Seed-dependent starting offset into the Halton sequence.
  std::uint64_t index = 1 + rng() % 100000;
  std::vector<LabColor> generators;
  generators.reserve(options.count);
  while (generators.size() < options.count) {
    const LabColor c = box_point(halton(index, 2), halton(index, 3), halton(index, 5));
    ++index;
    if (in_gamut(c)) generators.push_back(c);
  }

  std::vector<LabColor> cloud;
  cloud.reserve(options.cloud_size);
  while (cloud.size() < options.cloud_size) {
    const double u = unit(rng);
    const double v = unit(rng);
    const double w = unit(rng);
    const LabColor c = box_point(u, v, w);
    if (in_gamut(c)) cloud.push_back(c);
  }

  std::vector<std::array<double, 3>> sums(generators.size());
  std::vector<std::size_t> counts(generators.size());
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    std::fill(sums.begin(), sums.end(), std::array<double, 3>{0.0, 0.0, 0.0});
    std::fill(counts.begin(), counts.end(), 0);
    for (const auto& p : cloud) {
      const std::size_t k = nearest_index(generators, p);
      sums[k][0] += p.L;
      sums[k][1] += p.a;
      sums[k][2] += p.b;
      ++counts[k];
    }
    double max_move = 0.0;
    for (std::size_t k = 0; k < generators.size(); ++k) {
      if (counts[k] == 0) continue;
      const double n = static_cast<double>(counts[k]);
      // Cell centroids can fall outside the (non-convex) gamut.
      const LabColor centroid = gamut_clip({sums[k][0] / n, sums[k][1] / n, sums[k][2] / n});
      max_move = std::max(max_move, delta_e_76(generators[k], centroid));
      generators[k] = centroid;
    }
    if (max_move < options.tolerance) break;
  }
  return StateSpace{std::move(generators)};
}

double mean_nearest_neighbor_distance(const StateSpace& space) {
  double total = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < space.size(); ++j) {
      if (i != j) best = std::min(best, squared(space.states[i], space.states[j]));
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(space.size());
}

double mean_nearest_neighbor_delta_e_2000(const StateSpace& space) {
  double total = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < space.size(); ++j) {
      if (i != j) best = std::min(best, delta_e_2000(space.states[i], space.states[j]));
    }
    total += best;
  }
  return total / static_cast<double>(space.size());
}

nlohmann::json state_space_to_json(const StateSpace& space) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : space.states) states.push_back({s.L, s.a, s.b});
  return {{"count", space.size()}, {"states", states}};
}

StateSpace state_space_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array()) {
    throw ValidationError("state-space document lacks a \"states\" list");
  }
  StateSpace space;
  for (const auto& s : doc["states"]) {
    if (!s.is_array() || s.size() != 3) throw ValidationError("state must be [L, a, b]");
    space.states.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>()});
  }
  if (space.states.empty()) throw ValidationError("empty state space");
  return space;
}

// ---------------------------------------------------------------------------

ColorGraph::ColorGraph(std::shared_ptr<const StateSpace> space, const LabColor& seed_color)
    : space_(std::move(space)),
      successors_(space_->size() + 2),
      seed_color_(seed_color),
      seed_state_(static_cast<NodeId>(space_->nearest(seed_color))) {}

std::size_t ColorGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& s : successors_) n += s.size();
  return n;
}

const LabColor& ColorGraph::color(NodeId node) const {
  if (node == white()) return kWhite;
  if (node == black()) return kBlack;
  return space_->states.at(node);
}

bool ColorGraph::has_edge(NodeId from, NodeId to) const {
  const auto& s = successors_.at(from);
  return std::binary_search(s.begin(), s.end(), to);
}

bool ColorGraph::add_edge(NodeId from, NodeId to) {
  if (from == black() || to == white()) return false;
  if (!(color(to).L < color(from).L)) return false;
  auto& s = successors_.at(from);
  const auto it = std::lower_bound(s.begin(), s.end(), to);
  if (it == s.end() || *it != to) s.insert(it, to);
  return true;
}

void ColorGraph::remove_edge(NodeId from, NodeId to) {
  auto& s = successors_.at(from);
  const auto it = std::lower_bound(s.begin(), s.end(), to);
  if (it != s.end() && *it == to) s.erase(it);
}

void ColorGraph::prune() {
  const std::size_t n = successors_.size();
  std::vector<char> from_white(n, 0);
  std::vector<char> to_black(n, 0);

  std::deque<NodeId> queue{white()};
  from_white[white()] = 1;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : successors_[u]) {
      if (!from_white[v]) {
        from_white[v] = 1;
        queue.push_back(v);
      }
    }
  }

  std::vector<std::vector<NodeId>> preds(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : successors_[u]) preds[v].push_back(u);
  }
  queue.push_back(black());
  to_black[black()] = 1;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId u : preds[v]) {
      if (!to_black[u]) {
        to_black[u] = 1;
        queue.push_back(u);
      }
    }
  }

  for (NodeId u = 0; u < n; ++u) {
    auto& s = successors_[u];
    if (!(from_white[u] && to_black[u])) {
      s.clear();
      continue;
    }
    std::erase_if(s, [&](NodeId v) { return !(from_white[v] && to_black[v]); });
  }
}

std::optional<std::vector<NodeId>> ColorGraph::topological_order() const {
  const std::size_t n = successors_.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& s : successors_) {
    for (NodeId v : s) ++indegree[v];
  }
  std::deque<NodeId> ready;
  for (NodeId u = 0; u < n; ++u) {
    if (indegree[u] == 0) ready.push_back(u);
  }
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const NodeId u = ready.front();
    ready.pop_front();
    order.push_back(u);
    for (NodeId v : successors_[u]) {
      if (--indegree[v] == 0) ready.push_back(v);
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

Trajectory ColorGraph::make_trajectory(std::vector<NodeId> nodes, std::string id,
                                       Provenance provenance) const {
  Trajectory t;
  t.id = std::move(id);
  t.provenance = provenance;
  t.colors.reserve(nodes.size());
  for (NodeId n : nodes) t.colors.push_back(color(n));
  t.nodes = std::move(nodes);
  return t;
}

bool ColorGraph::is_path(std::span<const NodeId> nodes) const {
  if (nodes.size() < 2 || nodes.front() != white() || nodes.back() != black()) return false;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i - 1] >= node_count() || !has_edge(nodes[i - 1], nodes[i])) return false;
  }
  return true;
}

nlohmann::json ColorGraph::to_json() const {
  nlohmann::json edges = nlohmann::json::array();
  std::set<NodeId> used;
  for (NodeId u = 0; u < successors_.size(); ++u) {
    for (NodeId v : successors_[u]) {
      edges.push_back({u, v});
      used.insert(u);
      used.insert(v);
    }
  }
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId u : used) {
    const LabColor& c = color(u);
    nodes.push_back({{"id", u}, {"lab", {c.L, c.a, c.b}}, {"hex", to_hex(c)}});
  }
  return {{"white", white()},
          {"black", black()},
          {"seed_state", seed_state_},
          {"seed_color", {seed_color_.L, seed_color_.a, seed_color_.b}},
          {"node_count", used.size()},
          {"edge_count", edge_count()},
          {"nodes", nodes},
          {"edges", edges}};
}

// ---------------------------------------------------------------------------

std::vector<ExpertColormap> align_colormap(const ExpertColormap& cm, const LabColor& seed) {
  const auto& pts = cm.control_points;
  std::size_t k = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (std::abs(pts[i].L - seed.L) < std::abs(pts[k].L - seed.L)) k = i;
  }
  const LabColor& anchor = pts[k];

  auto all_in_gamut = [](const ExpertColormap& m) {
    return std::all_of(m.control_points.begin(), m.control_points.end(),
                       [](const LabColor& c) { return in_gamut(c); });
  };

  std::vector<ExpertColormap> out;

  // Hue rotation about the neutral axis, then a rigid translation onto the seed.
  double rotation = 0.0;
  if (anchor.chroma() > 0.0 && seed.chroma() > 0.0) {
    rotation = std::atan2(seed.b, seed.a) - std::atan2(anchor.b, anchor.a);
  }
  const double cr = std::cos(rotation);
  const double sr = std::sin(rotation);
  ExpertColormap rotated{cm.id + "@hue", {}, cm.source};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rotated.control_points[i] = {pts[i].L, cr * pts[i].a - sr * pts[i].b,
                                 sr * pts[i].a + cr * pts[i].b};
  }
  const LabColor moved = rotated.control_points[k];
  for (auto& c : rotated.control_points) {
    c = {c.L + seed.L - moved.L, c.a + seed.a - moved.a, c.b + seed.b - moved.b};
  }
  rotated.control_points[k] = seed;
  if (all_in_gamut(rotated)) out.push_back(std::move(rotated));

  // Translation only.
  ExpertColormap shifted{cm.id + "@shift", {}, cm.source};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    shifted.control_points[i] = {pts[i].L + seed.L - anchor.L, pts[i].a + seed.a - anchor.a,
                                 pts[i].b + seed.b - anchor.b};
  }
  shifted.control_points[k] = seed;
  if (all_in_gamut(shifted)) out.push_back(std::move(shifted));
  return out;
}

namespace {

// Snapping can make neighbouring control points collide or swap lightness order.
// Keep the longest strictly darkening subsequence that still visits the seed state.
std::vector<NodeId> monotone_through_seed(const ColorGraph& g, const std::vector<NodeId>& snapped) {
  const std::size_t n = snapped.size();
  const NodeId seed = g.seed_state();
  auto darker = [&](std::size_t i, std::size_t j) {
    return g.color(snapped[j]).L < g.color(snapped[i]).L;
  };
  // fwd[i]: longest chain ending at i, bwd[i]: longest chain starting at i.
  std::vector<std::size_t> fwd(n, 1), bwd(n, 1), prev(n, n), next(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < j; ++i)
      if (darker(i, j) && fwd[i] + 1 > fwd[j]) fwd[j] = fwd[i] + 1, prev[j] = i;
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = i + 1; j < n; ++j)
      if (darker(i, j) && bwd[j] + 1 > bwd[i]) bwd[i] = bwd[j] + 1, next[i] = j;

  std::size_t best = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (snapped[k] != seed) continue;
    if (best == n || fwd[k] + bwd[k] > fwd[best] + bwd[best]) best = k;
  }
  if (best == n) return {};
  std::vector<NodeId> out;
  for (std::size_t i = best; i != n; i = prev[i]) out.push_back(snapped[i]);
  std::reverse(out.begin(), out.end());
  for (std::size_t i = next[best]; i != n; i = next[i]) out.push_back(snapped[i]);
  return out;
}

Environment assemble(const Corpus& corpus, const LabColor& seed,
                     std::shared_ptr<const StateSpace> space) {
  Environment env{ColorGraph(std::move(space), seed), {}};
  ColorGraph& g = env.graph;
  std::set<std::vector<NodeId>> seen;

  for (const auto& cm : corpus.colormaps) {
    for (const auto& aligned : align_colormap(cm, seed)) {
      std::vector<NodeId> snapped;
      for (const auto& c : aligned.control_points) {
        const auto s = static_cast<NodeId>(g.space().nearest(c));
        if (snapped.empty() || snapped.back() != s) snapped.push_back(s);
      }
      std::vector<NodeId> nodes{g.white()};
      for (NodeId s : monotone_through_seed(g, snapped)) nodes.push_back(s);
      nodes.push_back(g.black());

      bool connected = true;
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        connected = g.add_edge(nodes[i - 1], nodes[i]) && connected;
      }
      // White, black, and at least two interior states.
      if (!connected || nodes.size() < 4) continue;
      if (!seen.insert(nodes).second) continue;
      env.candidates.push_back(
          g.make_trajectory(std::move(nodes), aligned.id, Provenance::CorpusAligned));
    }
  }
  g.prune();
  return env;
}

}  // namespace

Environment build_graph(const Corpus& corpus, const LabColor& seed,
                        std::shared_ptr<const StateSpace> space) {
  Environment env = assemble(corpus, seed, space);
  if (env.candidates.empty()) {
    auto suggestions = suggest_seeds(corpus, seed, space);
    std::string msg = "seed color unsupported: no corpus colormap stays in gamut when aligned to " +
                      to_hex(seed);
    if (!suggestions.empty()) {
      msg += "; try";
      for (const auto& s : suggestions) msg += " " + to_hex(s);
    }
    throw UnsupportedSeedError(msg, std::move(suggestions));
  }
  return env;
}

std::vector<LabColor> suggest_seeds(const Corpus& corpus, const LabColor& seed,
                                    std::shared_ptr<const StateSpace> space,
                                    std::size_t max_count, std::size_t min_candidates) {
  const double C = seed.chroma();
  const double h = seed.hue_angle();
  std::vector<LabColor> probes;
  for (double scale : {0.9, 0.75, 0.6, 0.45, 0.3, 0.15}) {
    for (double dL : {0.0, -10.0, 10.0, -20.0, 20.0}) {
      const double L = std::clamp(seed.L + dL, 15.0, 90.0);
      const LabColor p = from_lch(L, C * scale, h);
      if (in_gamut(p)) probes.push_back(p);
    }
  }
  std::stable_sort(probes.begin(), probes.end(), [&](const LabColor& x, const LabColor& y) {
    return delta_e_2000(seed, x) < delta_e_2000(seed, y);
  });

  std::vector<LabColor> out;
  for (const auto& p : probes) {
    if (out.size() >= max_count) break;
    // Suggestions are round-tripped through hex so that clients can reuse them verbatim.
    const LabColor q = parse_hex_lab(to_hex(p));
    if (assemble(corpus, q, space).candidates.size() >= min_candidates) out.push_back(q);
  }
  return out;
}

}  // namespace hueplan
