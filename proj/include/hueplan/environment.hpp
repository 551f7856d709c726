#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hueplan/colorspace.hpp"
#include "hueplan/corpus.hpp"
#include "hueplan/error.hpp"

namespace hueplan {

using NodeId = std::uint32_t;

/// The quantized gamut: a fixed set of in-gamut CIELAB states.
struct StateSpace {
  std::vector<LabColor> states;

  std::size_t size() const { return states.size(); }
  /// Index of the Euclidean-nearest state.
  std::size_t nearest(const LabColor& c) const;
};

struct QuantizeOptions {
  std::size_t count = 512;
  /// In-gamut reference samples used for the Lloyd relaxation.
  std::size_t cloud_size = 30000;
  std::size_t max_iterations = 100;
  /// Stop once no generator moves farther than this (Euclidean Lab).
  double tolerance = 0.5;
};

/// Halton (bases 2, 3, 5) rejection sampling over the Lab box followed by
/// Lloyd relaxation against a dense in-gamut cloud. Deterministic in `rng_seed`.
StateSpace quantize_gamut(std::uint64_t rng_seed, const QuantizeOptions& options = {});

/// Radical inverse of `index` in `base`.
double halton(std::uint64_t index, std::uint32_t base);

double mean_nearest_neighbor_distance(const StateSpace& space);
double mean_nearest_neighbor_delta_e_2000(const StateSpace& space);

nlohmann::json state_space_to_json(const StateSpace& space);
StateSpace state_space_from_json(const nlohmann::json& doc);

enum class Provenance { CorpusAligned, Synthesized };

struct Trajectory {
  std::string id;
  std::vector<NodeId> nodes;
  /// Colors of `nodes`, white first and black last.
  std::vector<LabColor> colors;
  Provenance provenance = Provenance::CorpusAligned;
};

/// Directed acyclic color graph. Nodes [0, n) are quantized states, n is white
/// and n + 1 is black. Every edge strictly decreases L*.
class ColorGraph {
 public:
  ColorGraph(std::shared_ptr<const StateSpace> space, const LabColor& seed_color);

  NodeId white() const { return static_cast<NodeId>(space_->size()); }
  NodeId black() const { return static_cast<NodeId>(space_->size() + 1); }
  std::size_t node_count() const { return successors_.size(); }
  std::size_t edge_count() const;

  const LabColor& color(NodeId node) const;
  std::span<const NodeId> successors(NodeId node) const { return successors_.at(node); }
  bool has_edge(NodeId from, NodeId to) const;

  /// Adds from -> to when it strictly decreases L*; returns false otherwise.
  bool add_edge(NodeId from, NodeId to);
  void remove_edge(NodeId from, NodeId to);
  /// Drops edges touching nodes that lie on no white -> black path.
  void prune();
  /// Kahn's algorithm; nullopt if a cycle exists.
  std::optional<std::vector<NodeId>> topological_order() const;

  NodeId seed_state() const { return seed_state_; }
  const LabColor& seed_color() const { return seed_color_; }
  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> space_ptr() const { return space_; }

  Trajectory make_trajectory(std::vector<NodeId> nodes, std::string id,
                             Provenance provenance) const;
  /// True when `nodes` starts at white, ends at black, and follows graph edges.
  bool is_path(std::span<const NodeId> nodes) const;

  nlohmann::json to_json() const;

 private:
  std::shared_ptr<const StateSpace> space_;
  std::vector<std::vector<NodeId>> successors_;
  LabColor seed_color_;
  NodeId seed_state_;
};

/// Up to two seed-aligned copies of `cm` (hue rotation + translation, and
/// translation only). Variants with an out-of-gamut control point are dropped.
std::vector<ExpertColormap> align_colormap(const ExpertColormap& cm, const LabColor& seed);

struct Environment {
  ColorGraph graph;
  /// Snapped corpus trajectories: the ranking candidates.
  std::vector<Trajectory> candidates;
};

class UnsupportedSeedError : public ValidationError {
 public:
  UnsupportedSeedError(const std::string& what, std::vector<LabColor> suggestions)
      : ValidationError(what), suggestions_(std::move(suggestions)) {}
  const std::vector<LabColor>& suggestions() const { return suggestions_; }

 private:
  std::vector<LabColor> suggestions_;
};

/// Aligns the corpus to `seed`, snaps it to `space`, and assembles the graph.
/// Throws UnsupportedSeedError when no trajectory survives.
Environment build_graph(const Corpus& corpus, const LabColor& seed,
                        std::shared_ptr<const StateSpace> space);

/// Nearby seeds (closest first) that yield at least `min_candidates` trajectories.
std::vector<LabColor> suggest_seeds(const Corpus& corpus, const LabColor& seed,
                                    std::shared_ptr<const StateSpace> space,
                                    std::size_t max_count = 3, std::size_t min_candidates = 2);

}  // namespace hueplan
