#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hueplan/corpus.hpp"
#include "hueplan/environment.hpp"
#include "hueplan/reward.hpp"

namespace hueplan {

/// Everything derived from (corpus, seed, state space) that training, ranking
/// and search share.
struct Engine {
  Environment env;
  RewardModel reward;
  std::vector<FeatureVector> features;
  std::vector<std::string> ids;

  static Engine create(const Corpus& corpus, const LabColor& seed,
                       std::shared_ptr<const StateSpace> space, RewardConfig config = {});

  const ColorGraph& graph() const { return env.graph; }
  const std::vector<Trajectory>& candidates() const { return env.candidates; }
};

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hueplan
