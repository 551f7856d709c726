#include "hueplan/engine.hpp"

#include <fstream>
#include <sstream>

#include "hueplan/error.hpp"

namespace hueplan {

Engine Engine::create(const Corpus& corpus, const LabColor& seed,
                      std::shared_ptr<const StateSpace> space, RewardConfig config) {
  Environment env = build_graph(corpus, seed, std::move(space));
  RewardModel reward = RewardModel::for_corpus(std::move(config), env.candidates);
  std::vector<FeatureVector> features;
  std::vector<std::string> ids;
  for (const auto& t : env.candidates) {
    features.push_back(reward.featurize(t));
    ids.push_back(t.id);
  }
  return Engine{std::move(env), std::move(reward), std::move(features), std::move(ids)};
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw IoError("write failed for " + path.string());
}

}  // namespace hueplan
