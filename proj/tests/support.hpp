#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hueplan/engine.hpp"
#include "hueplan/rng.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(HUEPLAN_TEST_DATA) / name;
}

/// Quantized gamut for seed 0, built once per process.
inline std::shared_ptr<const hueplan::StateSpace> shared_space() {
  static std::once_flag once;
  static std::shared_ptr<const hueplan::StateSpace> space;
  std::call_once(once, [] { space = std::make_shared<const hueplan::StateSpace>(hueplan::quantize_gamut(0)); });
  return space;
}

inline const hueplan::Corpus& starter() {
  static const hueplan::Corpus corpus = hueplan::load_corpus(hueplan::default_corpus_path());
  return corpus;
}

inline const hueplan::Engine& engine_for(const std::string& hex) {
  static std::mutex m;
  static std::map<std::string, std::unique_ptr<hueplan::Engine>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[hex];
  if (!slot) {
    slot = std::make_unique<hueplan::Engine>(
        hueplan::Engine::create(starter(), hueplan::parse_hex_lab(hex), shared_space()));
  }
  return *slot;
}

/// Uniform Lab point in the nominal box.
inline hueplan::LabColor random_lab(hueplan::Rng& rng) {
  std::uniform_real_distribution<double> L(0.0, 100.0), ab(-128.0, 128.0);
  return {L(rng), ab(rng), ab(rng)};
}

/// Uniform sRGB color, converted to Lab.
inline hueplan::LabColor random_in_gamut(hueplan::Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return hueplan::srgb_to_lab({u(rng), u(rng), u(rng)});
}

inline const std::vector<std::string>& preset_seeds() {
  static const std::vector<std::string> seeds{"#4E79A7", "#F28E2B", "#E15759", "#76B7B2", "#59A14F",
                                              "#EDC948", "#B07AA1", "#FF9DA7", "#9C755F", "#BAB0AC"};
  return seeds;
}

}  // namespace testing
