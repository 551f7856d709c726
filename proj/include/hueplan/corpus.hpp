#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hueplan/colorspace.hpp"

namespace hueplan {

inline constexpr std::size_t kControlPoints = 9;

/// An expert colormap reduced to nine control points, stored light to dark.
struct ExpertColormap {
  std::string id;
  std::array<LabColor, kControlPoints> control_points{};
  std::string source;
};

struct Corpus {
  std::string name;
  std::vector<ExpertColormap> colormaps;
};

struct CorpusLoadOptions {
  /// When false, entries that do not carry exactly nine colors are rejected
  /// instead of resampled.
  bool resample = true;
};

/// Samples `count` points equidistant in cumulative CIEDE2000 arc length along
/// the polyline through `colors`. Endpoints are preserved.
std::vector<LabColor> resample_equidistant(std::span<const LabColor> colors, std::size_t count);

std::array<LabColor, kControlPoints> resample_to_nine(std::span<const LabColor> colors);

/// Parses and validates a corpus document. Errors name the offending colormap id.
Corpus parse_corpus(const nlohmann::json& doc, const CorpusLoadOptions& options = {});
Corpus load_corpus(const std::filesystem::path& path, const CorpusLoadOptions& options = {});

nlohmann::json corpus_to_json(const Corpus& corpus);

/// Location of the bundled starter corpus.
std::filesystem::path default_corpus_path();

}  // namespace hueplan
