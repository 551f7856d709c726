#include "hueplan/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "hueplan/error.hpp"

namespace hueplan {

namespace {

LabColor lerp(const LabColor& x, const LabColor& y, double t) {
  return {x.L + t * (y.L - x.L), x.a + t * (y.a - x.a), x.b + t * (y.b - x.b)};
}

LabColor parse_color(const nlohmann::json& value, const std::string& id) {
  if (value.is_string()) {
    try {
      return parse_hex_lab(value.get<std::string>());
    } catch (const ValidationError& e) {
      throw ValidationError("colormap '" + id + "': " + e.what());
    }
  }
  if (value.is_array() && value.size() == 3 &&
      std::all_of(value.begin(), value.end(), [](const auto& v) { return v.is_number(); })) {
    return {value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
  }
  throw ValidationError("colormap '" + id + "': color must be \"#RRGGBB\" or [L, a, b]");
}

}  // namespace

std::vector<LabColor> resample_equidistant(std::span<const LabColor> colors, std::size_t count) {
  if (colors.size() < 2) throw ValidationError("resampling needs at least 2 colors");
  if (count < 2) throw ValidationError("resampling needs at least 2 output points");

  std::vector<double> cumulative(colors.size(), 0.0);
  for (std::size_t i = 1; i < colors.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + delta_e_2000(colors[i - 1], colors[i]);
  }
  const double total = cumulative.back();

  std::vector<LabColor> out;
  out.reserve(count);
  out.push_back(colors.front());
  std::size_t seg = 1;
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 1 < colors.size() && cumulative[seg] < target) ++seg;
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double t = len > 0.0 ? (target - cumulative[seg - 1]) / len : 0.0;
    out.push_back(lerp(colors[seg - 1], colors[seg], std::clamp(t, 0.0, 1.0)));
  }
  out.push_back(colors.back());
  return out;
}

std::array<LabColor, kControlPoints> resample_to_nine(std::span<const LabColor> colors) {
  const auto v = resample_equidistant(colors, kControlPoints);
  std::array<LabColor, kControlPoints> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

Corpus parse_corpus(const nlohmann::json& doc, const CorpusLoadOptions& options) {
  if (!doc.is_object()) throw ValidationError("corpus document must be an object");
  Corpus corpus;
  corpus.name = doc.value("name", std::string{});
  if (!doc.contains("colormaps") || !doc["colormaps"].is_array()) {
    throw ValidationError("corpus document lacks a \"colormaps\" list");
  }
  if (doc["colormaps"].empty()) throw ValidationError("empty corpus");

  std::unordered_set<std::string> seen;
  for (const auto& entry : doc["colormaps"]) {
    if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
      throw ValidationError("colormap entry without a string id");
    }
    ExpertColormap cm;
    cm.id = entry["id"].get<std::string>();
    cm.source = entry.value("source", std::string{});
    if (!seen.insert(cm.id).second) throw ValidationError("duplicate colormap id '" + cm.id + "'");
    if (!entry.contains("colors") || !entry["colors"].is_array()) {
      throw ValidationError("colormap '" + cm.id + "': missing colors list");
    }

    std::vector<LabColor> colors;
    for (const auto& c : entry["colors"]) colors.push_back(parse_color(c, cm.id));
    if (colors.size() < 2) {
      throw ValidationError("colormap '" + cm.id + "': needs at least 2 colors");
    }
    if (colors.size() != kControlPoints && !options.resample) {
      throw ValidationError("colormap '" + cm.id + "': expected " +
                            std::to_string(kControlPoints) + " control points, got " +
                            std::to_string(colors.size()));
    }
    if (colors.front().L < colors.back().L) std::reverse(colors.begin(), colors.end());
    for (std::size_t i = 1; i < colors.size(); ++i) {
      if (!(colors[i].L < colors[i - 1].L)) {
        throw ValidationError("colormap '" + cm.id + "': lightness is not strictly monotone");
      }
    }
    if (colors.size() == kControlPoints) {
      std::copy(colors.begin(), colors.end(), cm.control_points.begin());
    } else {
      cm.control_points = resample_to_nine(colors);
    }
    corpus.colormaps.push_back(std::move(cm));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const CorpusLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ValidationError("empty corpus");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("corpus parse failure in " + path.string() + ": " + e.what());
  }
  return parse_corpus(doc, options);
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& cm : corpus.colormaps) {
    nlohmann::json colors = nlohmann::json::array();
    for (const auto& c : cm.control_points) colors.push_back({c.L, c.a, c.b});
    maps.push_back({{"id", cm.id}, {"source", cm.source}, {"colors", colors}});
  }
  return {{"name", corpus.name}, {"colormaps", maps}};
}

std::filesystem::path default_corpus_path() {
  if (const char* env = std::getenv("HUEPLAN_CORPUS")) return env;
  return std::filesystem::path(HUEPLAN_DATA_DIR) / "starter_corpus.json";
}

}  // namespace hueplan
