#include "hueplan/reward.hpp"

#include <algorithm>
#include <limits>

namespace hueplan {

double max_in_gamut_distance(const LabColor& p) {
  // The farthest point of a compact set from p lies on its boundary, which for
  // the sRGB gamut is the image of the RGB cube surface.
  constexpr int kGrid = 64;
  double best = 0.0;
  for (int face = 0; face < 6; ++face) {
    const int axis = face / 2;
    const double fixed = face % 2;
    for (int i = 0; i <= kGrid; ++i) {
      for (int j = 0; j <= kGrid; ++j) {
        double ch[3];
        ch[axis] = fixed;
        ch[(axis + 1) % 3] = static_cast<double>(i) / kGrid;
        ch[(axis + 2) % 3] = static_cast<double>(j) / kGrid;
        best = std::max(best, delta_e_76(p, srgb_to_lab({ch[0], ch[1], ch[2]})));
      }
    }
  }
  return best;
}

PerimeterAnchors make_anchors(const std::array<LabColor, kAnchorCount>& points) {
  PerimeterAnchors anchors{points, 0.0};
  for (const auto& p : points) anchors.normalizer = std::max(anchors.normalizer, max_in_gamut_distance(p));
  return anchors;
}

PerimeterAnchors default_anchors() {
  static const PerimeterAnchors cached = [] {
    std::array<LabColor, kAnchorCount> points{};
    for (std::size_t i = 0; i < kAnchorCount; ++i) {
      const double hue = 45.0 * static_cast<double>(i);
      points[i] = from_lch(50.0, max_chroma(50.0, hue), hue);
    }
    return make_anchors(points);
  }();
  return cached;
}

std::array<double, kAnchorCount> perimeter_distances(std::span<const LabColor> path,
                                                     const PerimeterAnchors& anchors) {
  if (path.size() < 3) throw ValidationError("trajectory has no interior states");
  const auto interior = path.subspan(1, path.size() - 2);
  std::array<double, kAnchorCount> k{};
  for (std::size_t i = 0; i < kAnchorCount; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : interior) best = std::min(best, delta_e_76(c, anchors.points[i]));
    k[i] = std::clamp(best / anchors.normalizer, 0.0, 1.0);
  }
  return k;
}

double chroma_slope(std::span<const LabColor> path) {
  if (path.size() < 4) throw ValidationError("chroma slope needs at least two interior states");
  const auto interior = path.subspan(1, path.size() - 2);
  const double n = static_cast<double>(interior.size());
  double mean_l = 0.0;
  double mean_c = 0.0;
  for (const auto& c : interior) {
    mean_l += c.L;
    mean_c += c.chroma();
  }
  mean_l /= n;
  mean_c /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& c : interior) {
    sxy += (c.L - mean_l) * (c.chroma() - mean_c);
    sxx += (c.L - mean_l) * (c.L - mean_l);
  }
  if (sxx == 0.0) throw ValidationError("chroma slope undefined: interior lightness is constant");
  return sxy / sxx;
}

RewardModel::RewardModel(RewardConfig config, double slope_norm)
    : config_(std::move(config)), slope_norm_(slope_norm) {
  if (!(slope_norm_ > 0.0)) throw ValidationError("slope normalizer must be positive");
}

RewardModel RewardModel::for_corpus(RewardConfig config, std::span<const Trajectory> corpus) {
  double norm = 0.0;
  for (const auto& t : corpus) norm = std::max(norm, std::abs(chroma_slope(t.colors)));
  // An all-flat corpus carries no slope information; any positive scale works.
  return RewardModel(std::move(config), norm > 0.0 ? norm : 1.0);
}

FeatureVector RewardModel::featurize(std::span<const LabColor> path) const {
  FeatureVector phi{};
  const auto k = perimeter_distances(path, config_.anchors);
  std::copy(k.begin(), k.end(), phi.begin());
  phi[kSlopeFeature] = std::clamp(chroma_slope(path) / slope_norm_, -1.0, 1.0);
  return phi;
}

double dot(const Weights& theta, const FeatureVector& phi) {
  double s = 0.0;
  for (std::size_t i = 0; i < kFeatureCount; ++i) s += theta[i] * phi[i];
  return s;
}

double trajectory_reward(const Trajectory& t, const Weights& theta, const RewardModel& model) {
  return dot(theta, model.featurize(t));
}

}  // namespace hueplan
