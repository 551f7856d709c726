#pragma once

#include <array>
#include <span>
#include <vector>

#include "hueplan/colorspace.hpp"
#include "hueplan/environment.hpp"

namespace hueplan {

inline constexpr std::size_t kAnchorCount = 8;
inline constexpr std::size_t kFeatureCount = 9;

/// Eight perimeter distances k1..k8 followed by the normalized chroma slope m.
using FeatureVector = std::array<double, kFeatureCount>;
/// Reward weights over FeatureVector.
using Weights = std::array<double, kFeatureCount>;

inline constexpr std::size_t kSlopeFeature = kAnchorCount;

struct PerimeterAnchors {
  std::array<LabColor, kAnchorCount> points{};
  /// Largest Lab distance from any anchor to any in-gamut color.
  double normalizer = 1.0;
};

/// Anchors at hue 0, 45, ..., 315 degrees on the L* = 50 gamut boundary.
PerimeterAnchors default_anchors();
/// Wraps arbitrary anchor points, computing their in-gamut normalizer.
PerimeterAnchors make_anchors(const std::array<LabColor, kAnchorCount>& points);
/// Largest Euclidean distance from `p` to the sRGB gamut surface.
double max_in_gamut_distance(const LabColor& p);

struct RewardConfig {
  double landing_reward = 10.0;
  double step_penalty = -0.01;
  PerimeterAnchors anchors = default_anchors();
};

/// Per anchor, the minimum Lab distance from an interior state of `path`
/// (white and black excluded), divided by the anchor normalizer.
std::array<double, kAnchorCount> perimeter_distances(std::span<const LabColor> path,
                                                     const PerimeterAnchors& anchors);

/// OLS slope of C* on L* over the interior states of `path`.
double chroma_slope(std::span<const LabColor> path);

/// Feature evaluation for one session: anchors plus the corpus slope normalizer.
class RewardModel {
 public:
  RewardModel(RewardConfig config, double slope_norm);

  /// Normalizer = max |chroma_slope| over `corpus`.
  static RewardModel for_corpus(RewardConfig config, std::span<const Trajectory> corpus);

  FeatureVector featurize(std::span<const LabColor> path) const;
  FeatureVector featurize(const Trajectory& t) const { return featurize(t.colors); }

  const RewardConfig& config() const { return config_; }
  double slope_norm() const { return slope_norm_; }

 private:
  RewardConfig config_;
  double slope_norm_;
};

double dot(const Weights& theta, const FeatureVector& phi);

/// theta . featurize(t). Landing reward and step penalties are not included.
double trajectory_reward(const Trajectory& t, const Weights& theta, const RewardModel& model);

}  // namespace hueplan
