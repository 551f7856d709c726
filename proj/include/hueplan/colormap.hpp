#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hueplan/colorspace.hpp"
#include "hueplan/environment.hpp"

namespace hueplan {

inline constexpr std::size_t kColormapSize = 256;
inline constexpr double kTruncationLightness = 10.0;
inline constexpr double kMinFlatness = 0.99;

/// Clamped B-spline with uniform interior knots, evaluated on t in [0, 1].
class BSpline {
 public:
  BSpline(std::vector<LabColor> control, int degree);

  LabColor operator()(double t) const;
  /// Value of the i-th basis function at t.
  double basis(std::size_t i, double t) const;
  /// Greville abscissa of control point i.
  double greville(std::size_t i) const;

  int degree() const { return degree_; }
  const std::vector<LabColor>& control() const { return control_; }
  std::vector<LabColor>& control() { return control_; }

 private:
  std::size_t span_index(double t) const;

  std::vector<LabColor> control_;
  std::vector<double> knots_;
  int degree_;
};

/// Approximating cubic B-spline through the first and last control points
/// (degree drops to n - 1 below four points). When `pass_through` names an
/// interior control point, that control point is displaced so that the curve
/// hits its original position exactly at the point's Greville abscissa.
BSpline fit_spline(std::span<const LabColor> control,
                   std::optional<std::size_t> pass_through = std::nullopt);

using Curve = std::function<LabColor(double)>;
using ColorMetric = std::function<double(const LabColor&, const LabColor&)>;

/// Samples `curve` on [t0, t1] at `n_out` points equidistant in cumulative
/// arc length under `metric`, using a dense grid of `grid` intervals and a
/// piecewise-linear inverse of the normalized arc length.
std::vector<LabColor> uniformize(const Curve& curve, std::size_t n_out = kColormapSize,
                                 double t0 = 0.0, double t1 = 1.0, std::size_t grid = 1024,
                                 const ColorMetric& metric = delta_e_2000);

struct UniformityProfile {
  std::vector<double> gaps;
  double total_length = 0.0;
  /// 1 - stddev(gaps) / total_length.
  double flatness = 1.0;
  std::vector<double> lightness;
};

UniformityProfile profile(std::span<const LabColor> colors);

struct ContinuousColormap {
  std::vector<LabColor> colors;
  UniformityProfile profile;
  /// Every sample was displayable before clipping.
  bool raw_in_gamut = true;
  /// Lightness needed isotonic repair.
  bool isotonic_applied = false;
};

/// Replaces path[seed_index] with `seed`, fits the spline, truncates at
/// L* = 10, uniformizes to 256 colors, enforces strictly decreasing L*, and
/// gamut-clips.
ContinuousColormap finalize(std::span<const LabColor> path, std::optional<std::size_t> seed_index,
                            const LabColor& seed);
/// Uses the graph's seed state and exact seed color.
ContinuousColormap finalize(const Trajectory& t, const ColorGraph& graph);

/// Projects `values` onto strictly decreasing sequences: pool-adjacent-violators
/// for the non-increasing fit, then tied blocks are spread inside their
/// neighbors' gaps. Returns true if anything changed.
bool enforce_strictly_decreasing(std::vector<double>& values);

std::vector<std::string> to_hex_list(std::span<const LabColor> colors);

struct InvariantReport {
  bool monotone = true;
  std::optional<std::size_t> inversion_index;
  bool uniform = true;
  bool in_gamut = true;
  std::optional<std::size_t> out_of_gamut_index;
  bool truncated = true;
  std::optional<bool> seed_present;
  double flatness = 0.0;

  bool ok() const { return monotone && uniform && in_gamut && truncated && seed_present.value_or(true); }
};

/// Checks the output-colormap invariants; the seed check runs only when a seed is given.
InvariantReport check_invariants(std::span<const LabColor> colors,
                                 std::optional<LabColor> seed = std::nullopt);

nlohmann::json colormap_to_json(std::span<const LabColor> colors, const std::string& name);
/// Reads a colormap document, preferring exact Lab samples over hex.
std::vector<LabColor> colormap_from_json(const nlohmann::json& doc);
std::string colormap_to_csv(std::span<const LabColor> colors);
nlohmann::json profile_to_json(std::span<const LabColor> colors);

}  // namespace hueplan
