#include "hueplan/colormap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hueplan/error.hpp"

namespace hueplan {

namespace {

LabColor operator+(const LabColor& x, const LabColor& y) { return {x.L + y.L, x.a + y.a, x.b + y.b}; }
LabColor operator-(const LabColor& x, const LabColor& y) { return {x.L - y.L, x.a - y.a, x.b - y.b}; }
LabColor operator*(double s, const LabColor& x) { return {s * x.L, s * x.a, s * x.b}; }

template <typename T, typename Get>
T de_boor(std::size_t k, double t, int p, const std::vector<double>& knots, Get get) {
  std::vector<T> d;
  d.reserve(p + 1);
  for (int j = 0; j <= p; ++j) d.push_back(get(k - p + j));
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const std::size_t i = k - p + j;
      const double denom = knots[i + p + 1 - r] - knots[i];
      const double alpha = denom > 0.0 ? (t - knots[i]) / denom : 0.0;
      d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
    }
  }
  return d[p];
}

}  // namespace

BSpline::BSpline(std::vector<LabColor> control, int degree)
    : control_(std::move(control)), degree_(degree) {
  const std::size_t n = control_.size();
  if (n < 2) throw ValidationError("a spline needs at least 2 control points");
  if (degree_ < 1 || static_cast<std::size_t>(degree_) >= n) {
    throw ValidationError("spline degree must be in [1, control points - 1]");
  }
  const std::size_t interior = n - static_cast<std::size_t>(degree_) - 1;
  knots_.assign(static_cast<std::size_t>(degree_) + 1, 0.0);
  for (std::size_t j = 1; j <= interior; ++j) {
    knots_.push_back(static_cast<double>(j) / static_cast<double>(interior + 1));
  }
  knots_.insert(knots_.end(), static_cast<std::size_t>(degree_) + 1, 1.0);
}

std::size_t BSpline::span_index(double t) const {
  const std::size_t last = control_.size() - 1;
  if (t >= 1.0) return last;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto k = static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
  return std::clamp(k, static_cast<std::size_t>(degree_), last);
}

LabColor BSpline::operator()(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  return de_boor<LabColor>(span_index(t), t, degree_, knots_,
                           [&](std::size_t i) { return control_[i]; });
}

double BSpline::basis(std::size_t i, double t) const {
  t = std::clamp(t, 0.0, 1.0);
  return de_boor<double>(span_index(t), t, degree_, knots_,
                         [&](std::size_t j) { return j == i ? 1.0 : 0.0; });
}

double BSpline::greville(std::size_t i) const {
  double s = 0.0;
  for (int j = 1; j <= degree_; ++j) s += knots_[i + static_cast<std::size_t>(j)];
  return s / degree_;
}

BSpline fit_spline(std::span<const LabColor> control, std::optional<std::size_t> pass_through) {
  if (control.size() < 2) throw ValidationError("a spline needs at least 2 control points");
  const int degree = static_cast<int>(std::min<std::size_t>(3, control.size() - 1));
  BSpline spline(std::vector<LabColor>(control.begin(), control.end()), degree);
  if (pass_through && *pass_through > 0 && *pass_through + 1 < control.size() && degree > 1) {
    const std::size_t k = *pass_through;
    const double t = spline.greville(k);
    const LabColor miss = control[k] - spline(t);
    spline.control()[k] = spline.control()[k] + (1.0 / spline.basis(k, t)) * miss;
  }
  return spline;
}

std::vector<LabColor> uniformize(const Curve& curve, std::size_t n_out, double t0, double t1,
                                 std::size_t grid, const ColorMetric& metric) {
  if (n_out < 2 || grid < 1) throw ValidationError("uniformize needs n_out >= 2 and grid >= 1");
  std::vector<double> t(grid + 1);
  std::vector<LabColor> pts(grid + 1);
  std::vector<double> s(grid + 1, 0.0);
  for (std::size_t i = 0; i <= grid; ++i) {
    t[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(grid);
    pts[i] = curve(t[i]);
    if (i > 0) s[i] = s[i - 1] + metric(pts[i - 1], pts[i]);
  }
  const double total = s.back();
  if (!(total > 0.0)) throw ValidationError("cannot uniformize a zero-length curve");

  std::vector<LabColor> out;
  out.reserve(n_out);
  std::size_t seg = 1;
  for (std::size_t j = 0; j < n_out; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(n_out - 1);
    if (j == 0) {
      out.push_back(pts.front());
      continue;
    }
    if (j + 1 == n_out) {
      out.push_back(pts.back());
      continue;
    }
    while (seg < grid && s[seg] / total < u) ++seg;
    const double lo = s[seg - 1] / total;
    const double hi = s[seg] / total;
    const double f = hi > lo ? (u - lo) / (hi - lo) : 0.0;
    out.push_back(curve(t[seg - 1] + std::clamp(f, 0.0, 1.0) * (t[seg] - t[seg - 1])));
  }
  return out;
}

UniformityProfile profile(std::span<const LabColor> colors) {
  UniformityProfile p;
  for (const auto& c : colors) p.lightness.push_back(c.L);
  for (std::size_t i = 1; i < colors.size(); ++i) p.gaps.push_back(delta_e_2000(colors[i - 1], colors[i]));
  p.total_length = std::accumulate(p.gaps.begin(), p.gaps.end(), 0.0);
  if (p.gaps.empty() || p.total_length == 0.0) return p;
  const double mean = p.total_length / static_cast<double>(p.gaps.size());
  double var = 0.0;
  for (double g : p.gaps) var += (g - mean) * (g - mean);
  var /= static_cast<double>(p.gaps.size());
  p.flatness = 1.0 - std::sqrt(var) / p.total_length;
  return p;
}

bool enforce_strictly_decreasing(std::vector<double>& values) {
  const std::size_t n = values.size();
  bool strict = true;
  for (std::size_t i = 1; i < n; ++i) strict = strict && values[i] < values[i - 1];
  if (strict) return false;

  // Pool adjacent violators for a non-increasing least-squares fit.
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() <= blocks.back().mean()) {
      blocks[blocks.size() - 2].sum += blocks.back().sum;
      blocks[blocks.size() - 2].count += blocks.back().count;
      blocks.pop_back();
    }
  }

  std::size_t i = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const double v = blocks[b].mean();
    const std::size_t len = blocks[b].count;
    if (len == 1) {
      values[i++] = v;
      continue;
    }
    const bool has_prev = b > 0;
    const bool has_next = b + 1 < blocks.size();
    const double top = has_prev ? 0.5 * (blocks[b - 1].mean() + v) : v;
    const double bottom = has_next ? 0.5 * (v + blocks[b + 1].mean()) : v;
    const double steps = static_cast<double>(len - 1) + (has_prev ? 1.0 : 0.0) + (has_next ? 1.0 : 0.0);
    for (std::size_t m = 0; m < len; ++m) {
      const double pos = static_cast<double>(m) + (has_prev ? 1.0 : 0.0);
      values[i++] = top - (top - bottom) * pos / steps;
    }
  }
  return true;
}

namespace {

/// Drops interior neighbors whose lightness no longer brackets the substituted seed.
std::vector<LabColor> substitute_seed(std::span<const LabColor> path, std::size_t& seed_index,
                                      const LabColor& seed) {
  std::vector<LabColor> out;
  std::size_t new_index = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const bool endpoint = i == 0 || i + 1 == path.size();
    if (i == seed_index) {
      new_index = out.size();
      out.push_back(seed);
    } else if (i < seed_index && !endpoint && path[i].L <= seed.L) {
      continue;
    } else if (i > seed_index && !endpoint && path[i].L >= seed.L) {
      continue;
    } else {
      out.push_back(path[i]);
    }
  }
  seed_index = new_index;
  return out;
}

}  // namespace

ContinuousColormap finalize(std::span<const LabColor> path, std::optional<std::size_t> seed_index,
                            const LabColor& seed) {
  if (path.size() < 2) throw ValidationError("cannot finalize a trajectory with fewer than 2 states");
  std::vector<LabColor> control(path.begin(), path.end());
  if (seed_index) {
    if (*seed_index >= path.size()) throw ValidationError("seed index outside the trajectory");
    control = substitute_seed(path, *seed_index, seed);
  }
  const BSpline spline = fit_spline(control, seed_index);

  double t_end = 1.0;
  if (spline(1.0).L < kTruncationLightness) {
    if (spline(0.0).L <= kTruncationLightness) {
      throw ValidationError("trajectory lies entirely below the truncation lightness");
    }
    constexpr int kScan = 1024;
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 1; i <= kScan; ++i) {
      const double t = static_cast<double>(i) / kScan;
      if (spline(t).L <= kTruncationLightness) {
        lo = static_cast<double>(i - 1) / kScan;
        hi = t;
        break;
      }
    }
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (spline(mid).L > kTruncationLightness) lo = mid;
      else hi = mid;
    }
    t_end = hi;
  }

  ContinuousColormap cm;
  cm.colors = uniformize([&](double t) { return spline(t); }, kColormapSize, 0.0, t_end);

  std::vector<double> L;
  L.reserve(cm.colors.size());
  for (const auto& c : cm.colors) L.push_back(c.L);
  cm.isotonic_applied = enforce_strictly_decreasing(L);
  for (std::size_t i = 0; i < L.size(); ++i) cm.colors[i].L = L[i];

  for (auto& c : cm.colors) {
    if (!in_gamut(c)) {
      cm.raw_in_gamut = false;
      c = gamut_clip(c);
    }
  }
  cm.profile = profile(cm.colors);
  return cm;
}

ContinuousColormap finalize(const Trajectory& t, const ColorGraph& graph) {
  std::optional<std::size_t> seed_index;
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    if (t.nodes[i] == graph.seed_state()) seed_index = i;
  }
  return finalize(t.colors, seed_index, graph.seed_color());
}

std::vector<std::string> to_hex_list(std::span<const LabColor> colors) {
  std::vector<std::string> out;
  out.reserve(colors.size());
  for (const auto& c : colors) out.push_back(to_hex(c));
  return out;
}

InvariantReport check_invariants(std::span<const LabColor> colors, std::optional<LabColor> seed) {
  InvariantReport r;
  for (std::size_t i = 1; i < colors.size(); ++i) {
    if (!(colors[i].L < colors[i - 1].L)) {
      r.monotone = false;
      r.inversion_index = i;
      break;
    }
  }
  for (std::size_t i = 0; i < colors.size(); ++i) {
    if (!in_gamut(colors[i])) {
      r.in_gamut = false;
      r.out_of_gamut_index = i;
      break;
    }
  }
  r.flatness = profile(colors).flatness;
  r.uniform = r.flatness >= kMinFlatness;
  r.truncated = !colors.empty() && colors.back().L >= kTruncationLightness - 1e-9 &&
                colors.back().L <= kTruncationLightness + 2.0;
  if (seed) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : colors) best = std::min(best, delta_e_2000(c, *seed));
    r.seed_present = best <= 1.0;
  }
  return r;
}

nlohmann::json colormap_to_json(std::span<const LabColor> colors, const std::string& name) {
  nlohmann::json lab = nlohmann::json::array();
  for (const auto& c : colors) lab.push_back({c.L, c.a, c.b});
  return {{"name", name}, {"colors", to_hex_list(colors)}, {"lab", lab}};
}

std::vector<LabColor> colormap_from_json(const nlohmann::json& doc) {
  std::vector<LabColor> out;
  if (doc.is_object() && doc.contains("lab") && doc["lab"].is_array()) {
    for (const auto& c : doc["lab"]) {
      if (!c.is_array() || c.size() != 3) throw ValidationError("lab entries must be [L, a, b]");
      out.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    }
    return out;
  }
  const nlohmann::json& list = doc.is_array() ? doc : doc.value("colors", nlohmann::json::array());
  for (const auto& c : list) {
    if (!c.is_string()) throw ValidationError("colors must be \"#RRGGBB\" strings");
    out.push_back(parse_hex_lab(c.get<std::string>()));
  }
  if (out.empty()) throw ValidationError("colormap document holds no colors");
  return out;
}

std::string colormap_to_csv(std::span<const LabColor> colors) {
  std::ostringstream os;
  os.precision(10);
  os << "index,L,a,b,r,g,b\n";
  for (std::size_t i = 0; i < colors.size(); ++i) {
    const RgbColor rgb = lab_to_srgb_unclamped(gamut_clip(colors[i]));
    os << i << ',' << colors[i].L << ',' << colors[i].a << ',' << colors[i].b << ','
       << std::clamp(rgb.r, 0.0, 1.0) << ',' << std::clamp(rgb.g, 0.0, 1.0) << ','
       << std::clamp(rgb.b, 0.0, 1.0) << '\n';
  }
  return os.str();
}

nlohmann::json profile_to_json(std::span<const LabColor> colors) {
  const UniformityProfile p = profile(colors);
  nlohmann::json ab = nlohmann::json::array();
  for (const auto& c : colors) ab.push_back({c.a, c.b});
  return {{"flatness", p.flatness},
          {"total_length", p.total_length},
          {"ab_projection", ab},
          {"swatch", to_hex_list(colors)},
          {"lightness", p.lightness},
          {"gaps", p.gaps}};
}

}  // namespace hueplan
