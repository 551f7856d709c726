#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace hueplan {

/// A point in CIELAB (D65). L in [0,100]; a and b nominally in [-128,128].
struct LabColor {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  double chroma() const { return std::hypot(a, b); }
  /// Hue angle in degrees, [0, 360). Zero for neutral colors.
  double hue_angle() const;

  friend bool operator==(const LabColor&, const LabColor&) = default;
};

/// Nonlinear sRGB, channels in [0,1].
struct RgbColor {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const RgbColor&, const RgbColor&) = default;
};

inline constexpr LabColor kWhite{100.0, 0.0, 0.0};
inline constexpr LabColor kBlack{0.0, 0.0, 0.0};

/// Tolerance on sRGB channels when deciding gamut membership.
inline constexpr double kGamutTolerance = 1e-6;

/// CIEDE2000 color difference with kL = kC = kH = 1.
double delta_e_2000(const LabColor& x, const LabColor& y);

/// Plain Euclidean distance in Lab (CIE76).
double delta_e_76(const LabColor& x, const LabColor& y);

/// Unclamped sRGB channels; values outside [0,1] mean the color is not displayable.
RgbColor lab_to_srgb_unclamped(const LabColor& c);

/// sRGB conversion, or nullopt when any channel leaves [0,1] by more than kGamutTolerance.
std::optional<RgbColor> lab_to_srgb(const LabColor& c);

LabColor srgb_to_lab(const RgbColor& c);

bool in_gamut(const LabColor& c);

/// Pulls an out-of-gamut color toward the neutral axis at fixed L and hue.
/// In-gamut colors are returned unchanged.
LabColor gamut_clip(const LabColor& c);

/// Largest in-gamut chroma at lightness L and hue angle (degrees), by bisection.
double max_chroma(double L, double hue_degrees);

LabColor from_lch(double L, double C, double hue_degrees);

/// Parses "#RRGGBB" (case-insensitive). Throws ValidationError on malformed input.
RgbColor parse_hex(std::string_view text);
LabColor parse_hex_lab(std::string_view text);

/// Formats as "#RRGGBB" (upper case) after clamping and 8-bit rounding.
std::string to_hex(const RgbColor& c);
/// Gamut-clips, converts, and formats.
std::string to_hex(const LabColor& c);

}  // namespace hueplan
