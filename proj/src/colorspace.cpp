#include "hueplan/colorspace.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numbers>

#include "hueplan/error.hpp"

namespace hueplan {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr double kPi = std::numbers::pi;

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.00000;
constexpr double kZn = 1.08883;

constexpr Mat3 kRgbToXyz{{{0.4124564, 0.3575761, 0.1804375},
                          {0.2126729, 0.7151522, 0.0721750},
                          {0.0193339, 0.1191920, 0.9503041}}};

Mat3 invert(const Mat3& m) {
  const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
  Mat3 r{};
  r[0][0] = c00 / det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  r[1][0] = c01 / det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  r[2][0] = c02 / det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return r;
}

const Mat3& xyz_to_rgb() {
  static const Mat3 m = invert(kRgbToXyz);
  return m;
}

double compand(double linear) {
  const double mag = std::abs(linear);
  const double v = mag <= 0.0031308 ? 12.92 * mag : 1.055 * std::pow(mag, 1.0 / 2.4) - 0.055;
  return std::copysign(v, linear);
}

double linearize(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double lab_f(double t) { return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0; }

double lab_f_inv(double f) {
  const double f3 = f * f * f;
  return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

double deg(double rad) { return rad * 180.0 / kPi; }
double rad(double d) { return d * kPi / 180.0; }

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

double LabColor::hue_angle() const {
  if (a == 0.0 && b == 0.0) return 0.0;
  double h = deg(std::atan2(b, a));
  if (h < 0.0) h += 360.0;
  return h >= 360.0 ? 0.0 : h;
}

double delta_e_2000(const LabColor& x, const LabColor& y) {
  constexpr double k25_7 = 6103515625.0;  // 25^7

  const double c1 = x.chroma();
  const double c2 = y.chroma();
  const double c_bar = 0.5 * (c1 + c2);
  const double c_bar7 = std::pow(c_bar, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + k25_7)));

  const double a1p = (1.0 + g) * x.a;
  const double a2p = (1.0 + g) * y.a;
  const double c1p = std::hypot(a1p, x.b);
  const double c2p = std::hypot(a2p, y.b);

  auto hue = [](double b, double ap) {
    if (b == 0.0 && ap == 0.0) return 0.0;
    double h = std::atan2(b, ap);
    if (h < 0.0) h += 2.0 * kPi;
    return h;
  };
  const double h1p = hue(x.b, a1p);
  const double h2p = hue(y.b, a2p);

  const double dLp = y.L - x.L;
  const double dCp = c2p - c1p;

  double dhp = 0.0;
  if (c1p * c2p != 0.0) {
    dhp = h2p - h1p;
    if (dhp > kPi) dhp -= 2.0 * kPi;
    else if (dhp < -kPi) dhp += 2.0 * kPi;
  }
  const double dHp = 2.0 * std::sqrt(c1p * c2p) * std::sin(dhp / 2.0);

  const double L_bar = 0.5 * (x.L + y.L);
  const double cp_bar = 0.5 * (c1p + c2p);

  double hp_bar = h1p + h2p;
  if (c1p * c2p != 0.0) {
    if (std::abs(h1p - h2p) <= kPi) hp_bar *= 0.5;
    else if (h1p + h2p < 2.0 * kPi) hp_bar = 0.5 * (hp_bar + 2.0 * kPi);
    else hp_bar = 0.5 * (hp_bar - 2.0 * kPi);
  }

  const double t = 1.0 - 0.17 * std::cos(hp_bar - rad(30.0)) + 0.24 * std::cos(2.0 * hp_bar) +
                   0.32 * std::cos(3.0 * hp_bar + rad(6.0)) -
                   0.20 * std::cos(4.0 * hp_bar - rad(63.0));
  const double d_theta = rad(30.0) * std::exp(-std::pow((deg(hp_bar) - 275.0) / 25.0, 2.0));
  const double cp_bar7 = std::pow(cp_bar, 7.0);
  const double r_c = 2.0 * std::sqrt(cp_bar7 / (cp_bar7 + k25_7));
  const double l50 = (L_bar - 50.0) * (L_bar - 50.0);
  const double s_l = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
  const double s_c = 1.0 + 0.045 * cp_bar;
  const double s_h = 1.0 + 0.015 * cp_bar * t;
  const double r_t = -std::sin(2.0 * d_theta) * r_c;

  const double tl = dLp / s_l;
  const double tc = dCp / s_c;
  const double th = dHp / s_h;
  return std::sqrt(tl * tl + tc * tc + th * th + r_t * tc * th);
}

double delta_e_76(const LabColor& x, const LabColor& y) {
  const double dl = x.L - y.L;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

RgbColor lab_to_srgb_unclamped(const LabColor& c) {
  const double fy = (c.L + 16.0) / 116.0;
  const double fx = fy + c.a / 500.0;
  const double fz = fy - c.b / 200.0;
  const std::array<double, 3> xyz{kXn * lab_f_inv(fx), kYn * lab_f_inv(fy), kZn * lab_f_inv(fz)};
  const Mat3& m = xyz_to_rgb();
  std::array<double, 3> rgb{};
  for (int i = 0; i < 3; ++i) {
    rgb[i] = compand(m[i][0] * xyz[0] + m[i][1] * xyz[1] + m[i][2] * xyz[2]);
  }
  return {rgb[0], rgb[1], rgb[2]};
}

std::optional<RgbColor> lab_to_srgb(const LabColor& c) {
  const RgbColor raw = lab_to_srgb_unclamped(c);
  auto ok = [](double v) { return v >= -kGamutTolerance && v <= 1.0 + kGamutTolerance; };
  if (!(ok(raw.r) && ok(raw.g) && ok(raw.b))) return std::nullopt;
  return RgbColor{std::clamp(raw.r, 0.0, 1.0), std::clamp(raw.g, 0.0, 1.0),
                  std::clamp(raw.b, 0.0, 1.0)};
}

LabColor srgb_to_lab(const RgbColor& c) {
  const std::array<double, 3> lin{linearize(c.r), linearize(c.g), linearize(c.b)};
  std::array<double, 3> xyz{};
  for (int i = 0; i < 3; ++i) {
    xyz[i] = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
  }
  const double fx = lab_f(xyz[0] / kXn);
  const double fy = lab_f(xyz[1] / kYn);
  const double fz = lab_f(xyz[2] / kZn);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

bool in_gamut(const LabColor& c) { return lab_to_srgb(c).has_value(); }

LabColor from_lch(double L, double C, double hue_degrees) {
  const double h = rad(hue_degrees);
  return {L, C * std::cos(h), C * std::sin(h)};
}

LabColor gamut_clip(const LabColor& c) {
  if (in_gamut(c)) return c;
  const double L = std::clamp(c.L, 0.0, 100.0);
  const double h = std::atan2(c.b, c.a);
  double lo = 0.0;
  double hi = c.chroma();
  if (!in_gamut({L, 0.0, 0.0})) return {L, 0.0, 0.0};
  while (hi - lo > 0.1) {
    const double mid = 0.5 * (lo + hi);
    if (in_gamut({L, mid * std::cos(h), mid * std::sin(h)})) lo = mid;
    else hi = mid;
  }
  return {L, lo * std::cos(h), lo * std::sin(h)};
}

double max_chroma(double L, double hue_degrees) {
  double lo = 0.0;
  double hi = 200.0;
  if (!in_gamut({L, 0.0, 0.0})) return 0.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (in_gamut(from_lch(L, mid, hue_degrees))) lo = mid;
    else hi = mid;
  }
  return lo;
}

RgbColor parse_hex(std::string_view text) {
  if (text.size() != 7 || text[0] != '#') {
    throw ValidationError("invalid hex color '" + std::string(text) + "': expected #RRGGBB");
  }
  std::array<double, 3> ch{};
  for (int i = 0; i < 3; ++i) {
    const int hi = hex_digit(text[1 + 2 * i]);
    const int lo = hex_digit(text[2 + 2 * i]);
    if (hi < 0 || lo < 0) {
      throw ValidationError("invalid hex color '" + std::string(text) + "': bad digit");
    }
    ch[i] = (hi * 16 + lo) / 255.0;
  }
  return {ch[0], ch[1], ch[2]};
}

LabColor parse_hex_lab(std::string_view text) { return srgb_to_lab(parse_hex(text)); }

std::string to_hex(const RgbColor& c) {
  auto byte = [](double v) {
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", byte(c.r), byte(c.g), byte(c.b));
  return buf;
}

std::string to_hex(const LabColor& c) { return to_hex(lab_to_srgb_unclamped(gamut_clip(c))); }

}  // namespace hueplan
