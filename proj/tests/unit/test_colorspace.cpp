#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hueplan/colorspace.hpp"
#include "hueplan/engine.hpp"
#include "hueplan/error.hpp"
#include "support.hpp"

using namespace hueplan;

namespace {

LabColor lab_of(const nlohmann::json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

double hue_radians(const LabColor& c) { return std::atan2(c.b, c.a); }

double angle_gap(double x, double y) {
  double d = std::fmod(std::abs(x - y), 2.0 * std::numbers::pi);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

}  // namespace

TEST_SUITE("colorspace") {
  TEST_CASE("delta E 2000 matches the published verification pairs") {
    const auto doc = read_json_file(testing::data_path("ciede2000_pairs.json"));
    REQUIRE(doc["pairs"].size() == 34);
    for (const auto& p : doc["pairs"]) {
      const LabColor x = lab_of(p["lab1"]);
      const LabColor y = lab_of(p["lab2"]);
      const double expected = p["delta_e"].get<double>();
      CHECK(std::abs(delta_e_2000(x, y) - expected) < 1e-4);
      CHECK(std::abs(delta_e_2000(y, x) - expected) < 1e-4);
    }
  }

  TEST_CASE("delta E 2000 identity and symmetry") {
    CHECK(delta_e_2000({50, 0, 0}, {50, 0, 0}) == 0.0);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
      const LabColor x = testing::random_lab(rng);
      const LabColor y = testing::random_lab(rng);
      CHECK(delta_e_2000(x, y) == doctest::Approx(delta_e_2000(y, x)).epsilon(1e-12));
      CHECK(delta_e_2000(x, y) > 0.0);
      CHECK(delta_e_2000(x, x) == 0.0);
    }
  }

  TEST_CASE("sRGB endpoints") {
    const auto white = lab_to_srgb({100, 0, 0});
    REQUIRE(white);
    CHECK(std::abs(white->r - 1.0) < 1e-3);
    CHECK(std::abs(white->g - 1.0) < 1e-3);
    CHECK(std::abs(white->b - 1.0) < 1e-3);
    const auto black = lab_to_srgb({0, 0, 0});
    REQUIRE(black);
    CHECK(std::abs(black->r) < 1e-3);
    CHECK(std::abs(black->g) < 1e-3);
    CHECK(std::abs(black->b) < 1e-3);
    CHECK_FALSE(lab_to_srgb({50, 80, -80}).has_value());
  }

  TEST_CASE("gamut membership") {
    CHECK(in_gamut({50, 0, 0}));
    CHECK(in_gamut({0, 0, 0}));
    CHECK(in_gamut({100, 0, 0}));
    CHECK_FALSE(in_gamut({95, -120, 0}));
    CHECK_FALSE(in_gamut({50, 80, -80}));
  }

  TEST_CASE("conversions agree with the reference implementation") {
    const auto doc = read_json_file(testing::data_path("srgb_lab_reference.json"));
    for (const auto& p : doc["pairs"]) {
      const RgbColor rgb{p["rgb"][0].get<double>(), p["rgb"][1].get<double>(), p["rgb"][2].get<double>()};
      const LabColor expected = lab_of(p["lab"]);
      const LabColor got = srgb_to_lab(rgb);
      // The reference rounds its XYZ matrices to a few digits.
      CHECK(delta_e_76(got, expected) < 2e-2);
    }
    for (const auto& g : doc["gamut"]) {
      CHECK(in_gamut(lab_of(g["lab"])) == g["in_gamut"].get<bool>());
    }
  }

  TEST_CASE("round trip is the identity inside the gamut") {
    Rng rng(2);
    for (int i = 0; i < 1000; ++i) {
      const LabColor c = testing::random_in_gamut(rng);
      const auto rgb = lab_to_srgb(c);
      REQUIRE(rgb);
      const LabColor back = srgb_to_lab(*rgb);
      CHECK(std::abs(back.L - c.L) < 1e-6);
      CHECK(std::abs(back.a - c.a) < 1e-6);
      CHECK(std::abs(back.b - c.b) < 1e-6);
    }
  }

  TEST_CASE("gamut clip holds lightness and hue") {
    Rng rng(3);
    int clipped = 0;
    while (clipped < 1000) {
      const LabColor c = testing::random_lab(rng);
      if (in_gamut(c)) {
        CHECK(gamut_clip(c) == c);
        continue;
      }
      ++clipped;
      const LabColor out = gamut_clip(c);
      CHECK(in_gamut(out));
      CHECK(std::abs(out.L - c.L) < 1e-9);
      if (out.chroma() > 1e-6) CHECK(angle_gap(hue_radians(out), hue_radians(c)) < 1e-6);
      CHECK(out.chroma() <= c.chroma());
      CHECK(gamut_clip(out) == out);
      // Within 0.1 chroma of the boundary.
      CHECK_FALSE(in_gamut(from_lch(out.L, out.chroma() + 0.1, c.hue_angle())));
    }
  }

  TEST_CASE("chroma and hue accessors") {
    const LabColor c{50, 3, 4};
    CHECK(c.chroma() == doctest::Approx(5.0));
    CHECK(LabColor{50, 0, -1}.hue_angle() == doctest::Approx(270.0));
    CHECK(LabColor{50, 0, 0}.hue_angle() == 0.0);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      const double h = testing::random_lab(rng).hue_angle();
      CHECK(h >= 0.0);
      CHECK(h < 360.0);
    }
  }

  TEST_CASE("hex parsing and formatting") {
    const RgbColor c = parse_hex("#186e8d");
    CHECK(c.r == doctest::Approx(0x18 / 255.0));
    CHECK(c.g == doctest::Approx(0x6E / 255.0));
    CHECK(c.b == doctest::Approx(0x8D / 255.0));
    CHECK(to_hex(c) == "#186E8D");
    CHECK_THROWS_AS(parse_hex("zzz"), ValidationError);
    CHECK_THROWS_AS(parse_hex("#12345"), ValidationError);
    CHECK_THROWS_AS(parse_hex("#12345G"), ValidationError);
    CHECK_THROWS_AS(parse_hex("186E8D"), ValidationError);
    CHECK(to_hex(LabColor{100, 0, 0}) == "#FFFFFF");
    CHECK(to_hex(LabColor{0, 0, 0}) == "#000000");
  }

  TEST_CASE("hex to Lab to hex is stable") {
    Rng rng(5);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int i = 0; i < 2000; ++i) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "#%02X%02X%02X", byte(rng), byte(rng), byte(rng));
      CHECK(to_hex(parse_hex_lab(buf)) == std::string(buf));
    }
  }

  TEST_CASE("max chroma sits on the boundary") {
    for (double h = 0; h < 360; h += 30) {
      const double c = max_chroma(50, h);
      CHECK(in_gamut(from_lch(50, c, h)));
      CHECK_FALSE(in_gamut(from_lch(50, c + 0.01, h)));
    }
  }
}
