#include <doctest.h>

#include <cmath>

#include "spotscan/colorspace.hpp"

using namespace spotscan;

TEST_CASE("white, black, and mid-gray anchors") {
    // The published sRGB matrix rows and the D65 white point agree only to
    // about 5 decimal places, so the anchors carry that residual.
    const Lab white = srgb_to_lab(255, 255, 255);
    CHECK(white.l == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(std::fabs(white.a) < 1e-4);
    CHECK(std::fabs(white.b) < 1e-4);

    const Lab black = srgb_to_lab(0, 0, 0);
    CHECK(black.l == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::fabs(black.a) < 1e-6);
    CHECK(std::fabs(black.b) < 1e-6);

    // The 8-bit gray closest to L* = 50.
    const Lab mid = srgb_to_lab(118, 118, 118);
    CHECK(mid.l == doctest::Approx(50.0).epsilon(0.02));
}

TEST_CASE("neutral grays stay neutral") {
    for (int v = 0; v <= 255; v += 15) {
        const Lab lab = srgb_to_lab(static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v),
                                    static_cast<std::uint8_t>(v));
        CHECK(std::fabs(lab.a) < 0.5);
        CHECK(std::fabs(lab.b) < 0.5);
    }
}

TEST_CASE("lightness is monotone in gray level") {
    double prev = -1.0;
    for (int v = 0; v <= 255; ++v) {
        const double l = srgb_to_lab(static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v),
                                     static_cast<std::uint8_t>(v)).l;
        CHECK(l > prev);
        prev = l;
    }
}

TEST_CASE("transfer function round-trips all 8-bit codes") {
    for (int v = 0; v <= 255; ++v) {
        const double linear = srgb_decode(static_cast<std::uint8_t>(v));
        CHECK(linear >= 0.0);
        CHECK(linear <= 1.0);
        CHECK(srgb_encode(linear) == v);
    }
    CHECK(srgb_decode(0) == 0.0);
    CHECK(srgb_decode(255) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lab round-trips sampled srgb colors") {
    for (int r = 0; r <= 255; r += 17) {
        for (int g = 3; g <= 255; g += 34) {
            for (int b = 7; b <= 255; b += 31) {
                const Lab lab = srgb_to_lab(static_cast<std::uint8_t>(r),
                                            static_cast<std::uint8_t>(g),
                                            static_cast<std::uint8_t>(b));
                const auto back = lab_to_srgb(lab);
                CHECK(back[0] == r);
                CHECK(back[1] == g);
                CHECK(back[2] == b);
            }
        }
    }
}

TEST_CASE("out-of-gamut lab clamps instead of wrapping") {
    CHECK(lab_to_srgb(Lab{150.0, 0.0, 0.0}) == std::array<std::uint8_t, 3>{255, 255, 255});
    CHECK(lab_to_srgb(Lab{-20.0, 0.0, 0.0}) == std::array<std::uint8_t, 3>{0, 0, 0});
}

TEST_CASE("luminance to lstar and back") {
    CHECK(luminance_to_lstar(1.0) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(luminance_to_lstar(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    // 18% gray sits near the perceptual middle.
    CHECK(luminance_to_lstar(0.18) == doctest::Approx(49.496).epsilon(1e-3));
    for (double y = 0.0; y <= 1.0; y += 0.01) {
        CHECK(lstar_to_luminance(luminance_to_lstar(y)) == doctest::Approx(y).epsilon(1e-9));
    }
    for (double l = 0.0; l <= 100.0; l += 1.0) {
        CHECK(luminance_to_lstar(lstar_to_luminance(l)) == doctest::Approx(l).epsilon(1e-9));
    }
}

TEST_CASE("lstar is continuous across the linear/cbrt seam") {
    const double seam = 216.0 / 24389.0;
    const double below = luminance_to_lstar(seam * (1.0 - 1e-9));
    const double above = luminance_to_lstar(seam * (1.0 + 1e-9));
    CHECK(std::fabs(above - below) < 1e-5);
}

TEST_CASE("linear_luminance weights sum to one") {
    CHECK(linear_luminance(1.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(linear_luminance(0.0, 0.0, 0.0) == 0.0);
    // Green dominates the luminance response.
    CHECK(linear_luminance(0.0, 1.0, 0.0) > linear_luminance(1.0, 0.0, 0.0));
    CHECK(linear_luminance(1.0, 0.0, 0.0) > linear_luminance(0.0, 0.0, 1.0));
}

TEST_CASE("to_lab converts valid pixels and zeroes invalid ones") {
    SrgbRaster raster = SrgbRaster::make(3, 2, 300);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 3; ++x) {
            std::uint8_t* px = raster.rgb(x, y);
            px[0] = static_cast<std::uint8_t>(40 * x + 10);
            px[1] = static_cast<std::uint8_t>(60 * y + 20);
            px[2] = 200;
        }
    }
    raster.validity[raster.index(1, 1)] = 0;

    const LabRaster lab = to_lab(raster);
    CHECK(lab.width == 3);
    CHECK(lab.height == 2);
    CHECK(lab.dpi == 300);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 3; ++x) {
            const size_t p = lab.index(x, y);
            if (x == 1 && y == 1) {
                CHECK(lab.validity[p] == 0);
                CHECK(lab.L[p] == 0.0f);
                CHECK(lab.a[p] == 0.0f);
                CHECK(lab.b[p] == 0.0f);
                continue;
            }
            const std::uint8_t* px = raster.rgb(x, y);
            const Lab expect = srgb_to_lab(px[0], px[1], px[2]);
            CHECK(lab.validity[p] == 1);
            CHECK(lab.L[p] == doctest::Approx(expect.l).epsilon(1e-5));
            CHECK(lab.a[p] == doctest::Approx(expect.a).epsilon(1e-4));
            CHECK(lab.b[p] == doctest::Approx(expect.b).epsilon(1e-4));
        }
    }
}
