#pragma once

#include <array>
#include <cstdint>

#include "spotscan/raster.hpp"

namespace spotscan {

struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// sRGB (8-bit, D65) -> CIELAB, 2-degree observer.
Lab srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Inverse conversion, clamped to the 8-bit sRGB gamut.
std::array<std::uint8_t, 3> lab_to_srgb(const Lab& lab);

// sRGB transfer function on a single channel, output in [0, 1].
double srgb_decode(std::uint8_t v);
std::uint8_t srgb_encode(double linear);

// Relative luminance Y (0..1) of a linear-RGB triple.
double linear_luminance(double r, double g, double b);

// L* as a function of relative luminance and its inverse.
double luminance_to_lstar(double y);
double lstar_to_luminance(double lstar);

// Converts every valid pixel; invalid pixels carry L = a = b = 0.
LabRaster to_lab(const SrgbRaster& raster);

}  // namespace spotscan
