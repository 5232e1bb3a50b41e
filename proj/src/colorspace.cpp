#include "spotscan/colorspace.hpp"

#include <algorithm>
#include <cmath>

namespace spotscan {

namespace {

// D65 reference white, 2-degree observer.
constexpr double kRefX = 0.95047;
constexpr double kRefY = 1.00000;
constexpr double kRefZ = 1.08883;

// CIE constants as exact rationals.
constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double pivot(double t) {
    return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

double pivot_inv(double f) {
    const double f3 = f * f * f;
    return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

}  // namespace

double srgb_decode(std::uint8_t v) {
    const double c = v / 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

std::uint8_t srgb_encode(double linear) {
    const double c = std::clamp(linear, 0.0, 1.0);
    const double s = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
    return static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0));
}

double linear_luminance(double r, double g, double b) {
    return 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
}

double luminance_to_lstar(double y) { return 116.0 * pivot(y / kRefY) - 16.0; }

double lstar_to_luminance(double lstar) { return kRefY * pivot_inv((lstar + 16.0) / 116.0); }

Lab srgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    const double r = srgb_decode(r8);
    const double g = srgb_decode(g8);
    const double b = srgb_decode(b8);

    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;

    const double fx = pivot(x / kRefX);
    const double fy = pivot(y / kRefY);
    const double fz = pivot(z / kRefZ);

    return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

std::array<std::uint8_t, 3> lab_to_srgb(const Lab& lab) {
    const double fy = (lab.l + 16.0) / 116.0;
    const double fx = fy + lab.a / 500.0;
    const double fz = fy - lab.b / 200.0;

    const double x = kRefX * pivot_inv(fx);
    const double y = kRefY * pivot_inv(fy);
    const double z = kRefZ * pivot_inv(fz);

    const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;

    return {srgb_encode(r), srgb_encode(g), srgb_encode(b)};
}

LabRaster to_lab(const SrgbRaster& raster) {
    LabRaster out = LabRaster::make(raster.width, raster.height, raster.dpi);
    out.validity = raster.validity;
    const size_t n = static_cast<size_t>(raster.width) * raster.height;
    for (size_t p = 0; p < n; ++p) {
        if (!raster.validity[p]) continue;
        const Lab lab =
            srgb_to_lab(raster.pixels[p * 3], raster.pixels[p * 3 + 1], raster.pixels[p * 3 + 2]);
        out.L[p] = static_cast<float>(lab.l);
        out.a[p] = static_cast<float>(lab.a);
        out.b[p] = static_cast<float>(lab.b);
    }
    return out;
}

}  // namespace spotscan
