#pragma once

#include <array>

#include "spotscan/raster.hpp"

namespace spotscan {

inline constexpr int kDescreenKernelSize = 12;
inline constexpr double kDescreenSigma = 2.0;

// Normalized 1-D tap weights. The even-sized kernel has no center pixel;
// taps sample the continuous Gaussian at offsets k - 5.5, so the output
// is conceptually offset by (-0.5, -0.5). Tap k applies to input x + k - 5.
std::array<double, kDescreenKernelSize> descreen_kernel();

// Halftone removal: each channel convolved with the 12x12 Gaussian.
// Invalid pixels are excluded from the sums and the kernel support is
// renormalized per pixel over in-bounds valid pixels (no padding).
// The validity mask passes through unchanged; invalid pixels keep their
// original values. An all-invalid raster passes through unchanged.
SrgbRaster descreen(const SrgbRaster& raster);

// Validity mask restricted to pixels whose entire descreen kernel support
// ([x-5, x+6] x [y-5, y+6]) is in bounds and valid. Renormalized partial
// windows over halftone patterns leave residual ripple near validity and
// raster borders; measuring only fully-supported pixels removes it.
std::vector<std::uint8_t> full_support_validity(const std::vector<std::uint8_t>& validity,
                                                int width, int height);

}  // namespace spotscan
