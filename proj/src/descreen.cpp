#include "spotscan/descreen.hpp"

#include <cmath>
#include <vector>

namespace spotscan {

std::array<double, kDescreenKernelSize> descreen_kernel() {
    std::array<double, kDescreenKernelSize> k{};
    double sum = 0.0;
    for (int i = 0; i < kDescreenKernelSize; ++i) {
        const double offset = i - (kDescreenKernelSize - 1) / 2.0;
        k[i] = std::exp(-0.5 * offset * offset / (kDescreenSigma * kDescreenSigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

namespace {

// Tap i reaches input position x + i + kTapShift.
constexpr int kTapShift = -(kDescreenKernelSize / 2 - 1);  // -5

// One separable pass over a row-major plane, horizontal or vertical.
void convolve_pass(const std::vector<double>& src, std::vector<double>& dst, int width, int height,
                   const std::array<double, kDescreenKernelSize>& kernel, bool horizontal) {
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = 0; i < kDescreenKernelSize; ++i) {
                const int d = i + kTapShift;
                const int sx = horizontal ? x + d : x;
                const int sy = horizontal ? y : y + d;
                if (sx < 0 || sx >= width || sy < 0 || sy >= height) continue;
                acc += kernel[i] * src[static_cast<size_t>(sy) * width + sx];
            }
            dst[static_cast<size_t>(y) * width + x] = acc;
        }
    }
}

}  // namespace

std::vector<std::uint8_t> full_support_validity(const std::vector<std::uint8_t>& validity,
                                                int width, int height) {
    const size_t n = static_cast<size_t>(width) * height;
    std::vector<std::uint8_t> tmp(n, 0), out(n, 0);
    // Separable erosion by the kernel's input span; out-of-bounds counts as
    // invalid, so border pixels without a full window are dropped too.
    const int lo = kTapShift;                            // -5
    const int hi = kTapShift + kDescreenKernelSize - 1;  // +6
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::uint8_t all = (x + lo >= 0 && x + hi < width) ? 1 : 0;
            for (int d = lo; all && d <= hi; ++d)
                all = validity[static_cast<size_t>(y) * width + (x + d)];
            tmp[static_cast<size_t>(y) * width + x] = all ? 1 : 0;
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            std::uint8_t all = (y + lo >= 0 && y + hi < height) ? 1 : 0;
            for (int d = lo; all && d <= hi; ++d)
                all = tmp[static_cast<size_t>(y + d) * width + x];
            out[static_cast<size_t>(y) * width + x] = all ? 1 : 0;
        }
    }
    return out;
}

SrgbRaster descreen(const SrgbRaster& raster) {
    SrgbRaster out = raster;
    if (raster.empty()) return out;

    const auto kernel = descreen_kernel();
    const int w = raster.width;
    const int h = raster.height;
    const size_t n = static_cast<size_t>(w) * h;

    // Masked convolution: blur value*mask and mask separately, then divide.
    // Zero weight falls on invalid or out-of-bounds pixels, so the ratio
    // renormalizes over the valid support.
    std::vector<double> mask(n), mask_blur(n), tmp(n);
    for (size_t p = 0; p < n; ++p) mask[p] = raster.validity[p] ? 1.0 : 0.0;
    convolve_pass(mask, tmp, w, h, kernel, true);
    convolve_pass(tmp, mask_blur, w, h, kernel, false);

    std::vector<double> chan(n), chan_blur(n);
    for (int c = 0; c < 3; ++c) {
        for (size_t p = 0; p < n; ++p)
            chan[p] = raster.validity[p] ? static_cast<double>(raster.pixels[p * 3 + c]) : 0.0;
        convolve_pass(chan, tmp, w, h, kernel, true);
        convolve_pass(tmp, chan_blur, w, h, kernel, false);
        for (size_t p = 0; p < n; ++p) {
            if (!raster.validity[p] || mask_blur[p] <= 0.0) continue;
            const double v = chan_blur[p] / mask_blur[p];
            out.pixels[p * 3 + c] =
                static_cast<std::uint8_t>(std::lround(std::min(std::max(v, 0.0), 255.0)));
        }
    }
    return out;
}

}  // namespace spotscan
