#pragma once

#include <cstdint>
#include <vector>

#include "spotscan/geometry.hpp"

namespace spotscan {

// Scanned page in 8-bit sRGB with a per-pixel validity mask.
// validity = 1 marks printed content to analyze; 0 is masked out
// (margins, fiducials, barcodes).
struct SrgbRaster {
    int width = 0;
    int height = 0;
    int dpi = 600;
    std::vector<std::uint8_t> pixels;    // interleaved RGB, 3 bytes per pixel
    std::vector<std::uint8_t> validity;  // one byte per pixel, 0 or 1

    static SrgbRaster make(int w, int h, int dpi = 600) {
        SrgbRaster r;
        r.width = w;
        r.height = h;
        r.dpi = dpi;
        r.pixels.assign(static_cast<size_t>(w) * h * 3, 0);
        r.validity.assign(static_cast<size_t>(w) * h, 1);
        return r;
    }

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }

    const std::uint8_t* rgb(int x, int y) const { return &pixels[index(x, y) * 3]; }
    std::uint8_t* rgb(int x, int y) { return &pixels[index(x, y) * 3]; }

    bool valid(int x, int y) const { return validity[index(x, y)] != 0; }

    bool empty() const { return width <= 0 || height <= 0; }
    Rect bounds() const { return Rect{0, 0, width, height}; }
};

// Page converted to CIELAB planes. Invalid pixels carry L = a = b = 0.
struct LabRaster {
    int width = 0;
    int height = 0;
    int dpi = 600;
    std::vector<float> L;
    std::vector<float> a;
    std::vector<float> b;
    std::vector<std::uint8_t> validity;

    static LabRaster make(int w, int h, int dpi = 600) {
        LabRaster r;
        r.width = w;
        r.height = h;
        r.dpi = dpi;
        r.L.assign(static_cast<size_t>(w) * h, 0.0f);
        r.a.assign(static_cast<size_t>(w) * h, 0.0f);
        r.b.assign(static_cast<size_t>(w) * h, 0.0f);
        r.validity.assign(static_cast<size_t>(w) * h, 1);
        return r;
    }

    size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
    bool valid(int x, int y) const { return validity[index(x, y)] != 0; }

    bool empty() const { return width <= 0 || height <= 0; }
    Rect bounds() const { return Rect{0, 0, width, height}; }
};

}  // namespace spotscan
