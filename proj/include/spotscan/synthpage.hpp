#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spotscan/dataset.hpp"
#include "spotscan/raster.hpp"

namespace spotscan {

inline constexpr int kDefaultCellPeriod = 8;

// A constant-tint area rendered as a clustered-dot halftone.
struct RegionSpec {
    Rect box;
    std::array<std::uint8_t, 3> tint{128, 128, 128};  // sRGB
    int period = kDefaultCellPeriod;                  // halftone cell, even
    std::string name;                                 // color name for the dataset
};

// A Gaussian lightness bump injected before halftoning. rx/ry are the
// half-width-at-half-maximum radii; delta_l > 0 makes a gray (light) spot,
// delta_l < 0 a solid (dark) one.
struct DefectSpec {
    double cx = 0.0, cy = 0.0;
    double rx = 0.0, ry = 0.0;
    double angle_deg = 0.0;
    double delta_l = 0.0;
};

struct PageSpec {
    int width = 0;
    int height = 0;
    int dpi = 600;
    double noise_sigma = 0.0;  // additive sensor noise, L* units
    std::uint64_t seed = 0;
    std::vector<RegionSpec> regions;
    std::vector<DefectSpec> defects;
    std::vector<Rect> masks;  // excluded areas (validity 0)
};

PageSpec page_spec_from_json(const std::string& text);
std::string page_spec_to_json(const PageSpec& spec);
PageSpec read_page_spec(const std::string& path);

struct GeneratedPage {
    SrgbRaster raster;
    PageTruth truth;
};

// Renders the page. Deterministic: the same spec (seed included) always
// produces bit-identical output. Throws std::invalid_argument on a spec
// that violates its own constraints (empty page, odd cell period, defect
// center outside every region, non-positive radius).
GeneratedPage generate(const PageSpec& spec);

// Threshold ranks of the clustered-dot cell, row-major, a permutation of
// [0, period^2). Dots grow around two centers per cell (the classic 45
// degree screen layout), which keeps the dot pitch at period/sqrt(2).
std::vector<int> clustered_dot_ranks(int period);

}  // namespace spotscan
