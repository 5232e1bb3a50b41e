#pragma once

#include <compare>
#include <optional>
#include <vector>

#include "spotscan/raster.hpp"

namespace spotscan {

inline constexpr int kBlockSize = 75;
inline constexpr int kGridShift = 35;
inline constexpr double kDefaultMinValidFraction = 0.5;

enum class GridPass { Initial, Shifted };

struct BlockId {
    GridPass pass = GridPass::Initial;
    int row = 0;
    int col = 0;

    bool operator==(const BlockId&) const = default;
    auto operator<=>(const BlockId&) const = default;
};

struct BlockWindow {
    BlockId id;
    Rect box;  // true extent; edge windows may be smaller than 75x75
};

// Per-block fluctuation statistics. Means are over valid pixels; the
// deviation stats use the sample denominator (valid_count - 1).
struct BlockMetrics {
    BlockId id;
    Rect box;
    double mean_l = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mde = 0.0;  // mean Euclidean Lab distance from the block mean
    double dde = 0.0;  // std dev of that distance
    double mdl = 0.0;  // mean |L - mean L|
    double ddl = 0.0;  // std dev of |L - mean L|
    int valid_count = 0;
};

// Tiles the page with 75x75 windows from the pass origin (the Shifted pass
// origin sits at +35,+35, which adds partial leading strips). Partial edge
// windows keep their true extent. Windows whose valid-pixel fraction falls
// below min_valid_fraction are dropped.
std::vector<BlockWindow> partition(const LabRaster& raster, GridPass pass,
                                   double min_valid_fraction = kDefaultMinValidFraction);

// nullopt when the window has fewer than 2 valid pixels.
std::optional<BlockMetrics> compute_metrics(const LabRaster& raster, const BlockWindow& window);

// Initial-pass metrics followed by Shifted-pass metrics, row-major within
// each pass. skipped (optional) counts windows with < 2 valid pixels.
std::vector<BlockMetrics> dual_pass_metrics(const LabRaster& raster,
                                            double min_valid_fraction = kDefaultMinValidFraction,
                                            int* skipped = nullptr);

}  // namespace spotscan
