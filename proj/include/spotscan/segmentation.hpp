#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spotscan/blockgrid.hpp"

namespace spotscan {

inline constexpr int kDefaultHistogramBins = 256;

// Pixels smaller than this cannot form a defect region; sub-kernel
// specks are noise. The real size floor is learned by the classifier.
inline constexpr int kMinDefectPixels = 4;

enum class Channel { DeltaE, Lstar };
enum class ThresholdMethod { Otsu, ValleyEmphasis };
enum class Polarity { Light, Dark };

struct Histogram {
    int bin_count = 0;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
    double lo = 0.0;  // value mapped to bin 0
    double hi = 0.0;  // value mapped to the last bin

    int bin_of(double v) const;
};

Histogram build_histogram(const std::vector<double>& values, int bins, double lo, double hi);

// Threshold level t* maximizing w1(t)*mu1(t)^2 + w2(t)*mu2(t)^2, where the
// split puts levels <= t in class 1. Levels are bin indices. Ties break
// toward the smallest t. nullopt when fewer than 2 bins are populated.
std::optional<int> otsu_threshold(const Histogram& h);

// Same objective weighted by (1 - p(t)), p(t) the fraction of pixels at
// level t, so sparsely populated valley levels are preferred.
std::optional<int> valley_emphasis_threshold(const Histogram& h);

// A segmented defect within one block. mask is row-major over block_box;
// bbox is the tight page-frame box around the mask.
struct DefectRegion {
    BlockId block_id;
    Rect block_box;
    std::vector<std::uint8_t> mask;
    Rect bbox;
    int size_px = 0;
    Polarity polarity = Polarity::Light;
    double major_axis_px = 0.0;
    double minor_axis_px = 0.0;
    double severity = 0.0;
};

// Thresholds the chosen channel inside the block and keeps the largest
// 8-connected component as the defect mask (row-major over block.box,
// 1 = defect). For DeltaE the defect side is above the threshold; for
// Lstar it is the smaller class (tie: the class farther from the block
// mean). Degenerate histograms give an all-zero mask.
std::vector<std::uint8_t> segment_defect(const LabRaster& raster, const BlockMetrics& block,
                                         Channel channel = Channel::DeltaE,
                                         ThresholdMethod method = ThresholdMethod::ValleyEmphasis,
                                         int bins = kDefaultHistogramBins);

// Attributes of a non-empty mask. nullopt when severity is undefined
// (zero or non-finite background deviation sum).
std::optional<DefectRegion> defect_attributes(const std::vector<std::uint8_t>& mask,
                                              const LabRaster& raster, const BlockMetrics& block);

}  // namespace spotscan
