#pragma once

#include <vector>

#include "spotscan/blockgrid.hpp"

namespace spotscan {

inline constexpr int kDefaultBaselineWindow = 31;

// Default DDE threshold, calibrated on defect-free synthetic pages at
// generator defaults: the 95th percentile of per-page maximum corrected
// DDE (~0.04 across tints 64-224, seeds, and page sizes), frozen with 2x
// headroom so unseen clean pages stay below it.
inline constexpr double kDefaultCandidateThreshold = 0.08;

// One block's trace through the coarse stage: raw DDE, the running-median
// baseline, and the corrected value that gets thresholded.
struct DdeTraceRow {
    BlockId id;
    Rect box;
    int region = 0;  // tint-region index within the page
    double dde = 0.0;
    double baseline = 0.0;
    double corrected = 0.0;
    bool selected = false;
};

struct CandidateSet {
    std::vector<BlockId> block_ids;
    double threshold_used = 0.0;
    std::vector<DdeTraceRow> trace;  // every block, in metrics order
};

// Median of a centered window of `window` values around each position,
// clipped at the sequence ends. window must be odd and >= 1.
std::vector<double> running_median(const std::vector<double>& values, int window);

// Running-median baseline removal over one 1-D DDE sequence:
// corrected[i] = max(0, dde[i] - running_median(dde, window)[i]).
std::vector<double> remove_baseline(const std::vector<double>& dde, int window);

// Per-block corrected DDE for a whole page. Blocks are grouped per grid
// pass into tint regions (4-connected components on the block grid, so
// masked gutters between constant-tint areas split the sequences) and the
// baseline runs row-major within each region.
std::vector<DdeTraceRow> corrected_dde(const std::vector<BlockMetrics>& metrics,
                                       int window = kDefaultBaselineWindow);

// Blocks whose corrected DDE is >= threshold, both grid passes.
CandidateSet select_candidates(const std::vector<BlockMetrics>& metrics, double threshold,
                               int window = kDefaultBaselineWindow);

}  // namespace spotscan
