#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spotscan/aggregate.hpp"
#include "spotscan/blockgrid.hpp"
#include "spotscan/candidates.hpp"
#include "spotscan/classifier.hpp"
#include "spotscan/dataset.hpp"
#include "spotscan/segmentation.hpp"

namespace spotscan {

struct DetectConfig {
    double candidate_threshold = kDefaultCandidateThreshold;
    int baseline_window = kDefaultBaselineWindow;
    Channel channel = Channel::DeltaE;
    ThresholdMethod method = ThresholdMethod::ValleyEmphasis;
    int bins = kDefaultHistogramBins;
    double min_valid_fraction = kDefaultMinValidFraction;
    const TreeModel* model = nullptr;  // nullptr = coarse-stage output only
};

struct PageResult {
    std::vector<BlockMetrics> metrics;  // both grid passes
    int skipped_blocks = 0;
    CandidateSet candidates;

    std::vector<DefectRegion> regions;          // segmented candidate regions
    std::vector<int> region_block;              // metrics index per region
    std::vector<std::uint8_t> region_accepted;  // tree verdict; all 1 without a model

    std::vector<PageDefect> defects;  // merged accepted regions
    PageFeatureVector vector;

    std::vector<BlockRecord> records;  // one per metrics entry, labels all 0
};

// The whole per-page pipeline on a loaded raster: descreen, CIELAB, block
// metrics on both grids, baseline-corrected DDE candidate selection,
// per-candidate segmentation, optional tree refinement, merge, page vector.
// Ground-truth labels are not applied here; see label_from_ground_truth.
PageResult run_detect(const SrgbRaster& page, const DetectConfig& config,
                      const std::string& page_name);

}  // namespace spotscan
