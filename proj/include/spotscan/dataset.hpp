#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spotscan/classifier.hpp"
#include "spotscan/geometry.hpp"
#include "spotscan/segmentation.hpp"

namespace spotscan {

// A block is labeled defective when it covers at least this fraction of a
// ground-truth ellipse's area.
inline constexpr double kTruthOverlapFraction = 0.25;

inline constexpr const char* kDatasetVersionLine = "# spotscan-dataset v1";
inline constexpr const char* kDatasetHeader =
    "file,block_idx,color,x0,x1,y0,y1,mean_l,mean_a,mean_b,dde,mdl,ddl,"
    "label,polarity,size_px,major_px,minor_px,severity";

// One row of the blockwise dataset: page/block identity, the block
// statistics, the ground-truth label, and — only for blocks that passed
// candidate selection and segmented into a region — the defect attributes.
struct BlockRecord {
    std::string file;
    int block_idx = -1;  // index in the page's dual-pass block list
    std::string color;   // tint region name; empty when unknown

    Rect box;
    double mean_l = 0.0, mean_a = 0.0, mean_b = 0.0;
    double dde = 0.0, mdl = 0.0, ddl = 0.0;
    int label = 0;

    struct Defect {
        Polarity polarity = Polarity::Light;
        int size_px = 0;
        double major_px = 0.0;
        double minor_px = 0.0;
        double severity = 0.0;

        bool operator==(const Defect&) const = default;
    };
    std::optional<Defect> defect;

    bool operator==(const BlockRecord&) const = default;
};

void write_dataset(const std::vector<BlockRecord>& records, const std::string& path);

// Throws std::runtime_error with "<path>:<line>: ..." on malformed input.
std::vector<BlockRecord> read_dataset(const std::string& path);

// The 7 classifier features of a record; nullopt without a defect group.
std::optional<FeatureVector7> record_features(const BlockRecord& r);

// Ground truth for one synthetic page: the injected defect ellipses (axes
// are the half-width-at-half-maximum radii of the injected profile) plus
// the tint regions, shared between the generator and the labeler.
struct TruthDefect {
    Polarity polarity = Polarity::Light;
    double cx = 0.0, cy = 0.0;  // pixels, page frame
    double rx = 0.0, ry = 0.0;  // semi-axes in pixels
    double angle_deg = 0.0;     // rotation of the rx axis
};

struct TruthRegion {
    Rect box;
    std::string color;
};

struct PageTruth {
    int width = 0;
    int height = 0;
    int dpi = 600;
    std::vector<TruthDefect> defects;
    std::vector<TruthRegion> regions;
};

void write_truth(const PageTruth& truth, const std::string& path);
PageTruth read_truth(const std::string& path);

// Fraction of the rasterized truth ellipse covered by the window.
double truth_overlap_fraction(const Rect& window, const TruthDefect& truth);

// Sets label = 1 on records whose window covers >= min_fraction of some
// truth ellipse, 0 otherwise, and fills the region color names.
void label_from_ground_truth(std::vector<BlockRecord>& records, const PageTruth& truth,
                             double min_fraction = kTruthOverlapFraction);

}  // namespace spotscan
