#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spotscan/raster.hpp"
#include "spotscan/segmentation.hpp"

namespace spotscan {

struct PageGeometry {
    int width = 0;
    int height = 0;
    int dpi = 600;

    double px_to_mm() const { return 25.4 / dpi; }
};

// A page-level defect after merging blockwise detections. Coordinates are
// millimetres from the page center, x right-positive, y down-positive.
struct PageDefect {
    Rect bbox;
    Polarity polarity = Polarity::Light;
    int size_px = 0;
    double size_mm2 = 0.0;
    double severity = 0.0;
    double centroid_x_mm = 0.0;
    double centroid_y_mm = 0.0;
};

// Whole-page summary record. Statistics are absent on a defect-free page.
struct PageFeatureVector {
    int n_defects = 0;
    int n_gray = 0;   // light defects
    int n_solid = 0;  // dark defects
    std::optional<double> size_mean, size_max, size_min, size_std;  // mm^2
    std::optional<double> severity_mean, severity_max, severity_min;
    std::optional<double> centroid_mean_x_mm, centroid_mean_y_mm;
};

// Groups regions whose bounding boxes overlap or touch (edge or corner)
// and share a polarity; each group becomes one PageDefect with the union
// bounding box, union-mask pixel area, area-weighted mean severity, and
// the union-mask centroid. Duplicate detections of one spot from the two
// grid passes collapse into a single defect. Grouping repeats until no two
// same-polarity result boxes touch, so the output is a fixed point of the
// merge; the output order is canonical (by box, then polarity), not the
// input order.
std::vector<PageDefect> merge_detections(const std::vector<DefectRegion>& regions,
                                         const PageGeometry& page);

PageFeatureVector page_feature_vector(const std::vector<PageDefect>& defects,
                                      const PageGeometry& page);

std::string page_vector_to_json(const PageFeatureVector& v);
std::string page_vector_to_csv(const PageFeatureVector& v);  // header + one row

// Draws 2 px bounding-box strokes on a copy of the (pre-descreen) page:
// white for light defects, black for dark ones.
SrgbRaster render_overlay(const SrgbRaster& page, const std::vector<PageDefect>& defects);

}  // namespace spotscan
