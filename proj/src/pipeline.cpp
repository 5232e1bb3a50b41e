#include "spotscan/pipeline.hpp"

#include <algorithm>
#include <map>

#include "spotscan/colorspace.hpp"
#include "spotscan/descreen.hpp"

namespace spotscan {

PageResult run_detect(const SrgbRaster& page, const DetectConfig& config,
                      const std::string& page_name) {
    PageResult out;

    const SrgbRaster filtered = descreen(page);
    LabRaster lab = to_lab(filtered);
    // Measure only pixels with a full descreen window: renormalized partial
    // windows over halftone ripple near validity/raster borders would
    // otherwise inflate block deviations there.
    lab.validity = full_support_validity(lab.validity, lab.width, lab.height);

    out.metrics = dual_pass_metrics(lab, config.min_valid_fraction, &out.skipped_blocks);
    out.candidates =
        select_candidates(out.metrics, config.candidate_threshold, config.baseline_window);

    std::map<BlockId, int> index_of;
    for (size_t i = 0; i < out.metrics.size(); ++i)
        index_of.emplace(out.metrics[i].id, static_cast<int>(i));

    for (const BlockId& id : out.candidates.block_ids) {
        const int mi = index_of.at(id);
        const BlockMetrics& block = out.metrics[static_cast<size_t>(mi)];
        const std::vector<std::uint8_t> mask =
            segment_defect(lab, block, config.channel, config.method, config.bins);
        const long long on = std::count(mask.begin(), mask.end(), std::uint8_t{1});
        if (on < kMinDefectPixels) continue;
        std::optional<DefectRegion> region = defect_attributes(mask, lab, block);
        if (!region) continue;  // undefined severity
        out.regions.push_back(std::move(*region));
        out.region_block.push_back(mi);
    }

    out.region_accepted.assign(out.regions.size(), 1);
    if (config.model) {
        for (size_t r = 0; r < out.regions.size(); ++r) {
            const BlockMetrics& block = out.metrics[static_cast<size_t>(out.region_block[r])];
            const DefectRegion& reg = out.regions[r];
            FeatureVector7 f;
            f.mdl = block.mdl;
            f.ddl = block.ddl;
            f.dde = block.dde;
            f.size_px = reg.size_px;
            f.major_px = reg.major_axis_px;
            f.minor_px = reg.minor_axis_px;
            f.severity = reg.severity;
            out.region_accepted[r] = predict(*config.model, f) == 1 ? 1 : 0;
        }
    }

    std::vector<DefectRegion> accepted;
    for (size_t r = 0; r < out.regions.size(); ++r)
        if (out.region_accepted[r]) accepted.push_back(out.regions[r]);

    const PageGeometry geometry{page.width, page.height, page.dpi};
    out.defects = merge_detections(accepted, geometry);
    out.vector = page_feature_vector(out.defects, geometry);

    out.records.reserve(out.metrics.size());
    std::map<int, size_t> region_of_block;
    for (size_t r = 0; r < out.regions.size(); ++r) region_of_block.emplace(out.region_block[r], r);
    for (size_t i = 0; i < out.metrics.size(); ++i) {
        const BlockMetrics& m = out.metrics[i];
        BlockRecord rec;
        rec.file = page_name;
        rec.block_idx = static_cast<int>(i);
        rec.box = m.box;
        rec.mean_l = m.mean_l;
        rec.mean_a = m.mean_a;
        rec.mean_b = m.mean_b;
        rec.dde = m.dde;
        rec.mdl = m.mdl;
        rec.ddl = m.ddl;
        if (const auto it = region_of_block.find(static_cast<int>(i));
            it != region_of_block.end()) {
            const DefectRegion& reg = out.regions[it->second];
            BlockRecord::Defect d;
            d.polarity = reg.polarity;
            d.size_px = reg.size_px;
            d.major_px = reg.major_axis_px;
            d.minor_px = reg.minor_axis_px;
            d.severity = reg.severity;
            rec.defect = d;
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

}  // namespace spotscan
