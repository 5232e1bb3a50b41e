#include "spotscan/blockgrid.hpp"

#include <cmath>

namespace spotscan {

namespace {

// Cut points along one axis: 0, origin + k*75 (interior), size.
std::vector<int> axis_cuts(int size, int origin) {
    std::vector<int> cuts{0};
    for (int c = origin; c < size; c += kBlockSize)
        if (c > 0) cuts.push_back(c);
    cuts.push_back(size);
    return cuts;
}

}  // namespace

std::vector<BlockWindow> partition(const LabRaster& raster, GridPass pass,
                                   double min_valid_fraction) {
    std::vector<BlockWindow> windows;
    if (raster.empty()) return windows;

    const int origin = pass == GridPass::Shifted ? kGridShift : 0;
    const std::vector<int> xs = axis_cuts(raster.width, origin);
    const std::vector<int> ys = axis_cuts(raster.height, origin);

    for (size_t r = 0; r + 1 < ys.size(); ++r) {
        for (size_t c = 0; c + 1 < xs.size(); ++c) {
            const Rect box{xs[c], ys[r], xs[c + 1], ys[r + 1]};
            long long valid = 0;
            for (int y = box.y0; y < box.y1; ++y)
                for (int x = box.x0; x < box.x1; ++x)
                    if (raster.valid(x, y)) ++valid;
            if (static_cast<double>(valid) < min_valid_fraction * static_cast<double>(box.area()))
                continue;
            windows.push_back(
                BlockWindow{BlockId{pass, static_cast<int>(r), static_cast<int>(c)}, box});
        }
    }
    return windows;
}

std::optional<BlockMetrics> compute_metrics(const LabRaster& raster, const BlockWindow& window) {
    const Rect& box = window.box;

    // First pass: block means.
    double sum_l = 0.0, sum_a = 0.0, sum_b = 0.0;
    long long n = 0;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const size_t p = raster.index(x, y);
            if (!raster.validity[p]) continue;
            sum_l += raster.L[p];
            sum_a += raster.a[p];
            sum_b += raster.b[p];
            ++n;
        }
    }
    if (n < 2) return std::nullopt;

    BlockMetrics m;
    m.id = window.id;
    m.box = box;
    m.valid_count = static_cast<int>(n);
    m.mean_l = sum_l / static_cast<double>(n);
    m.mean_a = sum_a / static_cast<double>(n);
    m.mean_b = sum_b / static_cast<double>(n);

    // Second pass: per-pixel deviations from the block mean.
    std::vector<double> de_vals, dl_vals;
    de_vals.reserve(static_cast<size_t>(n));
    dl_vals.reserve(static_cast<size_t>(n));
    double sum_de = 0.0, sum_dl = 0.0;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const size_t p = raster.index(x, y);
            if (!raster.validity[p]) continue;
            const double dl = raster.L[p] - m.mean_l;
            const double da = raster.a[p] - m.mean_a;
            const double db = raster.b[p] - m.mean_b;
            const double de = std::sqrt(dl * dl + da * da + db * db);
            const double adl = std::fabs(dl);
            de_vals.push_back(de);
            dl_vals.push_back(adl);
            sum_de += de;
            sum_dl += adl;
        }
    }
    const double dn = static_cast<double>(n);
    m.mde = sum_de / dn;
    m.mdl = sum_dl / dn;
    double ss_de = 0.0, ss_dl = 0.0;
    for (size_t i = 0; i < de_vals.size(); ++i) {
        ss_de += (de_vals[i] - m.mde) * (de_vals[i] - m.mde);
        ss_dl += (dl_vals[i] - m.mdl) * (dl_vals[i] - m.mdl);
    }
    m.dde = std::sqrt(ss_de / (dn - 1.0));
    m.ddl = std::sqrt(ss_dl / (dn - 1.0));
    return m;
}

std::vector<BlockMetrics> dual_pass_metrics(const LabRaster& raster, double min_valid_fraction,
                                            int* skipped) {
    std::vector<BlockMetrics> metrics;
    int skip_count = 0;
    for (const GridPass pass : {GridPass::Initial, GridPass::Shifted}) {
        for (const BlockWindow& w : partition(raster, pass, min_valid_fraction)) {
            if (auto m = compute_metrics(raster, w))
                metrics.push_back(*m);
            else
                ++skip_count;
        }
    }
    if (skipped) *skipped = skip_count;
    return metrics;
}

}  // namespace spotscan
