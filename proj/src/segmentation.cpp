#include "spotscan/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spotscan {

int Histogram::bin_of(double v) const {
    if (hi <= lo) return 0;
    const int b = static_cast<int>((v - lo) / (hi - lo) * bin_count);
    return std::clamp(b, 0, bin_count - 1);
}

Histogram build_histogram(const std::vector<double>& values, int bins, double lo, double hi) {
    if (bins < 1) throw std::invalid_argument("histogram needs >= 1 bin");
    Histogram h;
    h.bin_count = bins;
    h.counts.assign(static_cast<size_t>(bins), 0);
    h.lo = lo;
    h.hi = hi;
    for (const double v : values) ++h.counts[h.bin_of(v)];
    h.total = static_cast<std::int64_t>(values.size());
    return h;
}

namespace {

// Shared scan for both threshold criteria. Class sums are integer-exact;
// only the final objective is floating point, so the argmax (smallest t on
// ties) is order-independent.
std::optional<int> best_threshold(const Histogram& h, bool valley_weight) {
    std::int64_t total_w = 0, total_s = 0;
    int populated = 0;
    for (int i = 0; i < h.bin_count; ++i) {
        total_w += h.counts[i];
        total_s += h.counts[i] * i;
        if (h.counts[i] > 0) ++populated;
    }
    if (populated < 2) return std::nullopt;

    std::optional<int> best;
    double best_score = 0.0;
    std::int64_t w1 = 0, s1 = 0;
    for (int t = 0; t + 1 < h.bin_count; ++t) {
        w1 += h.counts[t];
        s1 += h.counts[t] * t;
        const std::int64_t w2 = total_w - w1;
        if (w1 == 0 || w2 == 0) continue;
        const double mu1 = static_cast<double>(s1) / static_cast<double>(w1);
        const double mu2 = static_cast<double>(total_s - s1) / static_cast<double>(w2);
        const double om1 = static_cast<double>(w1) / static_cast<double>(total_w);
        const double om2 = static_cast<double>(w2) / static_cast<double>(total_w);
        double score = om1 * mu1 * mu1 + om2 * mu2 * mu2;
        if (valley_weight) {
            const double p = static_cast<double>(h.counts[t]) / static_cast<double>(total_w);
            score *= 1.0 - p;
        }
        if (!best || score > best_score) {
            best = t;
            best_score = score;
        }
    }
    return best;
}

struct BlockValues {
    std::vector<double> values;  // aligned with valid-pixel order
    std::vector<size_t> offsets; // row-major offset within the block box
};

BlockValues channel_values(const LabRaster& raster, const BlockMetrics& block, Channel channel) {
    BlockValues bv;
    const Rect& box = block.box;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const size_t p = raster.index(x, y);
            if (!raster.validity[p]) continue;
            double v;
            if (channel == Channel::DeltaE) {
                const double dl = raster.L[p] - block.mean_l;
                const double da = raster.a[p] - block.mean_a;
                const double db = raster.b[p] - block.mean_b;
                v = std::sqrt(dl * dl + da * da + db * db);
            } else {
                v = raster.L[p];
            }
            bv.values.push_back(v);
            bv.offsets.push_back(static_cast<size_t>(y - box.y0) * box.width() + (x - box.x0));
        }
    }
    return bv;
}

// Keeps only the largest 8-connected component of the set bits.
void keep_largest_component(std::vector<std::uint8_t>& mask, int w, int h) {
    std::vector<int> label(mask.size(), -1);
    int best_label = -1;
    long long best_size = 0;
    int next = 0;
    std::vector<size_t> stack;
    for (size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || label[start] >= 0) continue;
        long long size = 0;
        stack.assign(1, start);
        label[start] = next;
        while (!stack.empty()) {
            const size_t cur = stack.back();
            stack.pop_back();
            ++size;
            const int cx = static_cast<int>(cur % w);
            const int cy = static_cast<int>(cur / w);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = cx + dx;
                    const int ny = cy + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    const size_t np = static_cast<size_t>(ny) * w + nx;
                    if (!mask[np] || label[np] >= 0) continue;
                    label[np] = next;
                    stack.push_back(np);
                }
            }
        }
        if (size > best_size) {
            best_size = size;
            best_label = next;
        }
        ++next;
    }
    for (size_t p = 0; p < mask.size(); ++p)
        mask[p] = (mask[p] && label[p] == best_label) ? 1 : 0;
}

}  // namespace

std::vector<std::uint8_t> segment_defect(const LabRaster& raster, const BlockMetrics& block,
                                         Channel channel, ThresholdMethod method, int bins) {
    const Rect& box = block.box;
    std::vector<std::uint8_t> mask(static_cast<size_t>(box.width()) * box.height(), 0);

    const BlockValues bv = channel_values(raster, block, channel);
    if (bv.values.size() < 2) return mask;

    const auto [mn, mx] = std::minmax_element(bv.values.begin(), bv.values.end());
    const double lo = channel == Channel::DeltaE ? 0.0 : *mn;
    const double hi = *mx;
    if (hi <= lo) return mask;

    const Histogram h = build_histogram(bv.values, bins, lo, hi);
    const std::optional<int> t = method == ThresholdMethod::Otsu ? otsu_threshold(h)
                                                                 : valley_emphasis_threshold(h);
    if (!t) return mask;

    std::vector<bool> high(bv.values.size());
    std::int64_t n_high = 0;
    double sum_low = 0.0, sum_high = 0.0;
    for (size_t i = 0; i < bv.values.size(); ++i) {
        high[i] = h.bin_of(bv.values[i]) > *t;
        if (high[i]) {
            ++n_high;
            sum_high += bv.values[i];
        } else {
            sum_low += bv.values[i];
        }
    }
    const std::int64_t n_low = static_cast<std::int64_t>(bv.values.size()) - n_high;
    if (n_high == 0 || n_low == 0) return mask;

    bool defect_is_high = true;
    if (channel == Channel::Lstar) {
        // Defects are the minority of a block; on a count tie take the
        // class whose mean L sits farther from the block mean.
        if (n_high != n_low) {
            defect_is_high = n_high < n_low;
        } else {
            const double mean_low = sum_low / static_cast<double>(n_low);
            const double mean_high = sum_high / static_cast<double>(n_high);
            defect_is_high =
                std::fabs(mean_high - block.mean_l) >= std::fabs(mean_low - block.mean_l);
        }
    }

    for (size_t i = 0; i < bv.values.size(); ++i)
        if (high[i] == defect_is_high) mask[bv.offsets[i]] = 1;

    keep_largest_component(mask, box.width(), box.height());
    return mask;
}

std::optional<int> otsu_threshold(const Histogram& h) { return best_threshold(h, false); }

std::optional<int> valley_emphasis_threshold(const Histogram& h) {
    return best_threshold(h, true);
}

std::optional<DefectRegion> defect_attributes(const std::vector<std::uint8_t>& mask,
                                              const LabRaster& raster, const BlockMetrics& block) {
    const Rect& box = block.box;
    const int w = box.width();

    DefectRegion region;
    region.block_id = block.id;
    region.block_box = box;
    region.mask = mask;

    // Size, bbox, polarity and the coordinate moments in one sweep.
    long long n = 0;
    double sum_x = 0.0, sum_y = 0.0, sum_l = 0.0;
    int min_x = box.x1, max_x = box.x0 - 1, min_y = box.y1, max_y = box.y0 - 1;
    double de_defect = 0.0, de_background = 0.0;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const size_t p = raster.index(x, y);
            if (!raster.validity[p]) continue;
            const double dl = raster.L[p] - block.mean_l;
            const double da = raster.a[p] - block.mean_a;
            const double db = raster.b[p] - block.mean_b;
            const double de = std::sqrt(dl * dl + da * da + db * db);
            const bool in_mask = mask[static_cast<size_t>(y - box.y0) * w + (x - box.x0)] != 0;
            if (in_mask) {
                ++n;
                sum_x += x;
                sum_y += y;
                sum_l += raster.L[p];
                de_defect += de;
                min_x = std::min(min_x, x);
                max_x = std::max(max_x, x);
                min_y = std::min(min_y, y);
                max_y = std::max(max_y, y);
            } else {
                de_background += de;
            }
        }
    }
    if (n == 0) throw std::invalid_argument("defect_attributes: empty mask");

    region.size_px = static_cast<int>(n);
    region.bbox = Rect{min_x, min_y, max_x + 1, max_y + 1};
    region.polarity =
        sum_l / static_cast<double>(n) > block.mean_l ? Polarity::Light : Polarity::Dark;

    // Equivalent ellipse from the second central moments of the mask
    // coordinates; 1/12 is the variance of a pixel's own unit footprint.
    const double cx = sum_x / static_cast<double>(n);
    const double cy = sum_y / static_cast<double>(n);
    double vxx = 0.0, vyy = 0.0, vxy = 0.0;
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            const size_t p = raster.index(x, y);
            if (!raster.validity[p]) continue;
            if (!mask[static_cast<size_t>(y - box.y0) * w + (x - box.x0)]) continue;
            vxx += (x - cx) * (x - cx);
            vyy += (y - cy) * (y - cy);
            vxy += (x - cx) * (y - cy);
        }
    }
    vxx = vxx / static_cast<double>(n) + 1.0 / 12.0;
    vyy = vyy / static_cast<double>(n) + 1.0 / 12.0;
    vxy /= static_cast<double>(n);
    const double mid = 0.5 * (vxx + vyy);
    const double span = std::sqrt(0.25 * (vxx - vyy) * (vxx - vyy) + vxy * vxy);
    region.major_axis_px = 4.0 * std::sqrt(mid + span);
    region.minor_axis_px = 4.0 * std::sqrt(std::max(0.0, mid - span));

    if (de_background <= 0.0) return std::nullopt;
    region.severity = de_defect / de_background;
    if (!std::isfinite(region.severity) || region.severity < 0.0) return std::nullopt;
    return region;
}

}  // namespace spotscan
