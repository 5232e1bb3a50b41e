#include "spotscan/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

namespace spotscan {

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }

    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

struct Group {
    Rect bbox;
    Polarity polarity = Polarity::Light;
    std::vector<size_t> members;  // indices into the input region list
};

auto rect_key(const Rect& r) { return std::tie(r.y0, r.x0, r.y1, r.x1); }

void draw_rect_outline(SrgbRaster& img, const Rect& r, std::uint8_t value) {
    if (r.empty()) return;
    const auto put = [&](int x, int y) {
        if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
        std::uint8_t* px = img.rgb(x, y);
        px[0] = px[1] = px[2] = value;
    };
    for (int x = r.x0; x < r.x1; ++x) {
        put(x, r.y0);
        put(x, r.y1 - 1);
    }
    for (int y = r.y0; y < r.y1; ++y) {
        put(r.x0, y);
        put(r.x1 - 1, y);
    }
}

}  // namespace

std::vector<PageDefect> merge_detections(const std::vector<DefectRegion>& regions,
                                         const PageGeometry& page) {
    std::vector<Group> groups(regions.size());
    for (size_t i = 0; i < regions.size(); ++i) {
        groups[i].bbox = regions[i].bbox;
        groups[i].polarity = regions[i].polarity;
        groups[i].members = {i};
    }

    // Union bounding boxes can grow into contact with boxes their members
    // never touched, so grouping repeats until no same-polarity boxes touch.
    for (bool changed = true; changed && groups.size() > 1;) {
        changed = false;
        UnionFind uf(groups.size());
        for (size_t i = 0; i < groups.size(); ++i)
            for (size_t j = i + 1; j < groups.size(); ++j)
                if (groups[i].polarity == groups[j].polarity &&
                    groups[i].bbox.touches(groups[j].bbox))
                    changed |= uf.unite(static_cast<int>(i), static_cast<int>(j));
        if (!changed) break;

        std::vector<Group> next;
        std::vector<int> slot(groups.size(), -1);
        for (size_t i = 0; i < groups.size(); ++i) {
            const int root = uf.find(static_cast<int>(i));
            if (slot[root] < 0) {
                slot[root] = static_cast<int>(next.size());
                next.push_back(groups[i]);
            } else {
                Group& g = next[static_cast<size_t>(slot[root])];
                g.bbox = g.bbox.unite(groups[i].bbox);
                g.members.insert(g.members.end(), groups[i].members.begin(),
                                 groups[i].members.end());
            }
        }
        groups = std::move(next);
    }

    // Deterministic output regardless of input order: canonical member order
    // inside each group, canonical group order across the page.
    const auto member_key = [&](size_t i) {
        const DefectRegion& r = regions[i];
        return std::make_tuple(r.bbox.y0, r.bbox.x0, r.bbox.y1, r.bbox.x1, r.size_px, r.severity);
    };
    for (Group& g : groups)
        std::sort(g.members.begin(), g.members.end(),
                  [&](size_t a, size_t b) { return member_key(a) < member_key(b); });
    std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
        return std::tuple_cat(rect_key(a.bbox), std::make_tuple(a.polarity)) <
               std::tuple_cat(rect_key(b.bbox), std::make_tuple(b.polarity));
    });

    std::vector<PageDefect> defects;
    defects.reserve(groups.size());
    for (const Group& group : groups) {
        PageDefect d;
        d.bbox = group.bbox;
        d.polarity = group.polarity;

        // Union of the member masks in page coordinates; the two grid passes
        // can cover the same pixels, so duplicates must not count twice.
        std::unordered_set<long long> pixels;
        long long sum_x = 0, sum_y = 0;
        double severity_weighted = 0.0;
        double weight_total = 0.0;
        for (const size_t gi : group.members) {
            const DefectRegion& reg = regions[gi];
            severity_weighted += reg.severity * reg.size_px;
            weight_total += reg.size_px;
            const int w = reg.block_box.width();
            for (size_t p = 0; p < reg.mask.size(); ++p) {
                if (!reg.mask[p]) continue;
                const long long x = reg.block_box.x0 + static_cast<long long>(p % w);
                const long long y = reg.block_box.y0 + static_cast<long long>(p / w);
                if (pixels.insert((y << 32) | (x & 0xffffffffLL)).second) {
                    sum_x += x;
                    sum_y += y;
                }
            }
        }
        d.size_px = static_cast<int>(pixels.size());
        d.size_mm2 = d.size_px * page.px_to_mm() * page.px_to_mm();
        d.severity = weight_total > 0.0 ? severity_weighted / weight_total : 0.0;
        if (!pixels.empty()) {
            const double n = static_cast<double>(pixels.size());
            const double cx = static_cast<double>(sum_x) / n + 0.5;  // pixel centers
            const double cy = static_cast<double>(sum_y) / n + 0.5;
            d.centroid_x_mm = (cx - page.width / 2.0) * page.px_to_mm();
            d.centroid_y_mm = (cy - page.height / 2.0) * page.px_to_mm();
        }
        defects.push_back(d);
    }
    return defects;
}

PageFeatureVector page_feature_vector(const std::vector<PageDefect>& defects,
                                      const PageGeometry&) {
    PageFeatureVector v;
    v.n_defects = static_cast<int>(defects.size());
    for (const PageDefect& d : defects) (d.polarity == Polarity::Light ? v.n_gray : v.n_solid)++;
    if (defects.empty()) return v;

    double size_sum = 0.0, sev_sum = 0.0, cx_sum = 0.0, cy_sum = 0.0;
    double size_max = defects[0].size_mm2, size_min = defects[0].size_mm2;
    double sev_max = defects[0].severity, sev_min = defects[0].severity;
    for (const PageDefect& d : defects) {
        size_sum += d.size_mm2;
        sev_sum += d.severity;
        cx_sum += d.centroid_x_mm;
        cy_sum += d.centroid_y_mm;
        size_max = std::max(size_max, d.size_mm2);
        size_min = std::min(size_min, d.size_mm2);
        sev_max = std::max(sev_max, d.severity);
        sev_min = std::min(sev_min, d.severity);
    }
    const double n = static_cast<double>(defects.size());
    const double size_mean = size_sum / n;
    double ss = 0.0;
    for (const PageDefect& d : defects) ss += (d.size_mm2 - size_mean) * (d.size_mm2 - size_mean);

    v.size_mean = size_mean;
    v.size_max = size_max;
    v.size_min = size_min;
    v.size_std = std::sqrt(ss / n);  // population spread; one defect -> 0
    v.severity_mean = sev_sum / n;
    v.severity_max = sev_max;
    v.severity_min = sev_min;
    v.centroid_mean_x_mm = cx_sum / n;
    v.centroid_mean_y_mm = cy_sum / n;
    return v;
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string opt_csv(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

std::string page_vector_to_json(const PageFeatureVector& v) {
    nlohmann::json j{{"n_defects", v.n_defects},
                     {"n_gray", v.n_gray},
                     {"n_solid", v.n_solid},
                     {"size_mean", opt_json(v.size_mean)},
                     {"size_max", opt_json(v.size_max)},
                     {"size_min", opt_json(v.size_min)},
                     {"size_std", opt_json(v.size_std)},
                     {"severity_mean", opt_json(v.severity_mean)},
                     {"severity_max", opt_json(v.severity_max)},
                     {"severity_min", opt_json(v.severity_min)},
                     {"centroid_mean_x_mm", opt_json(v.centroid_mean_x_mm)},
                     {"centroid_mean_y_mm", opt_json(v.centroid_mean_y_mm)}};
    return j.dump(2);
}

std::string page_vector_to_csv(const PageFeatureVector& v) {
    std::ostringstream out;
    out << "n_defects,n_gray,n_solid,size_mean,size_max,size_min,size_std,"
           "severity_mean,severity_max,severity_min,centroid_mean_x_mm,centroid_mean_y_mm\n";
    out << v.n_defects << ',' << v.n_gray << ',' << v.n_solid << ',' << opt_csv(v.size_mean) << ','
        << opt_csv(v.size_max) << ',' << opt_csv(v.size_min) << ',' << opt_csv(v.size_std) << ','
        << opt_csv(v.severity_mean) << ',' << opt_csv(v.severity_max) << ','
        << opt_csv(v.severity_min) << ',' << opt_csv(v.centroid_mean_x_mm) << ','
        << opt_csv(v.centroid_mean_y_mm) << '\n';
    return out.str();
}

SrgbRaster render_overlay(const SrgbRaster& page, const std::vector<PageDefect>& defects) {
    SrgbRaster out = page;
    for (const PageDefect& d : defects) {
        const std::uint8_t value = d.polarity == Polarity::Light ? 255 : 0;
        // Two nested 1 px outlines just outside the box keep the defect
        // pixels themselves visible.
        for (int e = 1; e <= 2; ++e)
            draw_rect_outline(out, {d.bbox.x0 - e, d.bbox.y0 - e, d.bbox.x1 + e, d.bbox.y1 + e},
                              value);
    }
    return out;
}

}  // namespace spotscan
