#include "spotscan/synthpage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spotscan/colorspace.hpp"

namespace spotscan {

namespace {

constexpr double kInkScale = 0.25;  // ink = 0.25 x tint in linear RGB

double hwhm_to_sigma(double hwhm) { return hwhm / std::sqrt(2.0 * std::log(2.0)); }

Rect rect_from_json(const nlohmann::json& j) {
    return Rect{j.at("x0").get<int>(), j.at("y0").get<int>(), j.at("x1").get<int>(),
                j.at("y1").get<int>()};
}

nlohmann::json rect_to_json(const Rect& r) {
    return {{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}};
}

}  // namespace

std::vector<int> clustered_dot_ranks(int period) {
    if (period < 2 || period % 2 != 0)
        throw std::invalid_argument("halftone cell period must be even and >= 2");
    const int n = period * period;
    const double half = period / 2.0;
    // Two dot centers per cell on the 45-degree lattice; distances are
    // torus distances so the pattern tiles seamlessly.
    const double c1 = half - 0.5;
    struct Pos {
        double d2;
        int y, x;
    };
    std::vector<Pos> order;
    order.reserve(n);
    for (int y = 0; y < period; ++y) {
        for (int x = 0; x < period; ++x) {
            double best = 1e30;
            for (const double cy : {c1, c1 + half}) {
                for (const double cx : {c1, c1 + half}) {
                    // The two centers sit at (c1, c1) and (c1+half, c1+half);
                    // the other two corners belong to neighboring cells'
                    // centers, which the torus wrap reproduces exactly.
                    if ((cx > c1) != (cy > c1)) continue;
                    double dx = std::abs(x - cx);
                    double dy = std::abs(y - cy);
                    dx = std::min(dx, period - dx);
                    dy = std::min(dy, period - dy);
                    best = std::min(best, dx * dx + dy * dy);
                }
            }
            order.push_back({best, y, x});
        }
    }
    std::stable_sort(order.begin(), order.end(), [](const Pos& a, const Pos& b) {
        if (a.d2 != b.d2) return a.d2 < b.d2;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    std::vector<int> ranks(n, 0);
    for (int i = 0; i < n; ++i) ranks[order[i].y * period + order[i].x] = i;
    return ranks;
}

GeneratedPage generate(const PageSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0)
        throw std::invalid_argument("page dimensions must be positive");
    if (spec.dpi <= 0) throw std::invalid_argument("dpi must be positive");
    for (const DefectSpec& d : spec.defects) {
        if (d.rx <= 0.0 || d.ry <= 0.0) throw std::invalid_argument("defect radius must be > 0");
        const bool inside = std::any_of(spec.regions.begin(), spec.regions.end(),
                                        [&](const RegionSpec& r) {
                                            return r.box.contains(static_cast<int>(d.cx),
                                                                  static_cast<int>(d.cy));
                                        });
        if (!inside) throw std::invalid_argument("defect center lies outside every region");
    }

    struct RegionState {
        const RegionSpec* spec;
        std::vector<int> ranks;
        double lstar;  // tint lightness
        double y_ink;  // ink relative luminance
        std::array<std::uint8_t, 3> ink_srgb;
        Lab ink_lab;
    };
    const Lab paper_lab = srgb_to_lab(255, 255, 255);
    std::vector<RegionState> states;
    states.reserve(spec.regions.size());
    for (const RegionSpec& r : spec.regions) {
        RegionState s;
        s.spec = &r;
        s.ranks = clustered_dot_ranks(r.period);
        s.lstar = srgb_to_lab(r.tint[0], r.tint[1], r.tint[2]).l;
        double ink_lin[3];
        for (int c = 0; c < 3; ++c) ink_lin[c] = kInkScale * srgb_decode(r.tint[c]);
        s.y_ink = linear_luminance(ink_lin[0], ink_lin[1], ink_lin[2]);
        for (int c = 0; c < 3; ++c) s.ink_srgb[c] = srgb_encode(ink_lin[c]);
        s.ink_lab = srgb_to_lab(s.ink_srgb[0], s.ink_srgb[1], s.ink_srgb[2]);
        states.push_back(std::move(s));
    }

    struct DefectState {
        const DefectSpec* spec;
        double ca, sa, sx, sy;
        Rect support;  // pixels the profile can meaningfully reach
    };
    std::vector<DefectState> dstates;
    dstates.reserve(spec.defects.size());
    for (const DefectSpec& d : spec.defects) {
        DefectState s;
        s.spec = &d;
        const double rad = d.angle_deg * std::acos(-1.0) / 180.0;
        s.ca = std::cos(rad);
        s.sa = std::sin(rad);
        s.sx = hwhm_to_sigma(d.rx);
        s.sy = hwhm_to_sigma(d.ry);
        const double reach = 4.0 * std::max(s.sx, s.sy);
        s.support = Rect{static_cast<int>(std::floor(d.cx - reach)),
                         static_cast<int>(std::floor(d.cy - reach)),
                         static_cast<int>(std::ceil(d.cx + reach)) + 1,
                         static_cast<int>(std::ceil(d.cy + reach)) + 1};
        dstates.push_back(s);
    }

    SrgbRaster out = SrgbRaster::make(spec.width, spec.height, spec.dpi);
    std::fill(out.pixels.begin(), out.pixels.end(), 255);
    std::fill(out.validity.begin(), out.validity.end(), 0);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0);

    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            // One draw per pixel keeps the stream layout-independent.
            const double n = noise(rng);

            const RegionState* region = nullptr;
            for (const RegionState& s : states) {
                if (s.spec->box.contains(x, y)) {
                    region = &s;
                    break;
                }
            }
            if (!region) continue;
            bool masked = false;
            for (const Rect& m : spec.masks) {
                if (m.contains(x, y)) {
                    masked = true;
                    break;
                }
            }
            if (masked) continue;

            double lstar = region->lstar;
            for (const DefectState& d : dstates) {
                if (!d.support.contains(x, y)) continue;
                const double dx = x + 0.5 - d.spec->cx;
                const double dy = y + 0.5 - d.spec->cy;
                const double u = (dx * d.ca + dy * d.sa) / d.sx;
                const double v = (-dx * d.sa + dy * d.ca) / d.sy;
                lstar += d.spec->delta_l * std::exp(-0.5 * (u * u + v * v));
            }
            lstar = std::clamp(lstar, 0.0, 100.0);

            // Closed-form dot coverage that reproduces the target lightness:
            // mean Y = c*Y_ink + (1-c)*1 must equal Y(lstar).
            const double y_target = lstar_to_luminance(lstar);
            const double c = std::clamp((1.0 - y_target) / (1.0 - region->y_ink), 0.0, 1.0);

            const int period = region->spec->period;
            const int rank = region->ranks[(y % period) * period + (x % period)];
            const bool ink = c > (rank + 0.5) / (period * period);

            std::uint8_t* px = out.rgb(x, y);
            if (ink) {
                px[0] = region->ink_srgb[0];
                px[1] = region->ink_srgb[1];
                px[2] = region->ink_srgb[2];
            }  // else stays paper white

            if (spec.noise_sigma > 0.0) {
                Lab lab = ink ? region->ink_lab : paper_lab;
                lab.l = std::clamp(lab.l + n, 0.0, 100.0);
                const std::array<std::uint8_t, 3> noisy = lab_to_srgb(lab);
                px[0] = noisy[0];
                px[1] = noisy[1];
                px[2] = noisy[2];
            }
            out.validity[out.index(x, y)] = 1;
        }
    }

    GeneratedPage page;
    page.raster = std::move(out);
    page.truth.width = spec.width;
    page.truth.height = spec.height;
    page.truth.dpi = spec.dpi;
    for (const DefectSpec& d : spec.defects) {
        TruthDefect t;
        t.polarity = d.delta_l > 0.0 ? Polarity::Light : Polarity::Dark;
        t.cx = d.cx;
        t.cy = d.cy;
        t.rx = d.rx;
        t.ry = d.ry;
        t.angle_deg = d.angle_deg;
        page.truth.defects.push_back(t);
    }
    for (const RegionSpec& r : spec.regions)
        page.truth.regions.push_back(TruthRegion{r.box, r.name});
    return page;
}

PageSpec page_spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("page spec: ") + e.what());
    }
    try {
        PageSpec spec;
        spec.width = j.at("width").get<int>();
        spec.height = j.at("height").get<int>();
        spec.dpi = j.value("dpi", 600);
        spec.noise_sigma = j.value("noise_sigma", 0.0);
        spec.seed = j.value("seed", std::uint64_t{0});
        for (const auto& r : j.at("regions")) {
            RegionSpec rs;
            rs.box = rect_from_json(r);
            const auto& color = r.at("color");
            if (!color.is_array() || color.size() != 3)
                throw std::runtime_error("page spec: region color must be [r,g,b]");
            for (int c = 0; c < 3; ++c) {
                const int v = color[c].get<int>();
                if (v < 0 || v > 255) throw std::runtime_error("page spec: color out of range");
                rs.tint[c] = static_cast<std::uint8_t>(v);
            }
            rs.period = r.value("period", kDefaultCellPeriod);
            rs.name = r.value("name", "");
            spec.regions.push_back(std::move(rs));
        }
        for (const auto& d : j.value("defects", nlohmann::json::array())) {
            DefectSpec ds;
            ds.cx = d.at("cx").get<double>();
            ds.cy = d.at("cy").get<double>();
            ds.rx = d.at("rx").get<double>();
            ds.ry = d.value("ry", ds.rx);
            ds.angle_deg = d.value("angle_deg", 0.0);
            ds.delta_l = d.at("delta_l").get<double>();
            spec.defects.push_back(ds);
        }
        for (const auto& m : j.value("masks", nlohmann::json::array()))
            spec.masks.push_back(rect_from_json(m));
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("page spec: ") + e.what());
    }
}

std::string page_spec_to_json(const PageSpec& spec) {
    nlohmann::json j;
    j["version"] = 1;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["dpi"] = spec.dpi;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    j["regions"] = nlohmann::json::array();
    for (const RegionSpec& r : spec.regions) {
        nlohmann::json jr = rect_to_json(r.box);
        jr["color"] = {r.tint[0], r.tint[1], r.tint[2]};
        jr["period"] = r.period;
        jr["name"] = r.name;
        j["regions"].push_back(std::move(jr));
    }
    j["defects"] = nlohmann::json::array();
    for (const DefectSpec& d : spec.defects)
        j["defects"].push_back({{"cx", d.cx},
                                {"cy", d.cy},
                                {"rx", d.rx},
                                {"ry", d.ry},
                                {"angle_deg", d.angle_deg},
                                {"delta_l", d.delta_l}});
    j["masks"] = nlohmann::json::array();
    for (const Rect& m : spec.masks) j["masks"].push_back(rect_to_json(m));
    return j.dump(2);
}

PageSpec read_page_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("page spec: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return page_spec_from_json(buf.str());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string(e.what()) + " (" + path + ")");
    }
}

}  // namespace spotscan
