#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spotscan/blockgrid.hpp"

using namespace spotscan;

namespace {

LabRaster uniform_raster(int w, int h, float l) {
    LabRaster r = LabRaster::make(w, h);
    for (auto& v : r.L) v = l;
    return r;
}

// Straight re-derivation of the block statistics for oracle comparison.
struct OracleMetrics {
    double mean_l, mean_a, mean_b, mde, dde, mdl, ddl;
    int valid_count;
};

OracleMetrics oracle_metrics(const LabRaster& r, const Rect& box) {
    std::vector<double> ls, as, bs;
    for (int y = box.y0; y < box.y1; ++y)
        for (int x = box.x0; x < box.x1; ++x) {
            const size_t p = r.index(x, y);
            if (!r.validity[p]) continue;
            ls.push_back(r.L[p]);
            as.push_back(r.a[p]);
            bs.push_back(r.b[p]);
        }
    const int n = static_cast<int>(ls.size());
    OracleMetrics o{};
    o.valid_count = n;
    for (int i = 0; i < n; ++i) {
        o.mean_l += ls[i];
        o.mean_a += as[i];
        o.mean_b += bs[i];
    }
    o.mean_l /= n;
    o.mean_a /= n;
    o.mean_b /= n;
    std::vector<double> de(n), dl(n);
    for (int i = 0; i < n; ++i) {
        de[i] = std::sqrt((ls[i] - o.mean_l) * (ls[i] - o.mean_l) +
                          (as[i] - o.mean_a) * (as[i] - o.mean_a) +
                          (bs[i] - o.mean_b) * (bs[i] - o.mean_b));
        dl[i] = std::fabs(ls[i] - o.mean_l);
        o.mde += de[i];
        o.mdl += dl[i];
    }
    o.mde /= n;
    o.mdl /= n;
    double ss_de = 0.0, ss_dl = 0.0;
    for (int i = 0; i < n; ++i) {
        ss_de += (de[i] - o.mde) * (de[i] - o.mde);
        ss_dl += (dl[i] - o.mdl) * (dl[i] - o.mdl);
    }
    o.dde = std::sqrt(ss_de / (n - 1));
    o.ddl = std::sqrt(ss_dl / (n - 1));
    return o;
}

double rel_err(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("750x750 partitions into 100 + 121 windows") {
    const LabRaster r = uniform_raster(750, 750, 50.0f);
    const auto initial = partition(r, GridPass::Initial);
    const auto shifted = partition(r, GridPass::Shifted);
    CHECK(initial.size() == 100);
    CHECK(shifted.size() == 121);

    // Each pass tiles the page exactly: disjoint boxes covering every pixel.
    for (const auto& windows : {initial, shifted}) {
        long long area = 0;
        for (const auto& w : windows) area += w.box.area();
        CHECK(area == 750LL * 750LL);
        for (size_t i = 0; i < windows.size(); ++i)
            for (size_t j = i + 1; j < windows.size(); ++j)
                CHECK(windows[i].box.intersect(windows[j].box).empty());
    }

    // The shifted pass leads with 35 px strips, then full 75 px blocks.
    CHECK(shifted[0].box == Rect{0, 0, 35, 35});
    CHECK(shifted[1].box == Rect{35, 0, 110, 35});
    CHECK(shifted.back().box == Rect{710, 710, 750, 750});

    CHECK(dual_pass_metrics(r).size() == 221);
}

TEST_CASE("partial edge windows keep their true extent") {
    const LabRaster r = uniform_raster(100, 80, 50.0f);
    const auto initial = partition(r, GridPass::Initial);
    REQUIRE(initial.size() == 4);
    CHECK(initial[0].box == Rect{0, 0, 75, 75});
    CHECK(initial[1].box == Rect{75, 0, 100, 75});
    CHECK(initial[2].box == Rect{0, 75, 75, 80});
    CHECK(initial[3].box == Rect{75, 75, 100, 80});
    CHECK(initial[3].id == BlockId{GridPass::Initial, 1, 1});
}

TEST_CASE("low-validity windows are dropped by the fraction floor") {
    LabRaster r = uniform_raster(75, 75, 50.0f);
    // 30 of 75 columns valid: fraction 0.4.
    for (int y = 0; y < 75; ++y)
        for (int x = 0; x < 75; ++x) r.validity[r.index(x, y)] = x < 30 ? 1 : 0;

    CHECK(partition(r, GridPass::Initial).empty());
    CHECK(partition(r, GridPass::Initial, 0.4).size() == 1);
    CHECK(partition(r, GridPass::Initial, 0.3).size() == 1);
}

TEST_CASE("two-level block: hand-computed statistics") {
    // 5 pixels at L=50 and 5 at L=60: mean 55, every |dL| = 5, so the
    // mean deviations are 5 and both spreads are exactly 0.
    LabRaster r = LabRaster::make(10, 1);
    for (int x = 0; x < 10; ++x) r.L[r.index(x, 0)] = x < 5 ? 50.0f : 60.0f;
    const auto m = compute_metrics(r, BlockWindow{{}, Rect{0, 0, 10, 1}});
    REQUIRE(m.has_value());
    CHECK(m->valid_count == 10);
    CHECK(m->mean_l == doctest::Approx(55.0).epsilon(1e-12));
    CHECK(m->mde == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(m->mdl == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(m->dde == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m->ddl == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("three-level block: nonzero deviation spread") {
    // L values {50,50,60,60,70,70}: mean 60, |dL| = {10,10,0,0,10,10},
    // mean 20/3 and sample variance (400/3)/5 = 80/3.
    LabRaster r = LabRaster::make(6, 1);
    const float ls[6] = {50, 50, 60, 60, 70, 70};
    for (int x = 0; x < 6; ++x) r.L[r.index(x, 0)] = ls[x];
    const auto m = compute_metrics(r, BlockWindow{{}, Rect{0, 0, 6, 1}});
    REQUIRE(m.has_value());
    CHECK(m->mean_l == doctest::Approx(60.0).epsilon(1e-12));
    CHECK(m->mde == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    CHECK(m->mdl == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    CHECK(m->dde == doctest::Approx(std::sqrt(80.0 / 3.0)).epsilon(1e-12));
    CHECK(m->ddl == doctest::Approx(std::sqrt(80.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("uniform pages have zero fluctuation everywhere") {
    const LabRaster r = uniform_raster(200, 150, 50.0f);
    for (const auto& m : dual_pass_metrics(r)) {
        CHECK(m.mean_l == 50.0);
        CHECK(m.mde == 0.0);
        CHECK(m.dde == 0.0);
        CHECK(m.mdl == 0.0);
        CHECK(m.ddl == 0.0);
    }
}

TEST_CASE("metrics match an independent oracle on random blocks") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<float> ld(0.0f, 100.0f), cd(-25.0f, 25.0f);
    for (int trial = 0; trial < 60; ++trial) {
        LabRaster r = LabRaster::make(75, 75);
        for (size_t p = 0; p < r.L.size(); ++p) {
            r.L[p] = ld(rng);
            r.a[p] = cd(rng);
            r.b[p] = cd(rng);
            r.validity[p] = (rng() % 10 == 0) ? 0 : 1;
        }
        const auto m = compute_metrics(r, BlockWindow{{}, Rect{0, 0, 75, 75}});
        REQUIRE(m.has_value());
        const OracleMetrics o = oracle_metrics(r, Rect{0, 0, 75, 75});
        CHECK(m->valid_count == o.valid_count);
        CHECK(rel_err(m->mean_l, o.mean_l) <= 1e-9);
        CHECK(rel_err(m->mde, o.mde) <= 1e-9);
        CHECK(rel_err(m->dde, o.dde) <= 1e-9);
        CHECK(rel_err(m->mdl, o.mdl) <= 1e-9);
        CHECK(rel_err(m->ddl, o.ddl) <= 1e-9);
    }
}

TEST_CASE("metrics are invariant under whole-block translation") {
    // Same content pasted at (0,0) and at (75,75): bit-identical statistics.
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> ld(20.0f, 80.0f);
    LabRaster r = LabRaster::make(150, 150);
    for (int y = 0; y < 75; ++y)
        for (int x = 0; x < 75; ++x) {
            const float v = ld(rng);
            r.L[r.index(x, y)] = v;
            r.L[r.index(x + 75, y + 75)] = v;
        }
    const auto a = compute_metrics(r, BlockWindow{{}, Rect{0, 0, 75, 75}});
    const auto b = compute_metrics(r, BlockWindow{{}, Rect{75, 75, 150, 150}});
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->mean_l == b->mean_l);
    CHECK(a->mde == b->mde);
    CHECK(a->dde == b->dde);
    CHECK(a->mdl == b->mdl);
    CHECK(a->ddl == b->ddl);
}

TEST_CASE("windows with fewer than 2 valid pixels are skipped") {
    LabRaster r = uniform_raster(10, 10, 50.0f);
    for (auto& v : r.validity) v = 0;
    r.validity[r.index(3, 3)] = 1;
    CHECK_FALSE(compute_metrics(r, BlockWindow{{}, Rect{0, 0, 10, 10}}).has_value());

    // A fully valid 76x76 page: the Initial pass produces a 1x1 corner
    // window (fraction 1.0, but a single pixel) that must be counted as
    // skipped, leaving 3 Initial + 4 Shifted metric rows.
    const LabRaster full = uniform_raster(76, 76, 50.0f);
    int skipped = -1;
    const auto metrics = dual_pass_metrics(full, 0.5, &skipped);
    CHECK(skipped == 1);
    CHECK(metrics.size() == 7);
}
