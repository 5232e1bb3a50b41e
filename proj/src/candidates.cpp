#include "spotscan/candidates.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace spotscan {

namespace {

double median_of(std::vector<double> v) {
    const size_t n = v.size();
    const size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    if (n % 2 == 1) return v[mid];
    const double hi = v[mid];
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

// 4-connected components over the retained blocks of one grid pass.
// Component ids are assigned in row-major discovery order.
std::vector<int> label_regions(const std::vector<const BlockMetrics*>& blocks) {
    std::map<std::pair<int, int>, size_t> by_pos;
    for (size_t i = 0; i < blocks.size(); ++i)
        by_pos[{blocks[i]->id.row, blocks[i]->id.col}] = i;

    std::vector<int> region(blocks.size(), -1);
    int next = 0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (region[i] >= 0) continue;
        std::vector<size_t> stack{i};
        region[i] = next;
        while (!stack.empty()) {
            const size_t cur = stack.back();
            stack.pop_back();
            const int r = blocks[cur]->id.row;
            const int c = blocks[cur]->id.col;
            const std::pair<int, int> nbrs[4] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
            for (const auto& nb : nbrs) {
                auto it = by_pos.find(nb);
                if (it == by_pos.end() || region[it->second] >= 0) continue;
                region[it->second] = next;
                stack.push_back(it->second);
            }
        }
        ++next;
    }
    return region;
}

}  // namespace

std::vector<double> running_median(const std::vector<double>& values, int window) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("baseline window must be odd and >= 1");
    const int n = static_cast<int>(values.size());
    const int half = window / 2;
    std::vector<double> medians(values.size());
    std::vector<double> win;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        win.assign(values.begin() + lo, values.begin() + hi + 1);
        medians[i] = median_of(std::move(win));
    }
    return medians;
}

std::vector<double> remove_baseline(const std::vector<double>& dde, int window) {
    const std::vector<double> baseline = running_median(dde, window);
    std::vector<double> corrected(dde.size());
    for (size_t i = 0; i < dde.size(); ++i) corrected[i] = std::max(0.0, dde[i] - baseline[i]);
    return corrected;
}

std::vector<DdeTraceRow> corrected_dde(const std::vector<BlockMetrics>& metrics, int window) {
    std::vector<DdeTraceRow> rows(metrics.size());
    for (size_t i = 0; i < metrics.size(); ++i) {
        rows[i].id = metrics[i].id;
        rows[i].box = metrics[i].box;
        rows[i].dde = metrics[i].dde;
    }

    int region_base = 0;
    for (const GridPass pass : {GridPass::Initial, GridPass::Shifted}) {
        std::vector<size_t> idx;
        std::vector<const BlockMetrics*> blocks;
        for (size_t i = 0; i < metrics.size(); ++i) {
            if (metrics[i].id.pass != pass) continue;
            idx.push_back(i);
            blocks.push_back(&metrics[i]);
        }
        if (blocks.empty()) continue;
        const std::vector<int> region = label_regions(blocks);
        const int region_count = *std::max_element(region.begin(), region.end()) + 1;

        for (int reg = 0; reg < region_count; ++reg) {
            // Row-major sequence of this region's blocks.
            std::vector<size_t> members;
            for (size_t k = 0; k < blocks.size(); ++k)
                if (region[k] == reg) members.push_back(k);
            std::sort(members.begin(), members.end(), [&](size_t lhs, size_t rhs) {
                return blocks[lhs]->id < blocks[rhs]->id;
            });

            std::vector<double> seq(members.size());
            for (size_t k = 0; k < members.size(); ++k) seq[k] = blocks[members[k]]->dde;
            const std::vector<double> baseline = running_median(seq, window);
            for (size_t k = 0; k < members.size(); ++k) {
                DdeTraceRow& row = rows[idx[members[k]]];
                row.region = region_base + reg;
                row.baseline = baseline[k];
                row.corrected = std::max(0.0, seq[k] - baseline[k]);
            }
        }
        region_base += region_count;
    }
    return rows;
}

CandidateSet select_candidates(const std::vector<BlockMetrics>& metrics, double threshold,
                               int window) {
    if (threshold < 0.0) throw std::invalid_argument("candidate threshold must be >= 0");
    CandidateSet set;
    set.threshold_used = threshold;
    set.trace = corrected_dde(metrics, window);
    for (DdeTraceRow& row : set.trace) {
        row.selected = row.corrected >= threshold;
        if (row.selected) set.block_ids.push_back(row.id);
    }
    return set;
}

}  // namespace spotscan
