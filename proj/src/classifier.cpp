#include "spotscan/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

namespace spotscan {

namespace {

using nlohmann::json;

double entropy(double w0, double w1) {
    const double total = w0 + w1;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (const double w : {w0, w1}) {
        if (w <= 0.0) continue;
        const double p = w / total;
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

struct Builder {
    const std::vector<Sample>& samples;
    CostMatrix cost;
    TrainConfig config;
    std::vector<TreeNode> nodes;
    int depth_reached = 0;

    double weight_of(size_t i) const { return cost.sample_weight(samples[i].label); }

    int majority_label(const std::vector<size_t>& idx) const {
        double w0 = 0.0, w1 = 0.0;
        for (const size_t i : idx) (samples[i].label == 1 ? w1 : w0) += weight_of(i);
        return w1 > w0 ? 1 : 0;  // tie goes to the negative class
    }

    // Best split over all features and midpoint thresholds; requires both
    // children to hold at least min_leaf samples. Gain must be strictly
    // positive for the split to count.
    std::optional<SplitChoice> best_split(const std::vector<size_t>& idx) const {
        double w0 = 0.0, w1 = 0.0;
        for (const size_t i : idx) (samples[i].label == 1 ? w1 : w0) += weight_of(i);
        const double parent_entropy = entropy(w0, w1);
        const double total_w = w0 + w1;
        if (parent_entropy <= 0.0) return std::nullopt;

        std::optional<SplitChoice> best;
        std::vector<size_t> order = idx;
        for (int f = 0; f < kFeatureCount; ++f) {
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                return samples[a].x[f] < samples[b].x[f];
            });
            double left_w0 = 0.0, left_w1 = 0.0;
            size_t left_n = 0;
            for (size_t k = 0; k + 1 < order.size(); ++k) {
                const size_t i = order[k];
                (samples[i].label == 1 ? left_w1 : left_w0) += weight_of(i);
                ++left_n;
                const double v = samples[i].x[f];
                const double next = samples[order[k + 1]].x[f];
                if (next <= v) continue;  // not a boundary between distinct values
                if (left_n < static_cast<size_t>(config.min_leaf)) continue;
                if (order.size() - left_n < static_cast<size_t>(config.min_leaf)) continue;
                const double threshold = v + 0.5 * (next - v);
                const double right_w0 = w0 - left_w0;
                const double right_w1 = w1 - left_w1;
                const double left_w = left_w0 + left_w1;
                const double right_w = right_w0 + right_w1;
                const double gain = parent_entropy -
                                    (left_w / total_w) * entropy(left_w0, left_w1) -
                                    (right_w / total_w) * entropy(right_w0, right_w1);
                if (gain <= 0.0) continue;
                if (!best || gain > best->gain) best = SplitChoice{f, threshold, gain};
            }
        }
        return best;
    }

    int build(const std::vector<size_t>& idx, int depth) {
        depth_reached = std::max(depth_reached, depth);
        const int node_index = static_cast<int>(nodes.size());
        nodes.emplace_back();

        std::optional<SplitChoice> split;
        if (depth < config.max_depth && idx.size() >= 2 * static_cast<size_t>(config.min_leaf))
            split = best_split(idx);
        if (!split) {
            nodes[node_index].label = majority_label(idx);
            return node_index;
        }

        std::vector<size_t> left_idx, right_idx;
        for (const size_t i : idx)
            (samples[i].x[split->feature] <= split->threshold ? left_idx : right_idx).push_back(i);

        nodes[node_index].feature = split->feature;
        nodes[node_index].threshold = split->threshold;
        nodes[node_index].left = build(left_idx, depth + 1);
        nodes[node_index].right = build(right_idx, depth + 1);
        return node_index;
    }
};

}  // namespace

CostMatrix CostMatrix::with_miss_cost(double miss_cost) {
    if (miss_cost <= 0.0) throw std::invalid_argument("miss cost must be > 0");
    CostMatrix m;
    m.c[1][0] = miss_cost;
    return m;
}

TreeModel train(const std::vector<Sample>& samples, const CostMatrix& cost,
                const TrainConfig& config, const std::string& dataset_id) {
    if (samples.empty()) throw std::invalid_argument("train: empty sample set");
    bool seen[2] = {false, false};
    for (const Sample& s : samples) {
        if (s.label != 0 && s.label != 1) throw std::invalid_argument("train: labels must be 0/1");
        seen[s.label] = true;
    }
    if (!seen[0] || !seen[1])
        throw std::invalid_argument("train: need at least one sample of each class");
    if (config.max_depth < 0 || config.min_leaf < 1)
        throw std::invalid_argument("train: bad config");

    Builder builder{samples, cost, config, {}, 0};
    std::vector<size_t> idx(samples.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    builder.build(idx, 0);

    TreeModel model;
    model.nodes = std::move(builder.nodes);
    model.cost_used = cost;
    model.max_depth = config.max_depth;
    model.min_leaf = config.min_leaf;
    model.meta.dataset = dataset_id;
    model.meta.sample_count = static_cast<std::int64_t>(samples.size());
    model.meta.node_count = static_cast<int>(model.nodes.size());
    model.meta.depth = builder.depth_reached;
    return model;
}

int predict(const TreeModel& model, const FeatureVector7& x) {
    if (model.nodes.empty()) throw std::invalid_argument("predict: empty model");
    int cur = 0;
    while (!model.nodes[cur].is_leaf()) {
        const TreeNode& n = model.nodes[cur];
        cur = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return model.nodes[cur].label;
}

EvalResult evaluate(const TreeModel& model, const std::vector<Sample>& samples) {
    if (samples.empty()) throw std::invalid_argument("evaluate: empty sample set");
    EvalResult r;
    for (const Sample& s : samples) {
        const int pred = predict(model, s.x);
        if (s.label == 1)
            (pred == 1 ? r.counts.tp : r.counts.fn) += 1;
        else
            (pred == 1 ? r.counts.fp : r.counts.tn) += 1;
    }
    if (r.counts.tp + r.counts.fn > 0)
        r.miss_rate = static_cast<double>(r.counts.fn) /
                      static_cast<double>(r.counts.tp + r.counts.fn);
    if (r.counts.fp + r.counts.tn > 0)
        r.false_alarm = static_cast<double>(r.counts.fp) /
                        static_cast<double>(r.counts.fp + r.counts.tn);
    return r;
}

std::vector<RocPoint> roc_sweep(const std::vector<Sample>& samples,
                                const std::vector<double>& miss_costs, int folds,
                                const TrainConfig& config) {
    if (folds < 2) throw std::invalid_argument("roc_sweep: need >= 2 folds");

    // Stratified fold assignment by order of appearance within each class.
    std::vector<int> fold_of(samples.size());
    int pos_seen = 0, neg_seen = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        int& seen = samples[i].label == 1 ? pos_seen : neg_seen;
        fold_of[i] = seen % folds;
        ++seen;
    }

    std::vector<double> costs = miss_costs;
    std::sort(costs.begin(), costs.end());

    std::vector<RocPoint> points;
    for (const double miss_cost : costs) {
        RocPoint pt;
        pt.miss_cost = miss_cost;
        double miss_sum = 0.0, fa_sum = 0.0;
        for (int fold = 0; fold < folds; ++fold) {
            std::vector<Sample> train_set, test_set;
            for (size_t i = 0; i < samples.size(); ++i)
                (fold_of[i] == fold ? test_set : train_set).push_back(samples[i]);

            const auto has_both = [](const std::vector<Sample>& set) {
                bool seen[2] = {false, false};
                for (const Sample& s : set) seen[s.label] = true;
                return seen[0] && seen[1];
            };
            if (!has_both(train_set) || !has_both(test_set)) {
                std::cerr << "roc_sweep: skipping single-class fold " << fold << "\n";
                continue;
            }

            const TreeModel model =
                train(train_set, CostMatrix::with_miss_cost(miss_cost), config);
            const EvalResult r = evaluate(model, test_set);
            miss_sum += r.miss_rate.value_or(0.0);
            fa_sum += r.false_alarm.value_or(0.0);
            ++pt.folds_used;
        }
        if (pt.folds_used > 0) {
            pt.miss_rate = miss_sum / pt.folds_used;
            pt.false_alarm = fa_sum / pt.folds_used;
        }
        points.push_back(pt);
    }
    return points;
}

std::string model_to_json(const TreeModel& model) {
    json nodes = json::array();
    for (const TreeNode& n : model.nodes) {
        if (n.is_leaf())
            nodes.push_back(json{{"label", n.label}});
        else
            nodes.push_back(json{{"feature", n.feature},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right}});
    }
    json j{{"format", "spotscan-tree"},
           {"version", 1},
           {"features", kFeatureNames},
           {"cost", {{model.cost_used.c[0][0], model.cost_used.c[0][1]},
                     {model.cost_used.c[1][0], model.cost_used.c[1][1]}}},
           {"max_depth", model.max_depth},
           {"min_leaf", model.min_leaf},
           {"train_meta",
            {{"dataset", model.meta.dataset},
             {"sample_count", model.meta.sample_count},
             {"node_count", model.meta.node_count},
             {"depth", model.meta.depth}}},
           {"nodes", std::move(nodes)}};
    return j.dump(2);
}

TreeModel model_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "spotscan-tree")
        throw std::runtime_error("model: unrecognized format tag");
    if (j.at("version").get<int>() != 1) throw std::runtime_error("model: unsupported version");

    TreeModel model;
    const auto& cost = j.at("cost");
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) model.cost_used.c[i][k] = cost.at(i).at(k).get<double>();
    model.max_depth = j.at("max_depth").get<int>();
    model.min_leaf = j.at("min_leaf").get<int>();
    const auto& meta = j.at("train_meta");
    model.meta.dataset = meta.at("dataset").get<std::string>();
    model.meta.sample_count = meta.at("sample_count").get<std::int64_t>();
    model.meta.node_count = meta.at("node_count").get<int>();
    model.meta.depth = meta.at("depth").get<int>();

    for (const auto& node : j.at("nodes")) {
        TreeNode n;
        if (node.contains("label")) {
            n.label = node.at("label").get<int>();
        } else {
            n.feature = node.at("feature").get<int>();
            n.threshold = node.at("threshold").get<double>();
            n.left = node.at("left").get<int>();
            n.right = node.at("right").get<int>();
            if (n.feature < 0 || n.feature >= kFeatureCount)
                throw std::runtime_error("model: feature index out of range");
        }
        model.nodes.push_back(n);
    }
    if (model.nodes.empty()) throw std::runtime_error("model: no nodes");
    return model;
}

void save_model(const TreeModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("model: cannot write " + path);
    out << model_to_json(model) << "\n";
}

TreeModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model: cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_json(text);
}

}  // namespace spotscan
