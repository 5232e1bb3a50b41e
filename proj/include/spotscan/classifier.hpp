#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spotscan {

// The seven blockwise features fed to the tree, in fixed index order.
struct FeatureVector7 {
    double mdl = 0.0;
    double ddl = 0.0;
    double dde = 0.0;
    double size_px = 0.0;
    double major_px = 0.0;
    double minor_px = 0.0;
    double severity = 0.0;

    double operator[](int i) const {
        const double* base = &mdl;
        return base[i];
    }
};

inline constexpr int kFeatureCount = 7;
inline constexpr std::array<const char*, kFeatureCount> kFeatureNames = {
    "mdl", "ddl", "dde", "size_px", "major_px", "minor_px", "severity"};

// c[i][j] = cost of predicting class j when the truth is i.
// Diagonal zero, off-diagonals positive.
struct CostMatrix {
    double c[2][2] = {{0.0, 1.0}, {1.0, 0.0}};

    // Cost matrix with c[1][0] = miss_cost and c[0][1] = 1.
    static CostMatrix with_miss_cost(double miss_cost);

    // Weight a sample contributes: the cost of getting its class wrong.
    double sample_weight(int label) const { return label == 1 ? c[1][0] : c[0][1]; }
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct TrainMeta {
    std::string dataset;
    std::int64_t sample_count = 0;
    int node_count = 0;
    int depth = 0;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    CostMatrix cost_used;
    int max_depth = 0;
    int min_leaf = 0;
    TrainMeta meta;
};

struct TrainConfig {
    int max_depth = 8;
    int min_leaf = 5;
};

struct Sample {
    FeatureVector7 x;
    int label = 0;  // 1 = defect
};

// Greedy top-down induction maximizing cost-weighted entropy gain.
// Split candidates are midpoints between consecutive sorted unique feature
// values; ties break to the lowest feature index, then lowest threshold;
// samples at a threshold go left (<=). Throws on an empty or single-class
// training set.
TreeModel train(const std::vector<Sample>& samples, const CostMatrix& cost,
                const TrainConfig& config = {}, const std::string& dataset_id = "");

int predict(const TreeModel& model, const FeatureVector7& x);

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct EvalResult {
    ConfusionCounts counts;
    std::optional<double> miss_rate;    // FN / (TP + FN); absent when no positives
    std::optional<double> false_alarm;  // FP / (FP + TN); absent when no negatives
};

EvalResult evaluate(const TreeModel& model, const std::vector<Sample>& samples);

struct RocPoint {
    double miss_cost = 0.0;
    double miss_rate = 0.0;    // mean over usable folds
    double false_alarm = 0.0;  // mean over usable folds
    int folds_used = 0;
};

// k-fold cross-validated sweep over miss costs (c[1][0] values with
// c[0][1] = 1). Folds are stratified deterministically by sample order;
// single-class folds are skipped with a note on stderr. Output is sorted
// by cost ascending.
std::vector<RocPoint> roc_sweep(const std::vector<Sample>& samples,
                                const std::vector<double>& miss_costs, int folds,
                                const TrainConfig& config = {});

void save_model(const TreeModel& model, const std::string& path);
TreeModel load_model(const std::string& path);
std::string model_to_json(const TreeModel& model);
TreeModel model_from_json(const std::string& text);

}  // namespace spotscan
