// spotscan command-line front end: detect / train / roc / gen.
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spotscan/classifier.hpp"
#include "spotscan/dataset.hpp"
#include "spotscan/pipeline.hpp"
#include "spotscan/png_io.hpp"
#include "spotscan/synthpage.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

json version_block() {
    return {{"tool", kToolVersion},
            {"dataset_format", "spotscan-dataset v1"},
            {"model_format", "spotscan-tree v1"}};
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

void save_png_atomic(const spotscan::SrgbRaster& raster, const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    spotscan::save_page(raster, tmp.string());
    fs::rename(tmp, path);
}

void write_dataset_atomic(const std::vector<spotscan::BlockRecord>& records,
                          const fs::path& path) {
    const fs::path tmp = path.string() + ".tmp";
    spotscan::write_dataset(records, tmp.string());
    fs::rename(tmp, path);
}

void write_report(const fs::path& path, const json& report) {
    write_file_atomic(path, report.dump(2) + "\n");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

// Training samples are the candidate rows (the ones carrying defect
// attributes); the rest of the dataset has no features for the tree.
std::vector<spotscan::Sample> samples_from_dataset(const std::string& path) {
    std::vector<spotscan::Sample> samples;
    for (const spotscan::BlockRecord& r : spotscan::read_dataset(path)) {
        if (const auto f = spotscan::record_features(r)) samples.push_back({*f, r.label});
    }
    return samples;
}

struct DetectOptions {
    std::vector<std::string> inputs;
    std::string out_dir;
    std::string model_path;
    std::string config_path;
    std::string dump_dde;
    int dpi = 600;
    int jobs = 1;
    double threshold = spotscan::kDefaultCandidateThreshold;
    int baseline_window = spotscan::kDefaultBaselineWindow;
    std::string channel = "delta_e";
    std::string method = "valley";
    int bins = spotscan::kDefaultHistogramBins;
};

void apply_config_file(DetectOptions& opt) {
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config " + opt.config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("config " + opt.config_path + ": " + e.what());
    }
    if (j.contains("dpi")) opt.dpi = j["dpi"].get<int>();
    if (j.contains("candidate")) {
        const json& c = j["candidate"];
        if (c.contains("threshold")) opt.threshold = c["threshold"].get<double>();
        if (c.contains("baseline_window")) opt.baseline_window = c["baseline_window"].get<int>();
    }
    if (j.contains("segment")) {
        const json& s = j["segment"];
        if (s.contains("channel")) opt.channel = s["channel"].get<std::string>();
        if (s.contains("method")) opt.method = s["method"].get<std::string>();
        if (s.contains("bins")) opt.bins = s["bins"].get<int>();
    }
}

spotscan::DetectConfig to_detect_config(const DetectOptions& opt, const spotscan::TreeModel* model) {
    spotscan::DetectConfig cfg;
    cfg.candidate_threshold = opt.threshold;
    cfg.baseline_window = opt.baseline_window;
    cfg.channel =
        opt.channel == "l_star" ? spotscan::Channel::Lstar : spotscan::Channel::DeltaE;
    cfg.method = opt.method == "otsu" ? spotscan::ThresholdMethod::Otsu
                                      : spotscan::ThresholdMethod::ValleyEmphasis;
    cfg.bins = opt.bins;
    cfg.model = model;
    return cfg;
}

json materialized_config(const DetectOptions& opt) {
    return {{"dpi", opt.dpi},
            {"candidate", {{"threshold", opt.threshold}, {"baseline_window", opt.baseline_window}}},
            {"segment", {{"channel", opt.channel}, {"method", opt.method}, {"bins", opt.bins}}},
            {"model", opt.model_path},
            {"out_dir", opt.out_dir},
            {"jobs", opt.jobs}};
}

struct PageOutcome {
    std::string input;
    bool ok = false;
    std::string error;
    int n_defects = 0;
    int n_blocks = 0;
    int n_candidates = 0;
    bool labeled = false;
    std::vector<std::string> outputs;
    double ms = 0.0;
};

fs::path sidecar_truth_path(const fs::path& input) {
    fs::path p = input;
    p.replace_extension();
    p += ".truth.json";
    return p;
}

PageOutcome process_page(const std::string& input, const DetectOptions& opt,
                         const spotscan::DetectConfig& cfg, bool single_input) {
    PageOutcome outcome;
    outcome.input = input;
    const auto start = std::chrono::steady_clock::now();
    try {
        const fs::path in_path(input);
        const fs::path dir = opt.out_dir.empty() ? in_path.parent_path() : fs::path(opt.out_dir);
        const std::string stem = in_path.stem().string();

        const spotscan::SrgbRaster raster = spotscan::load_page(input, opt.dpi);
        spotscan::PageResult result =
            spotscan::run_detect(raster, cfg, in_path.filename().string());
        outcome.n_defects = result.vector.n_defects;
        outcome.n_blocks = static_cast<int>(result.metrics.size());
        outcome.n_candidates = static_cast<int>(result.candidates.block_ids.size());

        const fs::path truth_path = sidecar_truth_path(in_path);
        if (fs::exists(truth_path)) {
            const spotscan::PageTruth truth = spotscan::read_truth(truth_path.string());
            spotscan::label_from_ground_truth(result.records, truth);
            outcome.labeled = true;
        }

        const auto emit = [&](const fs::path& p) { outcome.outputs.push_back(p.string()); };

        const fs::path vec_json = dir / (stem + ".page.json");
        write_file_atomic(vec_json, spotscan::page_vector_to_json(result.vector) + "\n");
        emit(vec_json);

        const fs::path vec_csv = dir / (stem + ".page.csv");
        write_file_atomic(vec_csv, spotscan::page_vector_to_csv(result.vector));
        emit(vec_csv);

        const fs::path blocks_csv = dir / (stem + ".blocks.csv");
        write_dataset_atomic(result.records, blocks_csv);
        emit(blocks_csv);

        const fs::path annotated = dir / (stem + ".annotated.png");
        save_png_atomic(spotscan::render_overlay(raster, result.defects), annotated);
        emit(annotated);

        if (!opt.dump_dde.empty()) {
            fs::path dde_path(opt.dump_dde);
            if (!single_input) {
                fs::path with_stem = dde_path.parent_path() /
                                     (dde_path.stem().string() + "-" + stem +
                                      dde_path.extension().string());
                dde_path = with_stem;
            }
            std::ostringstream dde;
            dde << "block_idx,dde,baseline,corrected\n";
            for (size_t i = 0; i < result.candidates.trace.size(); ++i) {
                const spotscan::DdeTraceRow& row = result.candidates.trace[i];
                dde << i << ',' << fmt17(row.dde) << ',' << fmt17(row.baseline) << ','
                    << fmt17(row.corrected) << '\n';
            }
            write_file_atomic(dde_path, dde.str());
            emit(dde_path);
        }
        outcome.ok = true;
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
    }
    outcome.ms = elapsed_ms(start);
    return outcome;
}

int cmd_detect(DetectOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    std::sort(opt.inputs.begin(), opt.inputs.end());

    spotscan::TreeModel model;
    const spotscan::TreeModel* model_ptr = nullptr;
    if (!opt.model_path.empty()) {
        try {
            model = spotscan::load_model(opt.model_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        model_ptr = &model;
    }
    const spotscan::DetectConfig cfg = to_detect_config(opt, model_ptr);

    if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);

    std::vector<PageOutcome> outcomes(opt.inputs.size());
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(opt.inputs.size())));
    std::atomic<size_t> next{0};
    const bool single = opt.inputs.size() == 1;
    const auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < opt.inputs.size(); i = next.fetch_add(1))
            outcomes[i] = process_page(opt.inputs[i], opt, cfg, single);
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    bool any_failed = false;
    json pages = json::array();
    for (const PageOutcome& o : outcomes) {
        json entry{{"input", o.input}, {"status", o.ok ? "ok" : "error"}, {"ms", o.ms}};
        if (o.ok) {
            entry["defects"] = o.n_defects;
            entry["blocks"] = o.n_blocks;
            entry["candidates"] = o.n_candidates;
            entry["labeled"] = o.labeled;
            entry["outputs"] = o.outputs;
            std::cout << o.input << ": ok, " << o.n_defects << " defect(s), "
                      << o.n_candidates << " candidate block(s)\n";
        } else {
            entry["error"] = o.error;
            std::cerr << o.input << ": error: " << o.error << "\n";
            any_failed = true;
        }
        pages.push_back(std::move(entry));
    }

    const json report{{"command", "detect"},          {"versions", version_block()},
                      {"timestamp", timestamp_utc()}, {"config", materialized_config(opt)},
                      {"pages", pages},               {"total_ms", elapsed_ms(start)}};
    const fs::path report_path =
        (opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir)) / "run_report.json";
    write_report(report_path, report);

    return any_failed ? 2 : 0;
}

int cmd_train(const std::string& dataset, double cost, const std::string& out_path, int max_depth,
              int min_leaf) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<spotscan::Sample> samples = samples_from_dataset(dataset);
    const spotscan::TreeModel model =
        spotscan::train(samples, spotscan::CostMatrix::with_miss_cost(cost),
                        {max_depth, min_leaf}, fs::path(dataset).filename().string());
    {
        const fs::path tmp = out_path + ".tmp";
        spotscan::save_model(model, tmp.string());
        fs::rename(tmp, out_path);
    }
    // Training-set rates; labeled as such (cross-validated rates come from roc).
    const spotscan::EvalResult eval = spotscan::evaluate(model, samples);
    std::cout << "trained on " << samples.size() << " candidate rows -> " << out_path
              << " (nodes " << model.meta.node_count << ", depth " << model.meta.depth << ")\n";

    json eval_json{{"tp", eval.counts.tp},
                   {"fp", eval.counts.fp},
                   {"fn", eval.counts.fn},
                   {"tn", eval.counts.tn},
                   {"miss_rate", eval.miss_rate ? json(*eval.miss_rate) : json(nullptr)},
                   {"false_alarm", eval.false_alarm ? json(*eval.false_alarm) : json(nullptr)},
                   {"scope", "training-set"}};
    const json report{
        {"command", "train"},
        {"versions", version_block()},
        {"timestamp", timestamp_utc()},
        {"config",
         {{"dataset", dataset}, {"cost", cost}, {"max_depth", max_depth}, {"min_leaf", min_leaf},
          {"out", out_path}}},
        {"samples", samples.size()},
        {"evaluation", eval_json},
        {"total_ms", elapsed_ms(start)}};
    write_report(out_path + ".report.json", report);
    return 0;
}

int cmd_roc(const std::string& dataset, const std::string& costs_arg, int folds,
            const std::string& out_path) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> costs;
    std::stringstream ss(costs_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        costs.push_back(std::stod(tok));
    }
    if (costs.empty()) throw std::runtime_error("no costs given");

    const std::vector<spotscan::Sample> samples = samples_from_dataset(dataset);
    const std::vector<spotscan::RocPoint> points = spotscan::roc_sweep(samples, costs, folds);

    std::ostringstream csv;
    csv << "cost,miss_rate,false_alarm\n";
    for (const spotscan::RocPoint& p : points)
        csv << fmt17(p.miss_cost) << ',' << fmt17(p.miss_rate) << ',' << fmt17(p.false_alarm)
            << '\n';
    write_file_atomic(out_path, csv.str());
    std::cout << "roc sweep over " << points.size() << " cost(s), " << samples.size()
              << " candidate rows -> " << out_path << "\n";

    json points_json = json::array();
    for (const spotscan::RocPoint& p : points)
        points_json.push_back({{"cost", p.miss_cost},
                               {"miss_rate", p.miss_rate},
                               {"false_alarm", p.false_alarm},
                               {"folds_used", p.folds_used}});
    const json report{{"command", "roc"},
                      {"versions", version_block()},
                      {"timestamp", timestamp_utc()},
                      {"config",
                       {{"dataset", dataset}, {"costs", costs}, {"folds", folds},
                        {"out", out_path}}},
                      {"samples", samples.size()},
                      {"points", points_json},
                      {"total_ms", elapsed_ms(start)}};
    write_report(out_path + ".report.json", report);
    return 0;
}

int cmd_gen(const std::string& spec_path, const std::string& out_path, std::string truth_path) {
    const auto start = std::chrono::steady_clock::now();
    const spotscan::PageSpec spec = spotscan::read_page_spec(spec_path);
    const spotscan::GeneratedPage page = spotscan::generate(spec);
    save_png_atomic(page.raster, out_path);
    if (truth_path.empty()) truth_path = sidecar_truth_path(out_path).string();
    {
        const fs::path tmp = truth_path + ".tmp";
        spotscan::write_truth(page.truth, tmp.string());
        fs::rename(tmp, truth_path);
    }
    std::cout << "generated " << out_path << " (" << spec.width << "x" << spec.height << ", "
              << spec.defects.size() << " defect(s)), truth " << truth_path << "\n";

    const json report{{"command", "gen"},
                      {"versions", version_block()},
                      {"timestamp", timestamp_utc()},
                      {"config", {{"spec", spec_path}, {"out", out_path}, {"truth", truth_path}}},
                      {"defects", spec.defects.size()},
                      {"total_ms", elapsed_ms(start)}};
    write_report(out_path + ".report.json", report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spotscan: local print-defect detection on constant-tint test pages"};
    app.require_subcommand(1);

    DetectOptions det;
    CLI::App* detect = app.add_subcommand("detect", "Run the detection pipeline on scanned pages");
    detect->add_option("inputs", det.inputs, "Input PNG pages")->required();
    detect->add_option("--out-dir", det.out_dir, "Output directory (default: beside each input)");
    detect->add_option("--model", det.model_path, "Decision-tree model JSON for refinement");
    detect->add_option("--config", det.config_path, "JSON config file");
    detect->add_option("--dump-dde", det.dump_dde, "Write the DDE/baseline/corrected trace CSV");
    auto* o_dpi = detect->add_option("--dpi", det.dpi, "Scan resolution")->check(CLI::PositiveNumber);
    detect->add_option("--jobs", det.jobs, "Parallel page workers")->check(CLI::PositiveNumber);
    auto* o_thr = detect->add_option("--threshold", det.threshold, "Candidate DDE threshold")
                      ->check(CLI::NonNegativeNumber);
    auto* o_win = detect->add_option("--baseline-window", det.baseline_window,
                                     "Baseline running-median window (odd)")
                      ->check(CLI::PositiveNumber);
    auto* o_chan = detect->add_option("--channel", det.channel, "Segmentation channel")
                       ->check(CLI::IsMember({"delta_e", "l_star"}));
    auto* o_meth = detect->add_option("--method", det.method, "Segmentation threshold method")
                       ->check(CLI::IsMember({"otsu", "valley"}));
    auto* o_bins = detect->add_option("--bins", det.bins, "Segmentation histogram bins")
                       ->check(CLI::PositiveNumber);

    std::string tr_dataset, tr_out;
    double tr_cost = 1.0;
    int tr_depth = 8, tr_leaf = 5;
    CLI::App* train = app.add_subcommand("train", "Train the cost-sensitive decision tree");
    train->add_option("--dataset", tr_dataset, "Blockwise dataset CSV")->required();
    train->add_option("--cost", tr_cost, "Miss cost c[1][0] (false-alarm cost is 1)")
        ->check(CLI::PositiveNumber);
    train->add_option("--out", tr_out, "Model JSON output path")->required();
    train->add_option("--max-depth", tr_depth, "Maximum tree depth")->check(CLI::PositiveNumber);
    train->add_option("--min-leaf", tr_leaf, "Minimum samples per leaf")
        ->check(CLI::PositiveNumber);

    std::string roc_dataset, roc_out, roc_costs = "0.5,1,2,4,8";
    int roc_folds = 5;
    CLI::App* roc = app.add_subcommand("roc", "Cross-validated miss/false-alarm sweep over costs");
    roc->add_option("--dataset", roc_dataset, "Blockwise dataset CSV")->required();
    roc->add_option("--costs", roc_costs, "Comma-separated miss costs");
    roc->add_option("--folds", roc_folds, "Cross-validation folds")->check(CLI::PositiveNumber);
    roc->add_option("--out", roc_out, "ROC CSV output path")->required();

    std::string gen_spec, gen_out, gen_truth;
    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic test page");
    gen->add_option("--spec", gen_spec, "Page spec JSON")->required();
    gen->add_option("--out", gen_out, "Output PNG path")->required();
    gen->add_option("--truth", gen_truth, "Ground-truth JSON path (default: <out>.truth.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage error
    }

    try {
        if (*detect) {
            // Precedence: flags > config file > defaults.
            if (!det.config_path.empty()) {
                DetectOptions file_opts = det;
                apply_config_file(file_opts);
                if (!o_dpi->count()) det.dpi = file_opts.dpi;
                if (!o_thr->count()) det.threshold = file_opts.threshold;
                if (!o_win->count()) det.baseline_window = file_opts.baseline_window;
                if (!o_chan->count()) det.channel = file_opts.channel;
                if (!o_meth->count()) det.method = file_opts.method;
                if (!o_bins->count()) det.bins = file_opts.bins;
            }
            if (det.baseline_window % 2 == 0) {
                std::cerr << "error: --baseline-window must be odd\n";
                return 1;
            }
            return cmd_detect(det);
        }
        if (*train) return cmd_train(tr_dataset, tr_cost, tr_out, tr_depth, tr_leaf);
        if (*roc) return cmd_roc(roc_dataset, roc_costs, roc_folds, roc_out);
        if (*gen) return cmd_gen(gen_spec, gen_out, gen_truth);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
