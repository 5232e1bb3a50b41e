#include "spotscan/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spotscan {

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line, const std::string& where) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::runtime_error(where + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& where, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw std::runtime_error(where + ": bad " + what + " value '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& where, const char* what) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        throw std::runtime_error(where + ": bad " + what + " value '" + s + "'");
    return static_cast<int>(v);
}

const char* polarity_name(Polarity p) { return p == Polarity::Light ? "light" : "dark"; }

Polarity parse_polarity(const std::string& s, const std::string& where) {
    if (s == "light") return Polarity::Light;
    if (s == "dark") return Polarity::Dark;
    throw std::runtime_error(where + ": bad polarity value '" + s + "'");
}

}  // namespace

void write_dataset(const std::vector<BlockRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot open " + path + " for writing");
    out << kDatasetVersionLine << '\n' << kDatasetHeader << '\n';
    for (const BlockRecord& r : records) {
        out << csv_escape(r.file) << ',' << r.block_idx << ',' << csv_escape(r.color) << ','
            << r.box.x0 << ',' << r.box.x1 << ',' << r.box.y0 << ',' << r.box.y1 << ','
            << fmt(r.mean_l) << ',' << fmt(r.mean_a) << ',' << fmt(r.mean_b) << ',' << fmt(r.dde)
            << ',' << fmt(r.mdl) << ',' << fmt(r.ddl) << ',' << r.label << ',';
        if (r.defect) {
            out << polarity_name(r.defect->polarity) << ',' << r.defect->size_px << ','
                << fmt(r.defect->major_px) << ',' << fmt(r.defect->minor_px) << ','
                << fmt(r.defect->severity);
        } else {
            out << ",,,,";
        }
        out << '\n';
    }
    if (!out.flush()) throw std::runtime_error("dataset: write failed for " + path);
}

std::vector<BlockRecord> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot open " + path);

    std::vector<BlockRecord> records;
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string where = path + ":" + std::to_string(line_no);
        if (!saw_header) {
            if (line != kDatasetHeader)
                throw std::runtime_error(where + ": unexpected header '" + line + "'");
            saw_header = true;
            continue;
        }
        const std::vector<std::string> f = csv_split(line, where);
        if (f.size() != 19)
            throw std::runtime_error(where + ": expected 19 fields, got " +
                                     std::to_string(f.size()));
        BlockRecord r;
        r.file = f[0];
        r.block_idx = parse_int(f[1], where, "block_idx");
        r.color = f[2];
        r.box = {parse_int(f[3], where, "x0"), parse_int(f[5], where, "y0"),
                 parse_int(f[4], where, "x1"), parse_int(f[6], where, "y1")};
        r.mean_l = parse_double(f[7], where, "mean_l");
        r.mean_a = parse_double(f[8], where, "mean_a");
        r.mean_b = parse_double(f[9], where, "mean_b");
        r.dde = parse_double(f[10], where, "dde");
        r.mdl = parse_double(f[11], where, "mdl");
        r.ddl = parse_double(f[12], where, "ddl");
        r.label = parse_int(f[13], where, "label");
        if (r.label != 0 && r.label != 1)
            throw std::runtime_error(where + ": label must be 0 or 1");
        const bool any_defect_field =
            !f[14].empty() || !f[15].empty() || !f[16].empty() || !f[17].empty() || !f[18].empty();
        if (any_defect_field) {
            BlockRecord::Defect d;
            d.polarity = parse_polarity(f[14], where);
            d.size_px = parse_int(f[15], where, "size_px");
            d.major_px = parse_double(f[16], where, "major_px");
            d.minor_px = parse_double(f[17], where, "minor_px");
            d.severity = parse_double(f[18], where, "severity");
            r.defect = d;
        }
        records.push_back(std::move(r));
    }
    if (!saw_header) throw std::runtime_error("dataset: " + path + " has no header line");
    return records;
}

std::optional<FeatureVector7> record_features(const BlockRecord& r) {
    if (!r.defect) return std::nullopt;
    FeatureVector7 f;
    f.mdl = r.mdl;
    f.ddl = r.ddl;
    f.dde = r.dde;
    f.size_px = r.defect->size_px;
    f.major_px = r.defect->major_px;
    f.minor_px = r.defect->minor_px;
    f.severity = r.defect->severity;
    return f;
}

void write_truth(const PageTruth& truth, const std::string& path) {
    nlohmann::json j;
    j["version"] = 1;
    j["page"] = {{"width", truth.width}, {"height", truth.height}, {"dpi", truth.dpi}};
    j["defects"] = nlohmann::json::array();
    for (const TruthDefect& d : truth.defects)
        j["defects"].push_back({{"polarity", polarity_name(d.polarity)},
                                {"cx", d.cx},
                                {"cy", d.cy},
                                {"rx", d.rx},
                                {"ry", d.ry},
                                {"angle_deg", d.angle_deg}});
    j["regions"] = nlohmann::json::array();
    for (const TruthRegion& r : truth.regions)
        j["regions"].push_back({{"x0", r.box.x0},
                                {"y0", r.box.y0},
                                {"x1", r.box.x1},
                                {"y1", r.box.y1},
                                {"color", r.color}});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("truth: cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out.flush()) throw std::runtime_error("truth: write failed for " + path);
}

PageTruth read_truth(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("truth: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("truth: " + path + ": " + e.what());
    }
    try {
        PageTruth t;
        const auto& page = j.at("page");
        t.width = page.at("width").get<int>();
        t.height = page.at("height").get<int>();
        t.dpi = page.value("dpi", 600);
        for (const auto& d : j.value("defects", nlohmann::json::array())) {
            TruthDefect td;
            td.polarity = parse_polarity(d.at("polarity").get<std::string>(), path);
            td.cx = d.at("cx").get<double>();
            td.cy = d.at("cy").get<double>();
            td.rx = d.at("rx").get<double>();
            td.ry = d.value("ry", td.rx);
            td.angle_deg = d.value("angle_deg", 0.0);
            t.defects.push_back(td);
        }
        for (const auto& r : j.value("regions", nlohmann::json::array())) {
            TruthRegion tr;
            tr.box = {r.at("x0").get<int>(), r.at("y0").get<int>(), r.at("x1").get<int>(),
                      r.at("y1").get<int>()};
            tr.color = r.value("color", "");
            t.regions.push_back(tr);
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("truth: " + path + ": " + e.what());
    }
}

double truth_overlap_fraction(const Rect& window, const TruthDefect& truth) {
    const double r = std::max(truth.rx, truth.ry);
    if (r <= 0.0) return 0.0;
    const double rad = truth.angle_deg * std::acos(-1.0) / 180.0;
    const double ca = std::cos(rad), sa = std::sin(rad);
    const int x_lo = static_cast<int>(std::floor(truth.cx - r));
    const int x_hi = static_cast<int>(std::ceil(truth.cx + r));
    const int y_lo = static_cast<int>(std::floor(truth.cy - r));
    const int y_hi = static_cast<int>(std::ceil(truth.cy + r));
    long long inside = 0, covered = 0;
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int x = x_lo; x <= x_hi; ++x) {
            const double dx = x + 0.5 - truth.cx;
            const double dy = y + 0.5 - truth.cy;
            const double u = (dx * ca + dy * sa) / truth.rx;
            const double v = (-dx * sa + dy * ca) / truth.ry;
            if (u * u + v * v > 1.0) continue;
            ++inside;
            if (window.contains(x, y)) ++covered;
        }
    }
    return inside > 0 ? static_cast<double>(covered) / static_cast<double>(inside) : 0.0;
}

void label_from_ground_truth(std::vector<BlockRecord>& records, const PageTruth& truth,
                             double min_fraction) {
    for (BlockRecord& r : records) {
        r.label = 0;
        for (const TruthDefect& d : truth.defects) {
            if (truth_overlap_fraction(r.box, d) >= min_fraction) {
                r.label = 1;
                break;
            }
        }
        for (const TruthRegion& region : truth.regions) {
            const int cx = r.box.x0 + r.box.width() / 2;
            const int cy = r.box.y0 + r.box.height() / 2;
            if (region.box.contains(cx, cy)) {
                r.color = region.color;
                break;
            }
        }
    }
}

}  // namespace spotscan
