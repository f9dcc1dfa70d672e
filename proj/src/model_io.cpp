#include "hhri/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace hhri {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open for reading: " + path);
    return in;
}

void write_meta(std::ofstream& out, const MetaMap& meta) {
    for (const auto& [key, value] : meta) {
        out << "# " << key << " = " << value << "\n";
    }
}

MetaMap read_meta_lines(std::istream& in, std::string& first_data_line) {
    MetaMap meta;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                std::string key = line.substr(1, eq - 1);
                std::string value = line.substr(eq + 1);
                auto trim = [](std::string& s) {
                    s.erase(0, s.find_first_not_of(" \t"));
                    s.erase(s.find_last_not_of(" \t") + 1);
                };
                trim(key);
                trim(value);
                meta.emplace_back(key, value);
            }
            continue;
        }
        first_data_line = line;
        break;
    }
    return meta;
}

std::vector<double> split_doubles(const std::string& line) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        vals.push_back(tok.empty() ? std::nan("") : std::strtod(tok.c_str(), nullptr));
    }
    return vals;
}

std::string meta_value(const MetaMap& meta, const std::string& key, const std::string& fallback) {
    for (const auto& [k, v] : meta) {
        if (k == key) return v;
    }
    return fallback;
}

} // namespace

void save_island_csv(const std::string& path, const ReactiveIsland& island,
                     const MetaMap& meta) {
    auto out = open_out(path);
    write_meta(out, meta);
    out << "# channel = " << static_cast<int>(island.channel) << "\n";
    out << "# island_energy = " << format_double(island.section.energy) << "\n";
    out << "# island_y_c = " << format_double(island.section.y_c) << "\n";
    out << "# island_order = " << island.order << "\n";
    out << "x,p_x\n";
    for (const auto& pt : island.curve) {
        out << format_double(pt[0]) << "," << format_double(pt[1]) << "\n";
    }
}

ReactiveIsland load_island_csv(const std::string& path) {
    auto in = open_in(path);
    std::string header;
    const MetaMap meta = read_meta_lines(in, header);
    if (header.empty()) throw FormatError("island file has no header row: " + path);

    ReactiveIsland island;
    island.channel = static_cast<Channel>(std::stoi(meta_value(meta, "channel", "3")));
    island.section.energy = std::strtod(meta_value(meta, "island_energy", "0").c_str(), nullptr);
    island.section.y_c = std::strtod(meta_value(meta, "island_y_c", "0").c_str(), nullptr);
    island.order = std::stoi(meta_value(meta, "island_order", "1"));

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto vals = split_doubles(line);
        if (vals.size() != 2) throw FormatError("island row needs two columns: " + path);
        island.curve.push_back({vals[0], vals[1]});
    }
    return island;
}

void save_dataset_csv(const std::string& path, const LabeledDataset& ds, const MetaMap& meta) {
    auto out = open_out(path);
    write_meta(out, meta);
    out << "# horizon = " << format_double(ds.horizon) << "\n";
    out << "# seed = " << ds.seed << "\n";
    for (const auto& name : ds.feature_names) out << name << ",";
    out << "label,escape_time\n";
    for (Eigen::Index r = 0; r < ds.size(); ++r) {
        for (Eigen::Index c = 0; c < ds.features.cols(); ++c) {
            out << format_double(ds.features(r, c)) << ",";
        }
        const auto& label = ds.labels[static_cast<std::size_t>(r)];
        out << label.value << ","
            << format_double(label.escape_time ? *label.escape_time
                                               : std::numeric_limits<double>::quiet_NaN())
            << "\n";
    }
}

LabeledDataset load_dataset_csv(const std::string& path, MetaMap* meta_out) {
    auto in = open_in(path);
    std::string header;
    const MetaMap meta = read_meta_lines(in, header);
    if (meta_out) *meta_out = meta;
    if (header.empty()) throw FormatError("dataset file has no header row: " + path);

    std::vector<std::string> columns;
    {
        std::stringstream ss(header);
        std::string tok;
        while (std::getline(ss, tok, ',')) columns.push_back(tok);
    }
    if (columns.size() < 4 || columns[columns.size() - 2] != "label" ||
        columns.back() != "escape_time") {
        throw FormatError("dataset header must end with label,escape_time: " + path);
    }
    const std::size_t n_features = columns.size() - 2;

    LabeledDataset ds;
    ds.feature_names.assign(columns.begin(), columns.begin() + static_cast<long>(n_features));
    ds.horizon = std::strtod(meta_value(meta, "horizon", "30").c_str(), nullptr);
    ds.seed = std::stoull(meta_value(meta, "seed", "0"));

    SectionConfig section;
    section.energy = std::strtod(meta_value(meta, "energy", "0").c_str(), nullptr);
    section.y_c = std::strtod(meta_value(meta, "y_c", "0").c_str(), nullptr);

    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto vals = split_doubles(line);
        if (vals.size() != columns.size()) {
            throw FormatError("dataset row width mismatch: " + path);
        }
        rows.push_back(std::move(vals));
    }

    ds.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(n_features));
    ds.samples.resize(rows.size());
    ds.labels.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < n_features; ++c) {
            ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        ds.samples[r].x = rows[r][0];
        ds.samples[r].p_x = rows[r][1];
        ds.samples[r].section = section;
        ds.samples[r].p_y = 0.0;
        ds.labels[r].value = static_cast<int>(rows[r][n_features]);
        const double et = rows[r][n_features + 1];
        if (std::isfinite(et)) ds.labels[r].escape_time = et;
    }
    return ds;
}

void save_table_csv(const std::string& path, const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows, const MetaMap& meta) {
    auto out = open_out(path);
    write_meta(out, meta);
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << format_double(row[c]) << (c + 1 < row.size() ? "," : "\n");
        }
    }
}

namespace {

json meta_to_json(const MetaMap& meta) {
    json j = json::object();
    for (const auto& [k, v] : meta) j[k] = v;
    return j;
}

json eval_to_json(const EvaluationReport& e) {
    json j;
    j["test_accuracy"] = e.test_accuracy;
    j["per_class_accuracy"] = json::object();
    for (const auto& [cls, acc] : e.per_class_accuracy) {
        j["per_class_accuracy"][std::to_string(cls)] = acc;
    }
    if (e.boundary_agreement) j["boundary_agreement"] = *e.boundary_agreement;
    j["confusion"] = e.confusion;
    j["n_labeled_trajectories"] = e.n_labeled_trajectories;
    return j;
}

} // namespace

void save_model_json(const std::string& path, const SvcModel& model, const MetaMap& meta) {
    json j;
    j["format"] = "hhri-svc-1";
    j["config"] = meta_to_json(meta);
    j["classes"] = model.classes;
    j["feature_names"] = model.feature_names;
    if (model.scaler) {
        json s;
        s["shift"] = std::vector<double>(model.scaler->shift.data(),
                                         model.scaler->shift.data() + model.scaler->shift.size());
        s["scale"] = std::vector<double>(model.scaler->scale.data(),
                                         model.scaler->scale.data() + model.scaler->scale.size());
        j["scaler"] = s;
    } else {
        j["scaler"] = nullptr;
    }
    j["pairs"] = json::array();
    for (const BinarySvm& m : model.pairwise) {
        json p;
        p["class_pos"] = m.class_pos;
        p["class_neg"] = m.class_neg;
        p["C"] = m.kernel.C;
        p["gamma"] = m.kernel.gamma;
        p["bias"] = m.bias;
        p["converged"] = m.converged;
        p["support_rows"] = m.support_rows;
        p["dual_coefs"] = m.dual_coefs;
        json pts = json::array();
        for (Eigen::Index r = 0; r < m.support_points.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(m.support_points.cols()));
            for (Eigen::Index c = 0; c < m.support_points.cols(); ++c) {
                row[static_cast<std::size_t>(c)] = m.support_points(r, c);
            }
            pts.push_back(row);
        }
        p["support_points"] = pts;
        j["pairs"].push_back(p);
    }
    auto out = open_out(path);
    out << j.dump(1) << "\n";
}

SvcModel load_model_json(const std::string& path, MetaMap* meta_out) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("invalid model file " + path + ": " + e.what());
    }
    if (j.value("format", "") != "hhri-svc-1") {
        throw FormatError("unrecognized model format in " + path);
    }
    if (meta_out) {
        meta_out->clear();
        for (const auto& [k, v] : j["config"].items()) {
            meta_out->emplace_back(k, v.get<std::string>());
        }
    }
    SvcModel model;
    model.classes = j["classes"].get<std::vector<int>>();
    model.feature_names = j["feature_names"].get<std::vector<std::string>>();
    if (!j["scaler"].is_null()) {
        FeatureScaler s;
        const auto shift = j["scaler"]["shift"].get<std::vector<double>>();
        const auto scale = j["scaler"]["scale"].get<std::vector<double>>();
        s.shift = Eigen::Map<const Eigen::VectorXd>(shift.data(),
                                                    static_cast<Eigen::Index>(shift.size()));
        s.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(),
                                                    static_cast<Eigen::Index>(scale.size()));
        model.scaler = s;
    }
    for (const auto& p : j["pairs"]) {
        BinarySvm m;
        m.class_pos = p["class_pos"].get<int>();
        m.class_neg = p["class_neg"].get<int>();
        m.kernel.C = p["C"].get<double>();
        m.kernel.gamma = p["gamma"].get<double>();
        m.bias = p["bias"].get<double>();
        m.converged = p["converged"].get<bool>();
        m.support_rows = p["support_rows"].get<std::vector<int>>();
        m.dual_coefs = p["dual_coefs"].get<std::vector<double>>();
        const auto pts = p["support_points"].get<std::vector<std::vector<double>>>();
        const Eigen::Index rows = static_cast<Eigen::Index>(pts.size());
        const Eigen::Index cols =
            rows > 0 ? static_cast<Eigen::Index>(pts[0].size())
                     : static_cast<Eigen::Index>(model.feature_names.size());
        m.support_points.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                m.support_points(r, c) = pts[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            }
        }
        model.pairwise.push_back(std::move(m));
    }
    return model;
}

void save_report_json(const std::string& path, const TrainingReport& report,
                      const MetaMap& meta) {
    json j;
    j["format"] = "hhri-report-1";
    j["config"] = meta_to_json(meta);
    j["best_C"] = report.cv.best_C;
    j["best_gamma"] = report.cv.best_gamma;
    j["n_folds"] = report.cv.n_folds;
    j["support_count"] = report.support_count;
    j["cv_grid"] = json::array();
    for (const auto& cell : report.cv.grid) {
        json c;
        c["C"] = cell.C;
        c["gamma"] = cell.gamma;
        c["mean_accuracy"] = cell.mean_accuracy;
        c["fold_accuracies"] = cell.fold_accuracies;
        j["cv_grid"].push_back(c);
    }
    j["evaluation"] = eval_to_json(report.eval);
    if (!report.history.empty()) {
        j["history"] = json::array();
        for (std::size_t i = 0; i < report.history.size(); ++i) {
            json h = eval_to_json(report.history[i]);
            h["iteration"] = i;
            j["history"].push_back(h);
        }
    }
    auto out = open_out(path);
    out << j.dump(1) << "\n";
}

} // namespace hhri
