#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hhri/model_io.hpp"
#include "hhri/parallel.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace hhri;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitFormat = 4;

struct CommonOpts {
    double mass_x = 1.0, mass_y = 1.0;
    double omega_x = 1.0, omega_y = 1.0;
    double delta = 1.0;
    double energy = 0.17;
    double y_c = 0.0;
    double horizon = 30.0;
    double rel_tol = 1e-12, abs_tol = 1e-12;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir;

    SystemParams params() const {
        SystemParams p;
        p.m_x = mass_x;
        p.m_y = mass_y;
        p.omega_x = omega_x;
        p.omega_y = omega_y;
        p.delta = delta;
        p.validate();
        return p;
    }
    SectionConfig section() const { return SectionConfig{y_c, energy}; }

    std::string resolve(const std::string& path) const {
        if (out_dir.empty() || fs::path(path).is_absolute()) return path;
        fs::create_directories(out_dir);
        return (fs::path(out_dir) / path).string();
    }

    MetaMap meta(const std::string& command) const {
        MetaMap m;
        m.emplace_back("command", command);
        m.emplace_back("mass_x", format_double(mass_x));
        m.emplace_back("mass_y", format_double(mass_y));
        m.emplace_back("omega_x", format_double(omega_x));
        m.emplace_back("omega_y", format_double(omega_y));
        m.emplace_back("delta", format_double(delta));
        m.emplace_back("energy", format_double(energy));
        m.emplace_back("y_c", format_double(y_c));
        m.emplace_back("horizon", format_double(horizon));
        m.emplace_back("rel_tol", format_double(rel_tol));
        m.emplace_back("abs_tol", format_double(abs_tol));
        m.emplace_back("seed", std::to_string(seed));
        m.emplace_back("threads", std::to_string(num_threads()));
        return m;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--mass-x", o.mass_x, "x mass");
    cmd->add_option("--mass-y", o.mass_y, "y mass");
    cmd->add_option("--omega-x", o.omega_x, "x frequency");
    cmd->add_option("--omega-y", o.omega_y, "y frequency");
    cmd->add_option("--delta", o.delta, "cubic coupling coefficient");
    cmd->add_option("--energy", o.energy, "total energy E");
    cmd->add_option("--section", o.y_c, "section position y_c");
    cmd->add_option("--horizon", o.horizon, "label/LD integration horizon");
    cmd->add_option("--rel-tol", o.rel_tol, "integrator relative tolerance");
    cmd->add_option("--abs-tol", o.abs_tol, "integrator absolute tolerance");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    cmd->add_option("--out-dir", o.out_dir, "default output directory")
        ->envname("HHRI_OUT_DIR");
}

std::vector<double> parse_grid_list(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) vals.push_back(std::strtod(tok.c_str(), nullptr));
    }
    return vals;
}

std::string channel_color(int channel) {
    switch (channel) {
        case 1: return "red";
        case 2: return "green";
        case 3: return "blue";
        default: return "black";
    }
}

// ---------------------------------------------------------------------------
// island
// ---------------------------------------------------------------------------

struct IslandOpts {
    CommonOpts common;
    std::string saddle = "top";
    int n_seeds = 400;
    double t_span = 20.0;
    std::string out = "island.csv";
    std::string fibers_out;
};

int run_island(const IslandOpts& o) {
    const SystemParams params = o.common.params();
    const SectionConfig section = o.common.section();
    const SaddleId saddle = o.saddle == "top"    ? SaddleId::Top
                            : o.saddle == "left" ? SaddleId::Left
                                                 : SaddleId::Right;

    const PeriodicOrbit orbit = orbit_at_energy(params, saddle, section.energy);
    const MonodromyAnalysis mono = monodromy(params, orbit);
    const Side side = find_well_side(params, mono, orbit, Stability::Stable);
    const ManifoldBranch branch =
        globalize_manifold(params, mono, orbit, Stability::Stable, side, o.n_seeds, o.t_span);
    const ReactiveIsland island = extract_reactive_island(params, branch, section);

    MetaMap meta = o.common.meta("island");
    meta.emplace_back("saddle", o.saddle);
    meta.emplace_back("n_seeds", std::to_string(o.n_seeds));
    meta.emplace_back("t_span", format_double(o.t_span));
    meta.emplace_back("orbit_x0", format_double(orbit.initial_state.x));
    meta.emplace_back("orbit_y0", format_double(orbit.initial_state.y));
    meta.emplace_back("orbit_period", format_double(orbit.period));
    save_island_csv(o.common.resolve(o.out), island, meta);
    std::cout << "island: channel " << static_cast<int>(island.channel) << ", "
              << island.curve.size() << " points -> " << o.common.resolve(o.out) << "\n";

    if (!o.fibers_out.empty()) {
        std::vector<std::vector<double>> rows;
        for (std::size_t f = 0; f < branch.fibers.size(); ++f) {
            const Trajectory& fiber = branch.fibers[f];
            const std::size_t stride = std::max<std::size_t>(1, fiber.states.size() / 240);
            for (std::size_t k = 0; k < fiber.states.size(); k += stride) {
                const PhaseState& s = fiber.states[k];
                rows.push_back({static_cast<double>(f), fiber.times[k], s.x, s.y, s.p_x, s.p_y});
            }
        }
        MetaMap fmeta = meta;
        fmeta.emplace_back("stability", "stable");
        save_table_csv(o.common.resolve(o.fibers_out), {"fiber", "t", "x", "y", "p_x", "p_y"},
                       rows, fmeta);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// dataset
// ---------------------------------------------------------------------------

struct DatasetOpts {
    CommonOpts common;
    std::string grid = "100,100";
    bool with_ld = false;
    std::string out = "dataset.csv";
};

int run_dataset(const DatasetOpts& o) {
    const auto dims = parse_grid_list(o.grid);
    if (dims.size() != 2) throw CLI::ValidationError("--grid", "expected NX,NPX");
    const LabeledDataset ds =
        build_dataset(o.common.params(), o.common.section(), static_cast<int>(dims[0]),
                      static_cast<int>(dims[1]), o.common.horizon, o.with_ld, o.common.seed);
    MetaMap meta = o.common.meta("dataset");
    meta.emplace_back("grid", o.grid);
    meta.emplace_back("ld", o.with_ld ? "on" : "off");
    save_dataset_csv(o.common.resolve(o.out), ds, meta);
    std::cout << "dataset: " << ds.size() << " samples -> " << o.common.resolve(o.out) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    CommonOpts common;
    std::string mode = "fixed";
    std::string dataset_file;
    std::string model_out = "model.json";
    std::string report_out = "report.json";
    std::string c_grid, gamma_grid;
    int nx = 100, npx = 100;
    int holdout = 2000;
    double smo_tol = 1e-3;
    long smo_max_iter = 200000;
    // active learning
    int al_initial_nx = 30, al_initial_npx = 30;
    int al_sv_per_iter = 10;
    int al_pts_per_sv = 1;
    double al_sigma = 1.0;
    double al_target = 0.99;
    int al_max_iters = 200;
};

int run_train(const TrainOpts& o) {
    PipelineConfig cfg;
    cfg.params = o.common.params();
    cfg.section = o.common.section();
    cfg.nx = o.nx;
    cfg.npx = o.npx;
    cfg.horizon = o.common.horizon;
    cfg.seed = o.common.seed;
    cfg.n_holdout = o.holdout;
    cfg.solve = SolveOptions{o.smo_tol, o.smo_max_iter};
    if (!o.c_grid.empty()) cfg.C_grid = parse_grid_list(o.c_grid);
    if (!o.gamma_grid.empty()) cfg.gamma_grid = parse_grid_list(o.gamma_grid);

    MetaMap meta = o.common.meta("train");
    meta.emplace_back("mode", o.mode);
    meta.emplace_back("smo_tol", format_double(o.smo_tol));
    meta.emplace_back("smo_max_iter", std::to_string(o.smo_max_iter));

    TrainingReport report;
    SvcModel model;
    if (o.mode == "active") {
        if (!o.dataset_file.empty()) {
            throw CLI::ValidationError("--dataset", "active mode labels its own data");
        }
        if (cfg.C_grid.empty()) cfg.C_grid = active_C_grid();
        if (cfg.gamma_grid.empty()) cfg.gamma_grid = active_gamma_grid();
        ActiveLearnConfig al;
        al.initial_nx = o.al_initial_nx;
        al.initial_npx = o.al_initial_npx;
        al.n_sv_per_iter = o.al_sv_per_iter;
        al.pts_per_sv = o.al_pts_per_sv;
        al.proposal_sigma = o.al_sigma;
        al.target_accuracy = o.al_target;
        al.max_iters = o.al_max_iters;
        al.seed = o.common.seed;
        meta.emplace_back("al_initial_grid", std::to_string(al.initial_nx) + "," +
                                                 std::to_string(al.initial_npx));
        meta.emplace_back("al_sv_per_iter", std::to_string(al.n_sv_per_iter));
        meta.emplace_back("al_pts_per_sv", std::to_string(al.pts_per_sv));
        meta.emplace_back("al_sigma", format_double(al.proposal_sigma));
        meta.emplace_back("al_target", format_double(al.target_accuracy));

        const ActiveLearnResult res = active_learning_loop(cfg, al);
        for (std::size_t i = 0; i < res.history.size(); ++i) {
            std::cout << "iteration " << i << ": cv_accuracy "
                      << res.history[i].test_accuracy << ", labeled "
                      << res.history[i].n_labeled_trajectories << "\n";
        }
        model = res.model;
        report.cv = res.last_cv;
        report.history = res.history;
        report.eval = res.history.empty() ? EvaluationReport{} : res.history.back();
    } else if (o.mode == "fixed" || o.mode == "ld") {
        const bool with_ld = o.mode == "ld";
        TrainResult res;
        if (!o.dataset_file.empty()) {
            MetaMap file_meta;
            LabeledDataset ds = load_dataset_csv(o.dataset_file, &file_meta);
            const bool has_ld = std::find(ds.feature_names.begin(), ds.feature_names.end(),
                                          "ld") != ds.feature_names.end();
            if (with_ld != has_ld) {
                throw FormatError("dataset feature columns do not match --mode " + o.mode);
            }
            res = train_on_dataset(cfg, std::move(ds), with_ld);
        } else {
            res = with_ld ? train_with_ld(cfg) : train_fixed(cfg);
        }
        model = res.model;
        report.cv = res.cv;
        report.eval = res.eval;
    } else {
        throw CLI::ValidationError("--mode", "expected fixed, active, or ld");
    }

    report.support_count = model.support_count();
    meta.emplace_back("best_C", format_double(report.cv.best_C));
    meta.emplace_back("best_gamma", format_double(report.cv.best_gamma));
    save_model_json(o.common.resolve(o.model_out), model, meta);
    save_report_json(o.common.resolve(o.report_out), report, meta);
    std::cout << "train: accuracy " << report.eval.test_accuracy << ", support vectors "
              << report.support_count << ", best C " << report.cv.best_C << ", best gamma "
              << report.cv.best_gamma << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

struct PlotOpts {
    CommonOpts common;
    std::string what = "islands";
    std::vector<std::string> inputs;
    std::string out = "plot.svg";
    int resolution = 200;
};

std::string sidecar_path(const std::string& svg_path) {
    fs::path p(svg_path);
    p.replace_extension(".csv");
    return p.string();
}

void draw_energy_rim(svg::Plot& plot, const SystemParams& params, const SectionConfig& section) {
    svg::Style rim;
    rim.stroke = "magenta";
    rim.stroke_width = 1.6;
    plot.polyline(energy_boundary_on_section(params, section, 720), rim);
}

int run_plot(const PlotOpts& o) {
    const SystemParams params = o.common.params();
    const SectionConfig section = o.common.section();
    const std::string out = o.common.resolve(o.out);
    const MetaMap meta = o.common.meta("plot");

    if (o.what == "islands" || o.what == "boundary" || o.what == "ld-field") {
        const SectionBounds b = section_bounds(params, section);
        svg::Plot plot(-1.1 * b.x_max, 1.1 * b.x_max, -1.1 * b.p_x_max, 1.1 * b.p_x_max);
        draw_energy_rim(plot, params, section);

        std::vector<ReactiveIsland> islands;
        std::string model_file, data_file;
        for (const auto& in : o.inputs) {
            if (fs::path(in).extension() == ".json") {
                model_file = in;
            } else if (o.what == "ld-field" && data_file.empty()) {
                data_file = in;
            } else {
                islands.push_back(load_island_csv(in));
            }
        }
        std::vector<std::vector<double>> sidecar_rows;
        std::vector<std::string> sidecar_cols;

        if (o.what == "ld-field") {
            if (data_file.empty()) {
                throw CLI::ValidationError("--in", "ld-field needs a dataset file");
            }
            const LabeledDataset ds = load_dataset_csv(data_file);
            const auto it =
                std::find(ds.feature_names.begin(), ds.feature_names.end(), "ld");
            if (it == ds.feature_names.end()) {
                throw FormatError("ld-field plot needs a dataset with an ld column");
            }
            const Eigen::Index ld_col = it - ds.feature_names.begin();
            double lo = ds.features.col(ld_col).minCoeff();
            double hi = ds.features.col(ld_col).maxCoeff();
            if (!(hi > lo)) hi = lo + 1.0;
            sidecar_cols = {"x", "p_x", "ld"};
            for (Eigen::Index r = 0; r < ds.size(); ++r) {
                const double ld = ds.features(r, ld_col);
                plot.circle(ds.features(r, 0), ds.features(r, 1), 1.6,
                            svg::colormap((ld - lo) / (hi - lo)));
                sidecar_rows.push_back({ds.features(r, 0), ds.features(r, 1), ld});
            }
        }

        for (const auto& island : islands) {
            svg::Style s;
            s.stroke = channel_color(static_cast<int>(island.channel));
            s.stroke_width = 1.8;
            auto curve = island.curve;
            if (!curve.empty()) curve.push_back(curve.front());
            plot.polyline(curve, s);
            if (o.what == "islands") {
                if (sidecar_cols.empty()) sidecar_cols = {"channel", "x", "p_x"};
                for (const auto& pt : island.curve) {
                    sidecar_rows.push_back(
                        {static_cast<double>(static_cast<int>(island.channel)), pt[0], pt[1]});
                }
            }
        }

        if (o.what == "boundary") {
            if (model_file.empty()) {
                throw CLI::ValidationError("--in", "boundary needs a model .json input");
            }
            const SvcModel model = load_model_json(model_file);
            // support vectors in raw feature coordinates
            std::set<std::pair<double, double>> seen;
            for (const BinarySvm& m : model.pairwise) {
                for (Eigen::Index r = 0; r < m.support_points.rows(); ++r) {
                    Eigen::VectorXd f = m.support_points.row(r);
                    if (model.scaler) f = model.scaler->invert_row(f);
                    if (seen.insert({f[0], f[1]}).second) {
                        plot.circle(f[0], f[1], 1.4, "cyan", 0.8);
                    }
                }
            }
            const DecisionBoundary boundary = extract_decision_boundary(
                model, params, section, o.resolution, o.common.horizon);
            svg::Style dashed;
            dashed.stroke = "black";
            dashed.dash = "5,4";
            sidecar_cols = {"class_a", "class_b", "x", "p_x"};
            for (const auto& poly : boundary.polylines) {
                plot.polyline(poly.points, dashed);
                for (const auto& pt : poly.points) {
                    sidecar_rows.push_back({static_cast<double>(poly.class_a),
                                            static_cast<double>(poly.class_b), pt[0], pt[1]});
                }
            }
        }

        plot.labels("x", "p_x", o.what + " at E = " + format_double(section.energy) +
                                    ", y_c = " + format_double(section.y_c));
        plot.write(out);
        save_table_csv(sidecar_path(out), sidecar_cols, sidecar_rows, meta);
    } else if (o.what == "heatmap") {
        if (o.inputs.empty()) throw CLI::ValidationError("--in", "heatmap needs a report file");
        std::ifstream in(o.inputs.front());
        if (!in) throw FormatError("cannot open " + o.inputs.front());
        nlohmann::json j;
        in >> j;
        std::vector<double> Cs, gs, acc;
        for (const auto& cell : j["cv_grid"]) {
            Cs.push_back(cell["C"].get<double>());
            gs.push_back(cell["gamma"].get<double>());
            acc.push_back(cell["mean_accuracy"].get<double>());
        }
        std::vector<double> cu(Cs), gu(gs);
        std::sort(cu.begin(), cu.end());
        cu.erase(std::unique(cu.begin(), cu.end()), cu.end());
        std::sort(gu.begin(), gu.end());
        gu.erase(std::unique(gu.begin(), gu.end()), gu.end());

        svg::Plot plot(-0.5, gu.size() - 0.5, -0.5, cu.size() - 0.5);
        const double lo = *std::min_element(acc.begin(), acc.end());
        const double hi = *std::max_element(acc.begin(), acc.end());
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < acc.size(); ++k) {
            const double gi = std::find(gu.begin(), gu.end(), gs[k]) - gu.begin();
            const double ci = std::find(cu.begin(), cu.end(), Cs[k]) - cu.begin();
            const double t = hi > lo ? (acc[k] - lo) / (hi - lo) : 1.0;
            plot.cell(gi - 0.5, ci - 0.5, gi + 0.5, ci + 0.5, svg::colormap(t));
            char label[32];
            std::snprintf(label, sizeof(label), "%.4f", acc[k]);
            plot.text(gi, ci, label, 11, "middle", t > 0.6 ? "black" : "white");
            rows.push_back({Cs[k], gs[k], acc[k]});
        }
        for (std::size_t i = 0; i < gu.size(); ++i) {
            plot.text(static_cast<double>(i), -0.45, "g=" + format_double(gu[i]), 11);
        }
        for (std::size_t i = 0; i < cu.size(); ++i) {
            plot.text(-0.45, static_cast<double>(i), "C=" + format_double(cu[i]), 11, "start");
        }
        plot.labels("gamma", "C", "cross-validation accuracy");
        plot.write(out);
        save_table_csv(sidecar_path(out), {"C", "gamma", "mean_accuracy"}, rows, meta);
    } else if (o.what == "manifold-projection") {
        if (o.inputs.empty()) throw CLI::ValidationError("--in", "needs a fibers file");
        svg::Plot plot(-1.35, 1.35, -1.35, 1.45);
        std::ifstream in(o.inputs.front());
        if (!in) throw FormatError("cannot open " + o.inputs.front());
        std::string line;
        std::vector<std::array<double, 2>> current;
        double current_id = -1.0;
        std::vector<std::vector<double>> rows;
        bool header_seen = false;
        svg::Style fiber_style;
        fiber_style.stroke = "green";
        fiber_style.stroke_width = 0.5;
        fiber_style.opacity = 0.5;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') {
                if (line.find("stability = unstable") != std::string::npos) {
                    fiber_style.stroke = "red";
                }
                continue;
            }
            if (!header_seen) {
                header_seen = true;  // column-name row
                continue;
            }
            std::stringstream ss(line);
            std::string tok;
            std::vector<double> vals;
            while (std::getline(ss, tok, ',')) vals.push_back(std::strtod(tok.c_str(), nullptr));
            if (vals.size() < 4) continue;
            if (vals[0] != current_id && !current.empty()) {
                plot.polyline(current, fiber_style);
                current.clear();
            }
            current_id = vals[0];
            current.push_back({vals[2], vals[3]});
            rows.push_back({vals[0], vals[2], vals[3]});
        }
        if (!current.empty()) plot.polyline(current, fiber_style);
        // the section line and the escape gates
        svg::Style gate;
        gate.stroke = "gray";
        gate.dash = "3,3";
        plot.polyline({{-kEscapeX, -1.35}, {-kEscapeX, 1.45}}, gate);
        plot.polyline({{kEscapeX, -1.35}, {kEscapeX, 1.45}}, gate);
        plot.polyline({{-1.35, kEscapeY}, {1.35, kEscapeY}}, gate);
        svg::Style secline;
        secline.stroke = "black";
        secline.stroke_width = 2.0;
        plot.polyline({{-1.35, section.y_c}, {1.35, section.y_c}}, secline);
        plot.labels("x", "y", "manifold projection");
        plot.write(out);
        save_table_csv(sidecar_path(out), {"fiber", "x", "y"}, rows, meta);
    } else {
        throw CLI::ValidationError("--what", "unknown plot kind " + o.what);
    }
    std::cout << "plot: " << out << " (+ " << sidecar_path(out) << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reactive-island computation and learning for the Henon-Heiles system"};
    app.set_config("--config", "", "configuration file (key = value, sectioned)");
    app.require_subcommand(1);

    IslandOpts island_opts;
    auto* island_cmd = app.add_subcommand("island", "compute a first-order reactive island");
    add_common(island_cmd, island_opts.common);
    island_cmd->add_option("--saddle", island_opts.saddle, "top, left, or right")
        ->check(CLI::IsMember({"top", "left", "right"}));
    island_cmd->add_option("--seeds", island_opts.n_seeds, "fibers per manifold branch");
    island_cmd->add_option("--tspan", island_opts.t_span, "fiber integration span");
    island_cmd->add_option("--out", island_opts.out, "output curve file");
    island_cmd->add_option("--fibers-out", island_opts.fibers_out,
                           "optional fiber dump for manifold plots");

    DatasetOpts dataset_opts;
    auto* dataset_cmd = app.add_subcommand("dataset", "sample and label a section grid");
    add_common(dataset_cmd, dataset_opts.common);
    dataset_cmd->add_option("--grid", dataset_opts.grid, "NX,NPX grid dimensions");
    dataset_cmd->add_flag("--ld,!--no-ld", dataset_opts.with_ld,
                          "add the Lagrangian-descriptor feature column");
    dataset_cmd->add_option("--out", dataset_opts.out, "output dataset file");

    TrainOpts train_opts;
    auto* train_cmd = app.add_subcommand("train", "train and evaluate a classifier");
    add_common(train_cmd, train_opts.common);
    train_cmd->add_option("--mode", train_opts.mode, "fixed, active, or ld")
        ->check(CLI::IsMember({"fixed", "active", "ld"}));
    train_cmd->add_option("--dataset", train_opts.dataset_file, "train from a dataset file");
    train_cmd->add_option("--model-out", train_opts.model_out, "model output file");
    train_cmd->add_option("--report-out", train_opts.report_out, "report output file");
    train_cmd->add_option("--c-grid", train_opts.c_grid, "comma list of C values");
    train_cmd->add_option("--gamma-grid", train_opts.gamma_grid, "comma list of gamma values");
    train_cmd->add_option("--nx", train_opts.nx, "grid columns for inline datasets");
    train_cmd->add_option("--npx", train_opts.npx, "grid rows for inline datasets");
    train_cmd->add_option("--holdout", train_opts.holdout, "held-out evaluation points");
    train_cmd->add_option("--smo-tol", train_opts.smo_tol, "SMO stopping tolerance");
    train_cmd->add_option("--smo-max-iter", train_opts.smo_max_iter, "SMO iteration cap");
    train_cmd->add_option("--al-initial-nx", train_opts.al_initial_nx, "active: coarse grid nx");
    train_cmd->add_option("--al-initial-npx", train_opts.al_initial_npx,
                          "active: coarse grid npx");
    train_cmd->add_option("--al-sv-per-iter", train_opts.al_sv_per_iter,
                          "active: support vectors resampled per iteration");
    train_cmd->add_option("--al-pts-per-sv", train_opts.al_pts_per_sv,
                          "active: proposals per support vector");
    train_cmd->add_option("--al-sigma", train_opts.al_sigma, "active: proposal sigma");
    train_cmd->add_option("--al-target", train_opts.al_target, "active: CV accuracy target");
    train_cmd->add_option("--al-max-iters", train_opts.al_max_iters, "active: iteration cap");

    PlotOpts plot_opts;
    auto* plot_cmd = app.add_subcommand("plot", "emit figure-ready SVG plots");
    add_common(plot_cmd, plot_opts.common);
    plot_cmd->add_option("--what", plot_opts.what,
                         "islands, boundary, heatmap, ld-field, or manifold-projection")
        ->check(CLI::IsMember({"islands", "boundary", "heatmap", "ld-field",
                               "manifold-projection"}));
    plot_cmd->add_option("--in", plot_opts.inputs, "input files")->expected(-1);
    plot_cmd->add_option("--out", plot_opts.out, "output .svg file");
    plot_cmd->add_option("--resolution", plot_opts.resolution, "boundary grid resolution");

    try {
        app.parse(argc, argv);
        const CommonOpts* common = nullptr;
        if (island_cmd->parsed()) common = &island_opts.common;
        if (dataset_cmd->parsed()) common = &dataset_opts.common;
        if (train_cmd->parsed()) common = &train_opts.common;
        if (plot_cmd->parsed()) common = &plot_opts.common;
        if (common && common->threads > 0) set_num_threads(common->threads);

        if (island_cmd->parsed()) return run_island(island_opts);
        if (dataset_cmd->parsed()) return run_dataset(dataset_opts);
        if (train_cmd->parsed()) return run_train(train_opts);
        if (plot_cmd->parsed()) return run_plot(plot_opts);
        return kExitUsage;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
