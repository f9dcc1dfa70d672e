#include "hhri/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hhri/parallel.hpp"
#include "hhri/rng.hpp"

namespace hhri {

std::vector<double> fixed_C_grid() { return {1e2, 1e3, 1e4, 1e5}; }
std::vector<double> fixed_gamma_grid() { return {10.0, 1e2, 1e3, 1e4}; }
std::vector<double> active_C_grid() { return {10.0, 1e2, 1e3}; }
std::vector<double> active_gamma_grid() { return {1.0, 10.0, 1e2}; }

int island_membership(const std::vector<ReactiveIsland>& islands, double x, double p_x) {
    for (const ReactiveIsland& isl : islands) {
        if (island_contains(isl, x, p_x)) return static_cast<int>(isl.channel);
    }
    return 0;
}

namespace {

bool model_uses_ld(const SvcModel& model) {
    return std::find(model.feature_names.begin(), model.feature_names.end(), "ld") !=
           model.feature_names.end();
}

Eigen::VectorXd section_features(const SvcModel& model, const SystemParams& params,
                                 const SectionConfig& section, double x, double p_x,
                                 double horizon) {
    if (model_uses_ld(model)) {
        SectionSample s;
        s.x = x;
        s.p_x = p_x;
        s.p_y = momentum_from_energy(params, x, p_x, section);
        s.section = section;
        Eigen::VectorXd f(3);
        f << x, p_x, compute_forward_ld(params, s, horizon).value;
        return f;
    }
    Eigen::VectorXd f(2);
    f << x, p_x;
    return f;
}

/// Uniform random section points (rejection sampling in the bounding box).
std::vector<SectionSample> random_section_points(const SystemParams& params,
                                                 const SectionConfig& section, int n,
                                                 std::uint64_t seed) {
    const SectionBounds b = section_bounds(params, section);
    Rng rng(seed);
    std::vector<SectionSample> out;
    out.reserve(static_cast<std::size_t>(n));
    while (static_cast<int>(out.size()) < n) {
        const double x = rng.uniform(-b.x_max, b.x_max);
        const double p_x = rng.uniform(-b.p_x_max, b.p_x_max);
        const auto p_y = try_momentum_from_energy(params, x, p_x, section);
        if (!p_y || *p_y <= 0.0) continue;
        SectionSample s;
        s.x = x;
        s.p_x = p_x;
        s.p_y = *p_y;
        s.section = section;
        out.push_back(s);
    }
    return out;
}

EvaluationReport holdout_evaluation(const SvcModel& model, const SystemParams& params,
                                    const SectionConfig& section, double horizon, int n_holdout,
                                    std::uint64_t seed) {
    EvaluationReport report;
    const auto points = random_section_points(params, section, n_holdout, seed);
    std::vector<int> truth(points.size()), pred(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        truth[i] = label_by_escape(params, points[i], horizon).value;
        pred[i] = model.predict(section_features(model, params, section, points[i].x,
                                                 points[i].p_x, horizon));
    });

    std::map<int, long> class_total, class_correct;
    long correct = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (truth[i] == pred[i]) ++correct;
        class_total[truth[i]] += 1;
        if (truth[i] == pred[i]) class_correct[truth[i]] += 1;
        if (truth[i] >= 0 && truth[i] < 4 && pred[i] >= 0 && pred[i] < 4) {
            report.confusion[static_cast<std::size_t>(truth[i])]
                            [static_cast<std::size_t>(pred[i])] += 1;
        }
    }
    report.test_accuracy =
        points.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(points.size());
    for (const auto& [cls, total] : class_total) {
        report.per_class_accuracy[cls] =
            static_cast<double>(class_correct[cls]) / static_cast<double>(total);
    }
    return report;
}

void append_samples(LabeledDataset& ds, const std::vector<SectionSample>& samples,
                    const std::vector<EscapeLabel>& labels) {
    const Eigen::Index n0 = ds.features.rows();
    ds.features.conservativeResize(n0 + static_cast<Eigen::Index>(samples.size()),
                                   ds.features.cols());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        ds.samples.push_back(samples[i]);
        ds.labels.push_back(labels[i]);
        ds.features(n0 + static_cast<Eigen::Index>(i), 0) = samples[i].x;
        ds.features(n0 + static_cast<Eigen::Index>(i), 1) = samples[i].p_x;
    }
}

} // namespace

TrainResult train_on_dataset(const PipelineConfig& cfg, LabeledDataset dataset, bool scale) {
    TrainResult result;
    result.dataset = std::move(dataset);
    const auto& C_grid = cfg.C_grid.empty() ? fixed_C_grid() : cfg.C_grid;
    const auto& gamma_grid = cfg.gamma_grid.empty() ? fixed_gamma_grid() : cfg.gamma_grid;
    result.cv = grid_search(result.dataset, C_grid, gamma_grid, cfg.n_folds, cfg.seed, scale,
                            cfg.solve);
    const RbfKernelParams best{result.cv.best_gamma, result.cv.best_C};
    result.model = train_multiclass(best, result.dataset, scale, cfg.solve);
    result.eval = holdout_evaluation(result.model, cfg.params, cfg.section, cfg.horizon,
                                     cfg.n_holdout, cfg.seed + 0x9e3779b9);
    result.eval.n_labeled_trajectories = result.dataset.size();
    return result;
}

TrainResult train_fixed(const PipelineConfig& cfg) {
    // x and p_x share scale, so the two-feature pipeline trains on raw features
    return train_on_dataset(cfg,
                            build_dataset(cfg.params, cfg.section, cfg.nx, cfg.npx, cfg.horizon,
                                          false, cfg.seed),
                            false);
}

TrainResult train_with_ld(const PipelineConfig& cfg) {
    return train_on_dataset(cfg,
                            build_dataset(cfg.params, cfg.section, cfg.nx, cfg.npx, cfg.horizon,
                                          true, cfg.seed),
                            true);
}

ActiveLearnResult active_learning_loop(const PipelineConfig& cfg, const ActiveLearnConfig& al) {
    ActiveLearnResult result;
    result.dataset = build_dataset(cfg.params, cfg.section, al.initial_nx, al.initial_npx,
                                   cfg.horizon, false, al.seed);
    const auto& C_grid = cfg.C_grid.empty() ? active_C_grid() : cfg.C_grid;
    const auto& gamma_grid = cfg.gamma_grid.empty() ? active_gamma_grid() : cfg.gamma_grid;
    Rng rng(al.seed ^ 0xa5a5a5a5a5a5a5a5ull);

    double best_mean = 0.0;
    for (int iter = 0; iter < al.max_iters; ++iter) {
        result.last_cv = grid_search(result.dataset, C_grid, gamma_grid, cfg.n_folds,
                                     cfg.seed + static_cast<std::uint64_t>(iter), false,
                                     cfg.solve);
        best_mean = 0.0;
        for (const auto& cell : result.last_cv.grid) {
            if (cell.C == result.last_cv.best_C && cell.gamma == result.last_cv.best_gamma) {
                best_mean = cell.mean_accuracy;
            }
        }
        EvaluationReport entry;
        entry.test_accuracy = best_mean;
        entry.n_labeled_trajectories = result.dataset.size();
        result.history.push_back(entry);
        if (best_mean >= al.target_accuracy) break;
        if (iter + 1 == al.max_iters) break;

        const RbfKernelParams best{result.last_cv.best_gamma, result.last_cv.best_C};
        result.model = train_multiclass(best, result.dataset, false, cfg.solve);
        std::vector<int> svs = result.model.support_union();
        if (svs.empty()) break;

        // resample: pts_per_sv proposals around each of n_sv_per_iter
        // support vectors chosen without replacement, rejecting points
        // outside the energy boundary
        rng.shuffle(svs);
        const std::size_t n_chosen =
            std::min<std::size_t>(svs.size(), static_cast<std::size_t>(al.n_sv_per_iter));
        std::vector<SectionSample> proposals;
        for (std::size_t s = 0; s < n_chosen; ++s) {
            const int row = svs[s];
            const double cx = result.dataset.samples[static_cast<std::size_t>(row)].x;
            const double cp = result.dataset.samples[static_cast<std::size_t>(row)].p_x;
            for (int q = 0; q < al.pts_per_sv; ++q) {
                bool placed = false;
                for (int attempt = 0; attempt < 100; ++attempt) {
                    const double x = cx + al.proposal_sigma * rng.normal();
                    const double p_x = cp + al.proposal_sigma * rng.normal();
                    const auto p_y = try_momentum_from_energy(cfg.params, x, p_x, cfg.section);
                    if (!p_y || *p_y <= 0.0) continue;
                    SectionSample sample;
                    sample.x = x;
                    sample.p_x = p_x;
                    sample.p_y = *p_y;
                    sample.section = cfg.section;
                    proposals.push_back(sample);
                    placed = true;
                    break;
                }
                if (!placed) {
                    throw ProposalExhausted(
                        "active learning: no in-boundary proposal after 100 tries");
                }
            }
        }

        std::vector<EscapeLabel> labels(proposals.size());
        parallel_for(proposals.size(), [&](std::size_t i) {
            labels[i] = label_by_escape(cfg.params, proposals[i], cfg.horizon);
        });
        append_samples(result.dataset, proposals, labels);
    }

    const RbfKernelParams best{result.last_cv.best_gamma, result.last_cv.best_C};
    result.model = train_multiclass(best, result.dataset, false, cfg.solve);
    return result;
}

int predict_on_section(const SvcModel& model, const SystemParams& params,
                       const SectionConfig& section, double x, double p_x, double horizon) {
    return model.predict(section_features(model, params, section, x, p_x, horizon));
}

EvaluationReport evaluate_against_islands(const SystemParams& params, const SvcModel& model,
                                          const std::vector<ReactiveIsland>& islands,
                                          const SectionConfig& section, int resolution,
                                          double horizon, int n_holdout, std::uint64_t seed) {
    EvaluationReport report =
        holdout_evaluation(model, params, section, horizon, n_holdout, seed);
    report.n_labeled_trajectories = n_holdout;

    const auto grid = sample_grid(params, section, resolution, resolution);
    std::vector<int> member(grid.size()), pred(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        member[i] = island_membership(islands, grid[i].x, grid[i].p_x);
        pred[i] = model.predict(
            section_features(model, params, section, grid[i].x, grid[i].p_x, horizon));
    });
    long agree = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (member[i] == pred[i]) ++agree;
    }
    report.boundary_agreement =
        grid.empty() ? 1.0 : static_cast<double>(agree) / static_cast<double>(grid.size());
    return report;
}

AgreementReport ground_truth_agreement(const SystemParams& params,
                                       const std::vector<ReactiveIsland>& islands,
                                       const SectionConfig& section, int nx, int npx,
                                       double horizon) {
    const auto grid = sample_grid(params, section, nx, npx);
    std::vector<int> member(grid.size()), label(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        member[i] = island_membership(islands, grid[i].x, grid[i].p_x);
        label[i] = label_by_escape(params, grid[i], horizon).value;
    });
    AgreementReport rep;
    rep.n_points = static_cast<long>(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (member[i] != label[i]) ++rep.n_disagree;
    }
    rep.agreement = rep.n_points == 0
                        ? 1.0
                        : 1.0 - static_cast<double>(rep.n_disagree) /
                                    static_cast<double>(rep.n_points);
    return rep;
}

DecisionBoundary extract_decision_boundary(const SvcModel& model, const SystemParams& params,
                                           const SectionConfig& section, int resolution,
                                           double horizon) {
    const SectionBounds b = section_bounds(params, section);
    const int n = std::max(resolution, 8);
    DecisionBoundary boundary;
    boundary.cell_dx = 2.0 * b.x_max / (n - 1);
    boundary.cell_dp = 2.0 * b.p_x_max / (n - 1);

    // predicted label per grid node; -1 marks points outside the boundary
    std::vector<int> label(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), -1);
    parallel_for(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), [&](std::size_t idx) {
        const int ix = static_cast<int>(idx) % n;
        const int ip = static_cast<int>(idx) / n;
        const double x = -b.x_max + boundary.cell_dx * ix;
        const double p_x = -b.p_x_max + boundary.cell_dp * ip;
        const auto p_y = try_momentum_from_energy(params, x, p_x, section);
        if (!p_y || *p_y <= 0.0) return;
        label[idx] = model.predict(section_features(model, params, section, x, p_x, horizon));
    });

    auto label_at = [&](int ix, int ip) {
        return label[static_cast<std::size_t>(ip) * static_cast<std::size_t>(n) +
                     static_cast<std::size_t>(ix)];
    };
    auto node_x = [&](int ix) { return -b.x_max + boundary.cell_dx * ix; };
    auto node_p = [&](int ip) { return -b.p_x_max + boundary.cell_dp * ip; };

    // marching squares per class pair on cells whose corners carry exactly
    // those two labels; segment endpoints are edge midpoints
    std::vector<int> classes;
    for (int l : label) {
        if (l >= 0 && std::find(classes.begin(), classes.end(), l) == classes.end()) {
            classes.push_back(l);
        }
    }
    std::sort(classes.begin(), classes.end());

    // edge key: ((ip * n + ix) << 1) | horizontal(0)/vertical(1)
    auto hedge = [&](int ix, int ip) { return static_cast<long>((ip * n + ix) << 1); };
    auto vedge = [&](int ix, int ip) { return static_cast<long>(((ip * n + ix) << 1) | 1); };
    auto edge_point = [&](long key) -> std::array<double, 2> {
        const bool vertical = key & 1;
        const long node = key >> 1;
        const int ix = static_cast<int>(node % n);
        const int ip = static_cast<int>(node / n);
        if (vertical) return {node_x(ix), node_p(ip) + 0.5 * boundary.cell_dp};
        return {node_x(ix) + 0.5 * boundary.cell_dx, node_p(ip)};
    };

    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t bb = a + 1; bb < classes.size(); ++bb) {
            const int ca = classes[a], cb = classes[bb];
            std::map<long, std::vector<long>> adj;
            auto connect = [&](long e1, long e2) {
                adj[e1].push_back(e2);
                adj[e2].push_back(e1);
            };
            for (int ip = 0; ip + 1 < n; ++ip) {
                for (int ix = 0; ix + 1 < n; ++ix) {
                    const int c00 = label_at(ix, ip), c10 = label_at(ix + 1, ip);
                    const int c01 = label_at(ix, ip + 1), c11 = label_at(ix + 1, ip + 1);
                    auto ok = [&](int c) { return c == ca || c == cb; };
                    if (!ok(c00) || !ok(c10) || !ok(c01) || !ok(c11)) continue;
                    // bit set = corner belongs to class a
                    int code = (c00 == ca ? 1 : 0) | (c10 == ca ? 2 : 0) |
                               (c01 == ca ? 4 : 0) | (c11 == ca ? 8 : 0);
                    if (code == 0 || code == 15) continue;
                    const long bottom = hedge(ix, ip), top = hedge(ix, ip + 1);
                    const long left = vedge(ix, ip), right = vedge(ix + 1, ip);
                    switch (code) {
                        case 1: case 14: connect(bottom, left); break;
                        case 2: case 13: connect(bottom, right); break;
                        case 3: case 12: connect(left, right); break;
                        case 4: case 11: connect(top, left); break;
                        case 5: case 10: connect(bottom, top); break;
                        case 7: case 8: connect(top, right); break;
                        case 6: // saddle: bottom-left & top-right by convention
                            connect(bottom, left);
                            connect(top, right);
                            break;
                        case 9:
                            connect(bottom, right);
                            connect(top, left);
                            break;
                        default: break;
                    }
                }
            }

            // walk chains and loops
            std::map<long, bool> used;
            auto walk = [&](long start) {
                std::vector<long> chain{start};
                used[start] = true;
                long cur = start;
                long prev = -1;
                for (;;) {
                    long next = -1;
                    for (long cand : adj[cur]) {
                        if (cand != prev && !used[cand]) {
                            next = cand;
                            break;
                        }
                    }
                    if (next < 0) break;
                    chain.push_back(next);
                    used[next] = true;
                    prev = cur;
                    cur = next;
                }
                return chain;
            };
            auto emit = [&](const std::vector<long>& chain) {
                if (chain.size() < 2) return;
                DecisionBoundary::Polyline poly;
                poly.class_a = ca;
                poly.class_b = cb;
                for (long key : chain) poly.points.push_back(edge_point(key));
                const auto& last_nbrs = adj[chain.back()];
                if (chain.size() > 2 && std::find(last_nbrs.begin(), last_nbrs.end(),
                                                  chain.front()) != last_nbrs.end()) {
                    poly.points.push_back(edge_point(chain.front()));  // close the loop
                }
                boundary.polylines.push_back(std::move(poly));
            };
            for (const auto& [key, nbrs] : adj) {
                if (!used[key] && nbrs.size() == 1) emit(walk(key));  // open chains first
            }
            for (const auto& [key, nbrs] : adj) {
                if (!used[key]) emit(walk(key));  // remaining loops
            }
        }
    }
    return boundary;
}

} // namespace hhri
