#pragma once
#include <array>
#include <map>

#include "hhri/svc.hpp"

namespace hhri {

/// Shared knobs for the training pipelines.
struct PipelineConfig {
    SystemParams params;
    SectionConfig section;
    int nx = 100;
    int npx = 100;
    double horizon = 30.0;
    std::vector<double> C_grid;
    std::vector<double> gamma_grid;
    int n_folds = 5;
    std::uint64_t seed = 0;
    int n_holdout = 2000;  ///< fresh random points labelled for evaluation
    SolveOptions solve{1e-3, 200000};
};

std::vector<double> fixed_C_grid();      ///< {1e2, 1e3, 1e4, 1e5}
std::vector<double> fixed_gamma_grid();  ///< {10, 1e2, 1e3, 1e4}
std::vector<double> active_C_grid();     ///< {10, 1e2, 1e3}
std::vector<double> active_gamma_grid(); ///< {1, 10, 1e2}

struct EvaluationReport {
    double test_accuracy = 0.0;
    std::map<int, double> per_class_accuracy;
    /// set when evaluated against computed islands
    std::optional<double> boundary_agreement;
    std::array<std::array<long, 4>, 4> confusion{};  ///< [truth][predicted]
    long n_labeled_trajectories = 0;
};

struct TrainResult {
    SvcModel model;
    CvReport cv;
    EvaluationReport eval;
    LabeledDataset dataset;
};

/// Full-grid pipeline: label the nx-by-npx section grid, grid-search (C,
/// gamma) with 5-fold CV, train the best model, evaluate on fresh held-out
/// trajectories.
TrainResult train_fixed(const PipelineConfig& cfg);

/// Same pipeline with the forward Lagrangian descriptor as a third feature
/// and per-feature standardization.
TrainResult train_with_ld(const PipelineConfig& cfg);

/// Grid-search + train + hold-out evaluation on an existing dataset.
TrainResult train_on_dataset(const PipelineConfig& cfg, LabeledDataset dataset, bool scale);

struct ActiveLearnConfig {
    int initial_nx = 30;
    int initial_npx = 30;
    int n_sv_per_iter = 10;   ///< support vectors resampled per iteration
    int pts_per_sv = 1;       ///< proposals drawn around each of them
    double proposal_sigma = 1.0;  ///< N(P, sigma^2 I) proposal spread
    double target_accuracy = 0.99;
    int max_iters = 200;
    std::uint64_t seed = 0;
};

struct ActiveLearnResult {
    SvcModel model;
    /// one entry per iteration; test_accuracy holds the grid-search best
    /// mean CV accuracy on the accumulated data (the stop-rule estimate)
    std::vector<EvaluationReport> history;
    CvReport last_cv;
    LabeledDataset dataset;
};

/// Coarse grid start, then iterations of: grid-search + train, draw
/// proposals near randomly chosen support vectors (resampled until inside
/// the energy boundary), label them, and retrain, until the CV accuracy
/// target or max_iters.
ActiveLearnResult active_learning_loop(const PipelineConfig& cfg, const ActiveLearnConfig& al);

/// Model prediction at a section point; computes the LD feature on the fly
/// when the model was trained with it.
int predict_on_section(const SvcModel& model, const SystemParams& params,
                       const SectionConfig& section, double x, double p_x,
                       double horizon = 30.0);

/// Dense-grid comparison of model predictions against first-order island
/// membership, plus fresh-trajectory hold-out accuracy.
EvaluationReport evaluate_against_islands(const SystemParams& params, const SvcModel& model,
                                          const std::vector<ReactiveIsland>& islands,
                                          const SectionConfig& section, int resolution,
                                          double horizon = 30.0, int n_holdout = 2000,
                                          std::uint64_t seed = 1);

struct AgreementReport {
    double agreement = 0.0;
    long n_points = 0;
    long n_disagree = 0;
};

/// Fraction of retained grid points whose island-membership label matches
/// the trajectory label at the given horizon.
AgreementReport ground_truth_agreement(const SystemParams& params,
                                       const std::vector<ReactiveIsland>& islands,
                                       const SectionConfig& section, int nx, int npx,
                                       double horizon = 30.0);

/// Contours of predicted-label changes on a dense section grid, one
/// polyline set per unordered class pair, clipped to the energy boundary.
struct DecisionBoundary {
    struct Polyline {
        int class_a = 0;
        int class_b = 0;
        std::vector<std::array<double, 2>> points;
    };
    std::vector<Polyline> polylines;
    double cell_dx = 0.0;
    double cell_dp = 0.0;
};

DecisionBoundary extract_decision_boundary(const SvcModel& model, const SystemParams& params,
                                           const SectionConfig& section, int resolution,
                                           double horizon = 30.0);

/// Island membership label of a section point: the channel of the island
/// containing it, else 0.
int island_membership(const std::vector<ReactiveIsland>& islands, double x, double p_x);

} // namespace hhri
