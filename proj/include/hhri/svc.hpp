#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hhri/datasets.hpp"

namespace hhri {

struct RbfKernelParams {
    double gamma = 1.0;  ///< kernel width: K(a,b) = exp(-gamma ||a-b||^2)
    double C = 1.0;      ///< box constraint on the dual weights
};

/// exp(-gamma ||a - b||^2); throws DimensionMismatch on unequal sizes.
double rbf_kernel(const RbfKernelParams& kp, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Per-feature standardization z = (x - shift) / scale.
struct FeatureScaler {
    Eigen::VectorXd shift;
    Eigen::VectorXd scale;

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd apply_row(const Eigen::VectorXd& x) const;
    Eigen::VectorXd invert_row(const Eigen::VectorXd& z) const;

    static FeatureScaler fit(const Eigen::MatrixXd& x);
};

struct SolveOptions {
    double tol = 1e-3;       ///< stop when the maximal KKT violation drops below this
    long max_iter = 100000;  ///< pair updates; exceeded -> converged = false
};

/// One soft-margin binary machine. Points live in the model's feature space
/// (scaled when the parent model carries a scaler).
struct BinarySvm {
    Eigen::MatrixXd support_points;   ///< one row per support vector
    std::vector<double> dual_coefs;   ///< alpha_i * l_i
    double bias = 0.0;
    RbfKernelParams kernel;
    bool converged = true;
    int class_pos = 0;                ///< label mapped to +1
    int class_neg = 0;                ///< label mapped to -1
    std::vector<int> support_rows;    ///< row ids in the training dataset
};

/// sum_i dual_coefs_i K(P_i, p) + bias; the sign picks the class.
double decision_function(const BinarySvm& m, const Eigen::VectorXd& p);

/// One-vs-one multi-class model with majority voting; ties break on summed
/// decision values, then on the lower class index.
struct SvcModel {
    std::vector<int> classes;
    std::vector<BinarySvm> pairwise;  ///< all pairs (c_i, c_j), i < j
    std::optional<FeatureScaler> scaler;
    std::vector<std::string> feature_names;

    int predict(const Eigen::VectorXd& raw_features) const;
    /// Distinct training-set rows that support any pairwise machine.
    std::vector<int> support_union() const;
    long support_count() const { return static_cast<long>(support_union().size()); }
};

/// Sequential minimal optimization with maximal-violating-pair selection on
/// the soft-margin dual. labels must be +-1 with both classes present.
BinarySvm solve_binary(const RbfKernelParams& kp, const Eigen::MatrixXd& points,
                       const std::vector<int>& labels, const SolveOptions& opts = {});

SvcModel train_multiclass(const RbfKernelParams& kp, const LabeledDataset& ds, bool scale,
                          const SolveOptions& opts = {});

/// Deterministic stratified folds: per-class seeded shuffle dealt round-robin.
std::vector<std::vector<int>> stratified_folds(const LabeledDataset& ds, int n_folds,
                                               std::uint64_t seed);

/// Held-out accuracy per fold.
std::vector<double> cross_validate(const RbfKernelParams& kp, const LabeledDataset& ds,
                                   int n_folds = 5, std::uint64_t seed = 0, bool scale = false,
                                   const SolveOptions& opts = {});

struct CvReport {
    struct Cell {
        double C = 0.0;
        double gamma = 0.0;
        double mean_accuracy = 0.0;
        std::vector<double> fold_accuracies;
    };
    std::vector<Cell> grid;
    double best_C = 0.0;
    double best_gamma = 0.0;
    int n_folds = 5;
};

/// Evaluates every (C, gamma) cell by cross-validation on shared folds.
/// Best cell maximizes mean accuracy; ties prefer smaller C, then smaller
/// gamma (smoother boundaries). Kernel matrices are shared per gamma.
CvReport grid_search(const LabeledDataset& ds, const std::vector<double>& C_grid,
                     const std::vector<double>& gamma_grid, int n_folds = 5,
                     std::uint64_t seed = 0, bool scale = false, const SolveOptions& opts = {});

} // namespace hhri
