#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hhri/manifolds.hpp"

namespace hhri {

/// A section point with the out-of-plane momentum reconstructed from the
/// energy condition; p_y > 0 throughout.
struct SectionSample {
    double x = 0.0;
    double p_x = 0.0;
    double p_y = 0.0;
    SectionConfig section;

    PhaseState state() const { return PhaseState{x, section.y_c, p_x, p_y}; }
};

/// 0 = non-reactive within the horizon; 1/2/3 = escape via x = -1.25,
/// x = +1.25, y = +1.25 respectively.
struct EscapeLabel {
    int value = 0;
    std::optional<double> escape_time;
};

struct LabeledDataset {
    std::vector<SectionSample> samples;
    std::vector<EscapeLabel> labels;
    Eigen::MatrixXd features;  ///< columns per feature_names
    std::vector<std::string> feature_names;
    double horizon = 30.0;
    std::uint64_t seed = 0;

    Eigen::Index size() const { return features.rows(); }
    LabeledDataset subset(const std::vector<int>& rows) const;
    std::vector<int> class_list() const;  ///< sorted distinct label values
};

/// Forward path-integral sum_k |f_k|^p along a trajectory.
struct LdValue {
    double value = 0.0;
    double tau_used = 0.0;
};

/// p_y = +sqrt(2 m_y (E - V(x, y_c) - p_x^2 / (2 m_x))); throws
/// OutsideEnergyBoundary when the radicand is negative.
double momentum_from_energy(const SystemParams& params, double x, double p_x,
                            const SectionConfig& section);
std::optional<double> try_momentum_from_energy(const SystemParams& params, double x, double p_x,
                                               const SectionConfig& section);

/// Regular nx-by-npx grid over the section bounding box padded by one cell;
/// points outside the energy boundary are dropped. The grid is built exactly
/// mirror-symmetric in x and p_x.
std::vector<SectionSample> sample_grid(const SystemParams& params, const SectionConfig& section,
                                       int nx, int npx);

/// Integrates forward with the three escape gates; first gate crossed within
/// the horizon decides the label.
EscapeLabel label_by_escape(const SystemParams& params, const SectionSample& sample,
                            double horizon = 30.0);

/// Forward Lagrangian descriptor: co-integrates dL/dt = sum_k |f_k|^p with
/// the flow, stopping at tau or the first escape gate.
LdValue compute_forward_ld(const SystemParams& params, const PhaseState& s0, double tau = 30.0,
                           double p_exponent = 0.5);
LdValue compute_forward_ld(const SystemParams& params, const SectionSample& sample,
                           double tau = 30.0, double p_exponent = 0.5);

/// Grid sampling + labels (+ optional LD feature column). Deterministic for
/// a given grid and seed; sample order is grid order.
LabeledDataset build_dataset(const SystemParams& params, const SectionConfig& section, int nx,
                             int npx, double horizon, bool with_ld, std::uint64_t seed);

} // namespace hhri
