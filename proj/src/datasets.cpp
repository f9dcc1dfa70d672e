#include "hhri/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hhri/parallel.hpp"
#include "hhri/rk.hpp"

namespace hhri {

LabeledDataset LabeledDataset::subset(const std::vector<int>& rows) const {
    LabeledDataset out;
    out.feature_names = feature_names;
    out.horizon = horizon;
    out.seed = seed;
    out.samples.reserve(rows.size());
    out.labels.reserve(rows.size());
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<std::size_t>(rows[i]);
        out.samples.push_back(samples[r]);
        out.labels.push_back(labels[r]);
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
    }
    return out;
}

std::vector<int> LabeledDataset::class_list() const {
    std::set<int> cls;
    for (const auto& l : labels) cls.insert(l.value);
    return {cls.begin(), cls.end()};
}

std::optional<double> try_momentum_from_energy(const SystemParams& params, double x, double p_x,
                                               const SectionConfig& section) {
    const double rad = 2.0 * params.m_y *
                       (section.energy - potential_energy(params, x, section.y_c) -
                        p_x * p_x / (2.0 * params.m_x));
    if (rad < 0.0) return std::nullopt;
    return std::sqrt(rad);
}

double momentum_from_energy(const SystemParams& params, double x, double p_x,
                            const SectionConfig& section) {
    const auto p_y = try_momentum_from_energy(params, x, p_x, section);
    if (!p_y) {
        throw OutsideEnergyBoundary("no real p_y at (x, p_x) = (" + std::to_string(x) + ", " +
                                    std::to_string(p_x) + ")");
    }
    return *p_y;
}

namespace {

/// Symmetric grid coordinates: u[i] = -u[n-1-i] exactly, so mirror pairs of
/// samples are bitwise negations of each other.
std::vector<double> symmetric_axis(double half_span, int n) {
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (2 * i + 1 == n) {
            u[static_cast<std::size_t>(i)] = 0.0;
        } else if (2 * i < n) {
            u[static_cast<std::size_t>(i)] =
                -half_span + (2.0 * half_span * i) / (n - 1);
            u[static_cast<std::size_t>(n - 1 - i)] = -u[static_cast<std::size_t>(i)];
        }
    }
    return u;
}

} // namespace

std::vector<SectionSample> sample_grid(const SystemParams& params, const SectionConfig& section,
                                       int nx, int npx) {
    if (nx < 2 || npx < 2) throw std::invalid_argument("sample_grid: need nx, npx >= 2");
    const SectionBounds bounds = section_bounds(params, section);

    // bounding box padded by one cell
    const double half_x = bounds.x_max * (1.0 + 2.0 / nx);
    const double half_p = bounds.p_x_max * (1.0 + 2.0 / npx);
    const std::vector<double> xs = symmetric_axis(half_x, nx);
    const std::vector<double> ps = symmetric_axis(half_p, npx);

    std::vector<SectionSample> out;
    out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(npx));
    for (int ix = 0; ix < nx; ++ix) {
        for (int ip = 0; ip < npx; ++ip) {
            const double x = xs[static_cast<std::size_t>(ix)];
            const double p_x = ps[static_cast<std::size_t>(ip)];
            const auto p_y = try_momentum_from_energy(params, x, p_x, section);
            if (!p_y || *p_y <= 0.0) continue;
            SectionSample s;
            s.x = x;
            s.p_x = p_x;
            s.p_y = *p_y;
            s.section = section;
            out.push_back(s);
        }
    }
    return out;
}

EscapeLabel label_by_escape(const SystemParams& params, const SectionSample& sample,
                            double horizon) {
    IntegrationSettings is;
    is.t_max = horizon;
    is.store_states = false;
    const Trajectory run = integrate(params, sample.state(), is, escape_events());
    EscapeLabel label;
    if (run.terminated_by) {
        label.value = escape_channel(*run.terminated_by);
        label.escape_time = run.end_time();
    }
    return label;
}

LdValue compute_forward_ld(const SystemParams& params, const PhaseState& s0, double tau,
                           double p_exponent) {
    if (!(p_exponent > 0.0 && p_exponent <= 1.0)) {
        throw std::invalid_argument("compute_forward_ld: p must lie in (0, 1]");
    }
    if (tau == 0.0) return LdValue{0.0, 0.0};
    if (!(tau > 0.0)) throw std::invalid_argument("compute_forward_ld: tau must be >= 0");

    const double mx = params.m_x, my = params.m_y;
    const double wx2 = params.omega_x * params.omega_x, wy2 = params.omega_y * params.omega_y;
    const double delta = params.delta;
    const double p = p_exponent;
    auto rhs = [=](double, const rk::Vec<5>& y, rk::Vec<5>& f) {
        f[0] = y[2] / mx;
        f[1] = y[3] / my;
        f[2] = -wx2 * y[0] - 2.0 * y[0] * y[1];
        f[3] = -wy2 * y[1] - y[0] * y[0] + delta * y[1] * y[1];
        f[4] = std::pow(std::abs(f[0]), p) + std::pow(std::abs(f[1]), p) +
               std::pow(std::abs(f[2]), p) + std::pow(std::abs(f[3]), p);
    };

    const std::vector<EventSpec> gates = escape_events();
    std::vector<rk::RawEvent<5>> raw;
    for (const auto& ev : gates) {
        rk::RawEvent<5> r;
        r.guard = [&ev](double t, const rk::Vec<5>& y) {
            return ev.guard(t, PhaseState{y[0], y[1], y[2], y[3]});
        };
        r.terminal = true;
        raw.push_back(std::move(r));
    }

    rk::StepControl ctrl{1e-12, 1e-12, 0.0};
    rk::Vec<5> y0{s0.x, s0.y, s0.p_x, s0.p_y, 0.0};
    auto res = rk::integrate_raw<5>(rhs, y0, tau, ctrl, raw,
                                    [](double, const rk::Vec<5>&, const rk::DenseStep<5>&) {},
                                    [](std::size_t, double, const rk::Vec<5>&) {});
    return LdValue{res.y_end[4], res.t_end};
}

LdValue compute_forward_ld(const SystemParams& params, const SectionSample& sample, double tau,
                           double p_exponent) {
    return compute_forward_ld(params, sample.state(), tau, p_exponent);
}

LabeledDataset build_dataset(const SystemParams& params, const SectionConfig& section, int nx,
                             int npx, double horizon, bool with_ld, std::uint64_t seed) {
    LabeledDataset ds;
    ds.samples = sample_grid(params, section, nx, npx);
    ds.horizon = horizon;
    ds.seed = seed;
    ds.feature_names = {"x", "p_x"};
    if (with_ld) ds.feature_names.push_back("ld");

    const std::size_t n = ds.samples.size();
    ds.labels.resize(n);
    ds.features.resize(static_cast<Eigen::Index>(n), with_ld ? 3 : 2);

    parallel_for(n, [&](std::size_t i) {
        const SectionSample& s = ds.samples[i];
        ds.labels[i] = label_by_escape(params, s, horizon);
        ds.features(static_cast<Eigen::Index>(i), 0) = s.x;
        ds.features(static_cast<Eigen::Index>(i), 1) = s.p_x;
        if (with_ld) {
            ds.features(static_cast<Eigen::Index>(i), 2) =
                compute_forward_ld(params, s, horizon).value;
        }
    });
    return ds;
}

} // namespace hhri
