#include "hhri/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hhri/parallel.hpp"

namespace hhri {

Channel channel_of(SaddleId id) {
    switch (id) {
        case SaddleId::Left: return Channel::Left;
        case SaddleId::Right: return Channel::Right;
        case SaddleId::Top: return Channel::Top;
    }
    return Channel::Top;
}

namespace {

constexpr double kPositionDisplacement = 1e-6;

struct SeedFrame {
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<Eigen::Vector4d> directions;  // transported unit eigenvector
};

/// Transports the eigenvector along the orbit with the state-transition
/// matrix, renormalizing at each seed.
SeedFrame transported_frame(const SystemParams& params, const PeriodicOrbit& orbit,
                            const Eigen::Vector4d& eigvec, int n_seeds) {
    SeedFrame frame;
    frame.times.resize(static_cast<std::size_t>(n_seeds));
    frame.states.resize(static_cast<std::size_t>(n_seeds));
    frame.directions.resize(static_cast<std::size_t>(n_seeds));

    IntegrationSettings is;
    is.rel_tol = 1e-12;
    is.abs_tol = 1e-12;
    is.store_states = false;

    PhaseState state = orbit.initial_state;
    Eigen::Matrix4d phi = Eigen::Matrix4d::Identity();
    const double dt = orbit.period / n_seeds;
    for (int i = 0; i < n_seeds; ++i) {
        frame.times[static_cast<std::size_t>(i)] = i * dt;
        frame.states[static_cast<std::size_t>(i)] = state;
        Eigen::Vector4d w = phi * eigvec;
        w.normalize();
        frame.directions[static_cast<std::size_t>(i)] = w;
        if (i + 1 < n_seeds) {
            is.t_max = dt;
            const StmTrajectory seg = integrate_variational(params, state, is);
            state = seg.base.end_state();
            phi = seg.stm.back() * phi;
        }
    }
    return frame;
}

PhaseState displaced(const PhaseState& base, const Eigen::Vector4d& dir, double sign) {
    const double pos_norm = std::hypot(dir[0], dir[1]);
    // scale so the position part of the displacement has the standard size
    const double eps = pos_norm > 1e-6 ? kPositionDisplacement / pos_norm
                                       : kPositionDisplacement;
    PhaseState s = base;
    s.x += sign * eps * dir[0];
    s.y += sign * eps * dir[1];
    s.p_x += sign * eps * dir[2];
    s.p_y += sign * eps * dir[3];
    return s;
}

} // namespace

ManifoldBranch globalize_manifold(const SystemParams& params, const MonodromyAnalysis& analysis,
                                  const PeriodicOrbit& orbit, Stability stability, Side side,
                                  int n_seeds, double t_span) {
    if (n_seeds < 3) throw std::invalid_argument("globalize_manifold: n_seeds too small");
    const Eigen::Vector4d eigvec =
        stability == Stability::Stable ? analysis.stable_eigvec : analysis.unstable_eigvec;
    const SeedFrame frame = transported_frame(params, orbit, eigvec, n_seeds);
    const double sign = side == Side::Plus ? 1.0 : -1.0;

    ManifoldBranch branch;
    branch.orbit = orbit;
    branch.stability = stability;
    branch.side = side;
    branch.t_span = t_span;
    branch.seed_times = frame.times;
    branch.seeds.resize(static_cast<std::size_t>(n_seeds));
    branch.fibers.resize(static_cast<std::size_t>(n_seeds));

    const std::vector<EventSpec> gates = escape_events();
    IntegrationSettings is;
    is.rel_tol = 1e-12;
    is.abs_tol = 1e-12;
    is.t_max = t_span;
    is.direction = stability == Stability::Stable ? Direction::Backward : Direction::Forward;

    parallel_for(static_cast<std::size_t>(n_seeds), [&](std::size_t i) {
        branch.seeds[i] = displaced(frame.states[i], frame.directions[i], sign);
        branch.fibers[i] = integrate(params, branch.seeds[i], is, gates);
    });
    return branch;
}

Side find_well_side(const SystemParams& params, const MonodromyAnalysis& analysis,
                    const PeriodicOrbit& orbit, Stability stability) {
    const Eigen::Vector4d eigvec =
        stability == Stability::Stable ? analysis.stable_eigvec : analysis.unstable_eigvec;

    // trial fiber from the orbit's initial point on each side: the well-side
    // fiber stays between the gates, the outer one escapes quickly
    const std::vector<EventSpec> gates = escape_events();
    IntegrationSettings is;
    is.rel_tol = 1e-10;
    is.abs_tol = 1e-10;
    is.t_max = 8.0;
    is.store_states = false;
    is.direction = stability == Stability::Stable ? Direction::Backward : Direction::Forward;

    double escape_time[2] = {0.0, 0.0};
    const double signs[2] = {+1.0, -1.0};
    for (int k = 0; k < 2; ++k) {
        const PhaseState seed = displaced(orbit.initial_state, eigvec, signs[k]);
        const Trajectory run = integrate(params, seed, is, gates);
        escape_time[k] = run.terminated_by ? run.end_time() : is.t_max + 1.0;
    }
    if (escape_time[0] != escape_time[1]) {
        return escape_time[0] > escape_time[1] ? Side::Plus : Side::Minus;
    }

    // degenerate fallback: pick the displacement pointing toward the origin
    const EquilibriumPoint eq = saddle_equilibrium(params, orbit.saddle_id);
    const double dot = eigvec[0] * (-eq.state.x) + eigvec[1] * (-eq.state.y);
    return dot >= 0.0 ? Side::Plus : Side::Minus;
}

std::vector<std::vector<SectionCrossing>> section_crossings(const SystemParams& params,
                                                            const ManifoldBranch& branch,
                                                            const SectionConfig& section,
                                                            int p_y_sign) {
    const double y_c = section.y_c;
    std::vector<EventSpec> events = escape_events();
    EventSpec sec;
    sec.id = "section";
    sec.guard = [y_c](double, const PhaseState& s) { return s.y - y_c; };
    sec.terminal = false;
    events.push_back(sec);

    IntegrationSettings is;
    is.rel_tol = 1e-12;
    is.abs_tol = 1e-12;
    is.t_max = branch.t_span;
    is.store_states = false;
    is.direction =
        branch.stability == Stability::Stable ? Direction::Backward : Direction::Forward;

    std::vector<std::vector<SectionCrossing>> crossings(branch.seeds.size());
    parallel_for(branch.seeds.size(), [&](std::size_t i) {
        const Trajectory run = integrate(params, branch.seeds[i], is, events);
        int index = 0;
        for (const EventHit& hit : run.events) {
            if (hit.id != "section") continue;
            if (p_y_sign > 0 ? hit.state.p_y <= 0.0 : hit.state.p_y >= 0.0) continue;
            SectionCrossing c;
            c.x = hit.state.x;
            c.p_x = hit.state.p_x;
            c.p_y = hit.state.p_y;
            c.t = hit.t;
            c.index = ++index;
            crossings[i].push_back(c);
        }
    });

    bool any = false;
    for (const auto& list : crossings) {
        if (!list.empty()) any = true;
    }
    if (!any) throw NoCrossing("section_crossings: no fiber reaches the section");
    return crossings;
}

ReactiveIsland extract_reactive_island(const SystemParams& params, const ManifoldBranch& branch,
                                       const SectionConfig& section) {
    if (branch.stability != Stability::Stable) {
        throw std::invalid_argument("extract_reactive_island: stable branch required");
    }
    const auto crossings = section_crossings(params, branch, section, +1);

    std::size_t missing = 0;
    std::vector<std::array<double, 2>> curve;
    curve.reserve(crossings.size());
    for (const auto& list : crossings) {
        if (list.empty()) {
            ++missing;
            continue;
        }
        curve.push_back({list.front().x, list.front().p_x});
    }
    if (missing * 100 > crossings.size()) {
        throw IncompleteIsland("extract_reactive_island: " + std::to_string(missing) + " of " +
                               std::to_string(crossings.size()) + " fibers never cross");
    }

    // drop consecutive duplicates (including across the wrap)
    std::vector<std::array<double, 2>> cleaned;
    cleaned.reserve(curve.size());
    for (const auto& pt : curve) {
        if (!cleaned.empty() && std::hypot(pt[0] - cleaned.back()[0], pt[1] - cleaned.back()[1]) < 1e-9) {
            continue;
        }
        cleaned.push_back(pt);
    }
    while (cleaned.size() > 1 &&
           std::hypot(cleaned.front()[0] - cleaned.back()[0],
                      cleaned.front()[1] - cleaned.back()[1]) < 1e-9) {
        cleaned.pop_back();
    }

    ReactiveIsland island;
    island.channel = channel_of(branch.orbit.saddle_id);
    island.section = section;
    island.curve = std::move(cleaned);
    island.order = 1;
    return island;
}

namespace {

double point_segment_distance(double px, double py, const std::array<double, 2>& a,
                              const std::array<double, 2>& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double wx = px - a[0], wy = py - a[1];
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (a[0] + t * vx), py - (a[1] + t * vy));
}

} // namespace

bool island_contains(const ReactiveIsland& island, double x, double p_x) {
    const auto& c = island.curve;
    const std::size_t n = c.size();
    if (n < 3) return false;

    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        min_dist = std::min(min_dist, point_segment_distance(x, p_x, c[i], c[(i + 1) % n]));
        if (min_dist < 1e-9) return true;  // boundary counts as inside
    }

    // winding number
    int wn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = c[i];
        const auto& b = c[(i + 1) % n];
        if (a[1] <= p_x) {
            if (b[1] > p_x) {
                const double cross = (b[0] - a[0]) * (p_x - a[1]) - (x - a[0]) * (b[1] - a[1]);
                if (cross > 0.0) ++wn;
            }
        } else {
            if (b[1] <= p_x) {
                const double cross = (b[0] - a[0]) * (p_x - a[1]) - (x - a[0]) * (b[1] - a[1]);
                if (cross < 0.0) --wn;
            }
        }
    }
    return wn != 0;
}

double island_area(const ReactiveIsland& island) {
    const auto& c = island.curve;
    const std::size_t n = c.size();
    double twice_area = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = c[i];
        const auto& b = c[(i + 1) % n];
        twice_area += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(twice_area);
}

SectionBounds section_bounds(const SystemParams& params, const SectionConfig& section) {
    const double y_c = section.y_c;
    const double coeff = 0.5 * params.omega_x * params.omega_x + y_c;
    const double v0 = 0.5 * params.omega_y * params.omega_y * y_c * y_c -
                      (params.delta / 3.0) * y_c * y_c * y_c;
    if (!(coeff > 0.0)) {
        throw EmptySection("section is unbounded in x at y_c = " + std::to_string(y_c));
    }
    if (!(section.energy > v0)) {
        throw EmptySection("energy below the section minimum potential");
    }
    SectionBounds b;
    b.x_max = std::sqrt((section.energy - v0) / coeff);
    b.p_x_max = std::sqrt(2.0 * params.m_x * (section.energy - v0));
    return b;
}

std::vector<std::array<double, 2>> energy_boundary_on_section(const SystemParams& params,
                                                              const SectionConfig& section,
                                                              int n_samples) {
    const SectionBounds bounds = section_bounds(params, section);
    const int half = std::max(8, n_samples / 2);
    std::vector<std::array<double, 2>> curve;
    curve.reserve(static_cast<std::size_t>(2 * half));
    auto p_x_at = [&](double x) {
        const double rad =
            2.0 * params.m_x * (section.energy - potential_energy(params, x, section.y_c));
        return rad > 0.0 ? std::sqrt(rad) : 0.0;
    };
    for (int i = 0; i <= half; ++i) {
        const double x = -bounds.x_max + 2.0 * bounds.x_max * i / half;
        curve.push_back({x, p_x_at(x)});
    }
    for (int i = half - 1; i > 0; --i) {
        const double x = -bounds.x_max + 2.0 * bounds.x_max * i / half;
        curve.push_back({x, -p_x_at(x)});
    }
    return curve;
}

ReactiveIsland compute_island(const SystemParams& params, SaddleId saddle,
                              const SectionConfig& section, int n_seeds, double t_span) {
    const PeriodicOrbit orbit = orbit_at_energy(params, saddle, section.energy);
    const MonodromyAnalysis mono = monodromy(params, orbit);
    const Side side = find_well_side(params, mono, orbit, Stability::Stable);
    const ManifoldBranch branch =
        globalize_manifold(params, mono, orbit, Stability::Stable, side, n_seeds, t_span);
    return extract_reactive_island(params, branch, section);
}

} // namespace hhri
