#include "hhri/orbits.hpp"

#include <algorithm>
#include <cmath>

namespace hhri {

namespace {

EventSpec half_period_event() {
    EventSpec ev;
    ev.id = "px-zero";
    ev.guard = [](double, const PhaseState& s) { return s.p_x; };
    ev.direction = EventDirection::Any;
    ev.terminal = true;
    return ev;
}

} // namespace

PeriodicOrbit differential_correction(const SystemParams& params, const PhaseState& guess,
                                      SaddleId saddle_id, const CorrectionSettings& settings) {
    PhaseState state = guess;
    state.p_x = 0.0;
    state.p_y = 0.0;

    IntegrationSettings is;
    is.rel_tol = settings.rel_tol;
    is.abs_tol = settings.abs_tol;
    is.t_max = settings.t_search;
    is.store_states = false;

    const std::vector<EventSpec> events{half_period_event()};

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        const StmTrajectory run = integrate_variational(params, state, is, events);
        if (run.base.events.empty()) {
            throw EventNotFound("differential correction: no p_x = 0 crossing within t = " +
                                std::to_string(settings.t_search));
        }
        const EventHit& hit = run.base.events.front();
        const Eigen::Matrix4d& stm = run.event_stm.front();

        if (std::abs(hit.state.p_y) < settings.p_y_tol) {
            PeriodicOrbit orbit;
            orbit.initial_state = state;
            orbit.period = 2.0 * hit.t;
            orbit.energy = hamiltonian_energy(params, state);
            orbit.saddle_id = saddle_id;
            return orbit;
        }

        const Eigen::Vector4d f1 = vector_field(params, hit.state);
        if (std::abs(f1[2]) < 1e-13) {
            throw SingularCorrection("differential correction: dp_x/dt vanishes at crossing");
        }
        const double denom = stm(3, 1) - stm(2, 1) * f1[3] / f1[2];
        if (std::abs(denom) < 1e-14) {
            throw SingularCorrection("differential correction: singular correction denominator");
        }
        state.y -= hit.state.p_y / denom;
    }
    throw NoConvergence("differential correction: iteration cap reached");
}

ContinuationFamily continue_family(const SystemParams& params, const PeriodicOrbit& orbit1,
                                   const PeriodicOrbit& orbit2, double target_energy,
                                   const CorrectionSettings& settings, double max_step_norm) {
    if (orbit1.saddle_id != orbit2.saddle_id) {
        throw std::invalid_argument("continue_family: orbits from different saddles");
    }
    if (!(orbit1.energy < orbit2.energy)) {
        throw std::invalid_argument("continue_family: seed energies must increase");
    }
    if (!(orbit2.energy < target_energy)) {
        // the seeds already bracket: nothing to extend
        ContinuationFamily family;
        family.orbits = {orbit1, orbit2};
        return family;
    }

    ContinuationFamily family;
    family.orbits = {orbit1, orbit2};

    constexpr int kMaxOrbits = 4000;
    constexpr int kMaxHalvings = 10;
    while (static_cast<int>(family.orbits.size()) < kMaxOrbits) {
        const PeriodicOrbit& prev = family.orbits[family.orbits.size() - 2];
        const PeriodicOrbit& last = family.orbits.back();
        if (last.energy >= target_energy) return family;

        double dx = last.initial_state.x - prev.initial_state.x;
        double dy = last.initial_state.y - prev.initial_state.y;
        const double norm = std::hypot(dx, dy);
        if (norm > max_step_norm) {
            dx *= max_step_norm / norm;
            dy *= max_step_norm / norm;
        }

        bool extended = false;
        for (int halving = 0; halving < kMaxHalvings; ++halving) {
            PhaseState guess = last.initial_state;
            guess.x += dx;
            guess.y += dy;
            try {
                PeriodicOrbit next =
                    differential_correction(params, guess, last.saddle_id, settings);
                if (next.energy <= last.energy) {
                    dx *= 0.5;
                    dy *= 0.5;
                    continue;
                }
                family.orbits.push_back(next);
                extended = true;
                break;
            } catch (const NumericalError&) {
                dx *= 0.5;
                dy *= 0.5;
            }
        }
        if (!extended) {
            throw EnergyNotBracketed("continue_family: family stalled at E = " +
                                     std::to_string(family.orbits.back().energy));
        }
    }
    throw EnergyNotBracketed("continue_family: orbit budget exhausted before target energy");
}

PeriodicOrbit orbit_at_energy(const SystemParams& params, SaddleId saddle_id, double energy,
                              const CorrectionSettings& settings) {
    const EquilibriumPoint eq = saddle_equilibrium(params, saddle_id);
    const double e_saddle = potential_energy(params, eq.state.x, eq.state.y);
    if (!(energy > e_saddle)) {
        throw EnergyBelowSaddle("orbit_at_energy: E = " + std::to_string(energy) +
                                " does not exceed the saddle energy " +
                                std::to_string(e_saddle));
    }

    // small-amplitude seed pair; shrink if the target sits extremely close
    // to the saddle energy
    double a_x = 1e-4;
    PeriodicOrbit o1, o2;
    for (int attempt = 0;; ++attempt) {
        o1 = differential_correction(params, linear_po_guess(params, eq, a_x).first,
                                     saddle_id, settings);
        o2 = differential_correction(params, linear_po_guess(params, eq, 2.0 * a_x).first,
                                     saddle_id, settings);
        if (o2.energy < energy) break;
        if (attempt >= 12) {
            throw EnergyNotBracketed("orbit_at_energy: cannot seed below target energy");
        }
        a_x *= 0.25;
    }

    const ContinuationFamily family = continue_family(params, o1, o2, energy, settings);
    PeriodicOrbit lo = family.orbits.front();
    PeriodicOrbit hi = family.orbits.back();
    for (const PeriodicOrbit& orbit : family.orbits) {
        if (orbit.energy <= energy && orbit.energy > lo.energy) lo = orbit;
        if (orbit.energy >= energy && orbit.energy < hi.energy) hi = orbit;
    }

    if (std::abs(lo.energy - energy) < 1e-10) return lo;
    if (std::abs(hi.energy - energy) < 1e-10) return hi;

    for (int iter = 0; iter < 60; ++iter) {
        PhaseState mid;
        mid.x = 0.5 * (lo.initial_state.x + hi.initial_state.x);
        mid.y = 0.5 * (lo.initial_state.y + hi.initial_state.y);
        PeriodicOrbit om = differential_correction(params, mid, saddle_id, settings);
        if (std::abs(om.energy - energy) < 1e-10) return om;
        if (om.energy < energy) {
            lo = om;
        } else {
            hi = om;
        }
    }
    throw NoConvergence("orbit_at_energy: bisection did not reach |H - E| < 1e-10");
}

MonodromyAnalysis monodromy(const SystemParams& params, const PeriodicOrbit& orbit,
                            double rel_tol, double abs_tol) {
    IntegrationSettings is;
    is.rel_tol = rel_tol;
    is.abs_tol = abs_tol;
    is.t_max = orbit.period;
    is.store_states = false;

    const StmTrajectory run = integrate_variational(params, orbit.initial_state, is);
    MonodromyAnalysis mono;
    mono.matrix = run.stm.back();

    Eigen::EigenSolver<Eigen::Matrix4d> es(mono.matrix);
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
    });
    for (int i = 0; i < 4; ++i) {
        mono.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()[order[static_cast<std::size_t>(i)]];
    }

    auto real_unit = [&](int idx) {
        Eigen::Vector4cd v = es.eigenvectors().col(idx);
        int imax = 0;
        for (int i = 1; i < 4; ++i) {
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        }
        v /= v[imax] / std::abs(v[imax]);
        Eigen::Vector4d r = v.real();
        r.normalize();
        for (int i = 0; i < 4; ++i) {
            if (std::abs(r[i]) > 1e-12) {
                if (r[i] < 0.0) r = -r;
                break;
            }
        }
        return r;
    };
    mono.unstable_eigvec = real_unit(order[0]);
    mono.stable_eigvec = real_unit(order[3]);
    return mono;
}

} // namespace hhri
