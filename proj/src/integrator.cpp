#include "hhri/integrator.hpp"

#include <cmath>

namespace hhri {

void IntegrationSettings::validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0) || !(abs_tol > 0.0 && abs_tol < 1.0)) {
        throw std::invalid_argument("tolerances must lie in (0, 1)");
    }
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
}

namespace {

inline PhaseState to_state(const rk::Vec<4>& y) { return PhaseState{y[0], y[1], y[2], y[3]}; }

template <std::size_t N>
inline PhaseState head_state(const rk::Vec<N>& y) {
    return PhaseState{y[0], y[1], y[2], y[3]};
}

template <std::size_t N>
std::vector<rk::RawEvent<N>> wrap_events(const std::vector<EventSpec>& events) {
    std::vector<rk::RawEvent<N>> raw;
    raw.reserve(events.size());
    for (const auto& ev : events) {
        rk::RawEvent<N> r;
        r.guard = [&ev](double t, const rk::Vec<N>& y) { return ev.guard(t, head_state(y)); };
        r.direction = ev.direction == EventDirection::Rising    ? +1
                      : ev.direction == EventDirection::Falling ? -1
                                                                : 0;
        r.terminal = ev.terminal;
        raw.push_back(std::move(r));
    }
    return raw;
}

} // namespace

Trajectory integrate(const SystemParams& params, const PhaseState& s0,
                     const IntegrationSettings& settings,
                     const std::vector<EventSpec>& events) {
    settings.validate();
    if (!s0.finite()) throw NonFiniteState("integrate: initial state not finite");

    const double sgn = settings.direction == Direction::Forward ? 1.0 : -1.0;
    const double mx = params.m_x, my = params.m_y;
    const double wx2 = params.omega_x * params.omega_x, wy2 = params.omega_y * params.omega_y;
    const double delta = params.delta;
    auto rhs = [=](double, const rk::Vec<4>& y, rk::Vec<4>& f) {
        f[0] = sgn * (y[2] / mx);
        f[1] = sgn * (y[3] / my);
        f[2] = sgn * (-wx2 * y[0] - 2.0 * y[0] * y[1]);
        f[3] = sgn * (-wy2 * y[1] - y[0] * y[0] + delta * y[1] * y[1]);
    };

    rk::StepControl ctrl{settings.rel_tol, settings.abs_tol, settings.max_step};
    auto raw_events = wrap_events<4>(events);

    Trajectory traj;
    traj.direction = settings.direction;
    traj.times.push_back(0.0);
    traj.states.push_back(s0);

    auto on_step = [&](double t, const rk::Vec<4>& y, const rk::DenseStep<4>&) {
        if (settings.store_states) {
            traj.times.push_back(t);
            traj.states.push_back(to_state(y));
        }
    };
    auto on_event = [&](std::size_t e, double t, const rk::Vec<4>& y) {
        traj.events.push_back(EventHit{events[e].id, t, to_state(y)});
    };

    rk::Vec<4> y0{s0.x, s0.y, s0.p_x, s0.p_y};
    auto res = rk::integrate_raw<4>(rhs, y0, settings.t_max, ctrl, raw_events, on_step, on_event);

    if (!settings.store_states) {
        traj.times.push_back(res.t_end);
        traj.states.push_back(to_state(res.y_end));
    }
    if (res.terminal_event) traj.terminated_by = events[*res.terminal_event].id;
    if (!traj.end_state().finite()) throw NonFiniteState("integrate: final state not finite");
    return traj;
}

StmTrajectory integrate_variational(const SystemParams& params, const PhaseState& s0,
                                    const IntegrationSettings& settings,
                                    const std::vector<EventSpec>& events) {
    settings.validate();
    if (!s0.finite()) throw NonFiniteState("integrate: initial state not finite");

    const double sgn = settings.direction == Direction::Forward ? 1.0 : -1.0;
    const double mx = params.m_x, my = params.m_y;
    const double wx2 = params.omega_x * params.omega_x, wy2 = params.omega_y * params.omega_y;
    const double delta = params.delta;
    // y[0..3] state, y[4..19] Phi in column-major order
    auto rhs = [=](double, const rk::Vec<20>& y, rk::Vec<20>& f) {
        f[0] = sgn * (y[2] / mx);
        f[1] = sgn * (y[3] / my);
        f[2] = sgn * (-wx2 * y[0] - 2.0 * y[0] * y[1]);
        f[3] = sgn * (-wy2 * y[1] - y[0] * y[0] + delta * y[1] * y[1]);
        const double a20 = -wx2 - 2.0 * y[1];
        const double a21v = -2.0 * y[0];
        const double a31v = -wy2 + 2.0 * delta * y[1];
        for (int col = 0; col < 4; ++col) {
            const std::size_t b = 4 + 4 * static_cast<std::size_t>(col);
            f[b + 0] = sgn * (y[b + 2] / mx);
            f[b + 1] = sgn * (y[b + 3] / my);
            f[b + 2] = sgn * (a20 * y[b + 0] + a21v * y[b + 1]);
            f[b + 3] = sgn * (a21v * y[b + 0] + a31v * y[b + 1]);
        }
    };

    rk::StepControl ctrl{settings.rel_tol, settings.abs_tol, settings.max_step};
    auto raw_events = wrap_events<20>(events);

    StmTrajectory out;
    out.base.direction = settings.direction;
    out.base.times.push_back(0.0);
    out.base.states.push_back(s0);
    out.stm.push_back(Eigen::Matrix4d::Identity());

    auto unpack = [](const rk::Vec<20>& y) {
        Eigen::Matrix4d m;
        for (int col = 0; col < 4; ++col) {
            for (int row = 0; row < 4; ++row) {
                m(row, col) = y[4 + 4 * static_cast<std::size_t>(col) + static_cast<std::size_t>(row)];
            }
        }
        return m;
    };

    auto on_step = [&](double t, const rk::Vec<20>& y, const rk::DenseStep<20>&) {
        if (settings.store_states) {
            out.base.times.push_back(t);
            out.base.states.push_back(head_state(y));
            out.stm.push_back(unpack(y));
        }
    };
    auto on_event = [&](std::size_t e, double t, const rk::Vec<20>& y) {
        out.base.events.push_back(EventHit{events[e].id, t, head_state(y)});
        out.event_stm.push_back(unpack(y));
    };

    rk::Vec<20> y0{};
    y0[0] = s0.x;
    y0[1] = s0.y;
    y0[2] = s0.p_x;
    y0[3] = s0.p_y;
    for (int i = 0; i < 4; ++i) y0[4 + 5 * static_cast<std::size_t>(i)] = 1.0;

    auto res =
        rk::integrate_raw<20>(rhs, y0, settings.t_max, ctrl, raw_events, on_step, on_event);

    if (!settings.store_states) {
        out.base.times.push_back(res.t_end);
        out.base.states.push_back(head_state(res.y_end));
        out.stm.push_back(unpack(res.y_end));
    }
    if (res.terminal_event) out.base.terminated_by = events[*res.terminal_event].id;
    if (!out.base.end_state().finite()) {
        throw NonFiniteState("integrate: final state not finite");
    }
    return out;
}

const double kEscapeX = 1.25;
const double kEscapeY = 1.25;

std::vector<EventSpec> escape_events() {
    std::vector<EventSpec> ev(3);
    ev[0].id = "escape-left";
    ev[0].guard = [](double, const PhaseState& s) { return s.x + kEscapeX; };
    ev[0].terminal = true;
    ev[1].id = "escape-right";
    ev[1].guard = [](double, const PhaseState& s) { return s.x - kEscapeX; };
    ev[1].terminal = true;
    ev[2].id = "escape-top";
    ev[2].guard = [](double, const PhaseState& s) { return s.y - kEscapeY; };
    ev[2].terminal = true;
    return ev;
}

int escape_channel(const std::string& event_id) {
    if (event_id == "escape-left") return 1;
    if (event_id == "escape-right") return 2;
    if (event_id == "escape-top") return 3;
    return 0;
}

} // namespace hhri
