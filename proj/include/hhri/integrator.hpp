#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hhri/dynamics.hpp"
#include "hhri/rk.hpp"

namespace hhri {

enum class Direction { Forward, Backward };
enum class EventDirection { Rising, Falling, Any };

struct IntegrationSettings {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double max_step = 0.0;  ///< 0 = uncapped
    double t_max = 0.0;
    Direction direction = Direction::Forward;
    bool store_states = true;  ///< keep every accepted step (else endpoints only)

    void validate() const;
};

/// Scalar guard g(t, state); an event fires where g crosses zero. Backward
/// runs hand the guard the (positive) elapsed time and the actual state.
struct EventSpec {
    std::string id;
    std::function<double(double, const PhaseState&)> guard;
    EventDirection direction = EventDirection::Any;
    bool terminal = false;
};

struct EventHit {
    std::string id;
    double t = 0.0;
    PhaseState state;
};

/// Times are elapsed (positive, strictly increasing) in both directions.
struct Trajectory {
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<EventHit> events;
    std::optional<std::string> terminated_by;
    Direction direction = Direction::Forward;

    double end_time() const { return times.back(); }
    const PhaseState& end_state() const { return states.back(); }
};

/// Trajectory plus the state-transition matrices Phi(t, 0) of the flow in
/// the integration direction; stm aligns with times, event_stm with events.
struct StmTrajectory {
    Trajectory base;
    std::vector<Eigen::Matrix4d> stm;
    std::vector<Eigen::Matrix4d> event_stm;
};

/// Integrates Hamilton's equations until t_max or the first terminal event.
Trajectory integrate(const SystemParams& params, const PhaseState& s0,
                     const IntegrationSettings& settings,
                     const std::vector<EventSpec>& events = {});

/// Co-integrates the variational equations dPhi/dt = A(x(t)) Phi.
StmTrajectory integrate_variational(const SystemParams& params, const PhaseState& s0,
                                    const IntegrationSettings& settings,
                                    const std::vector<EventSpec>& events = {});

/// Standard escape gates: x = -1.25 ("left", channel 1), x = +1.25
/// ("right", channel 2), y = +1.25 ("top", channel 3), all terminal.
std::vector<EventSpec> escape_events();
extern const double kEscapeX;  ///< 1.25
extern const double kEscapeY;  ///< 1.25

/// Channel number for an escape event id, 0 if not an escape gate.
int escape_channel(const std::string& event_id);

} // namespace hhri
