#pragma once
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hhri/errors.hpp"

// Embedded Dormand-Prince 5(4) pair with PI step control, 4th-order dense
// output, and event location on the dense interpolant. The propagated state
// is a fixed-size array so the same engine serves the plain flow (N=4), the
// variational system (N=20) and path-integral co-integration (N=5).

namespace hhri::rk {

template <std::size_t N>
using Vec = std::array<double, N>;

struct StepControl {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double max_step = 0.0;  ///< 0 = uncapped
};

/// One accepted step in Hairer's contd5 form:
/// y(theta) = r1 + theta*(r2 + (1-theta)*(r3 + theta*(r4 + (1-theta)*r5))).
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    Vec<N> r1{}, r2{}, r3{}, r4{}, r5{};

    void eval(double t, Vec<N>& out) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
    }
};

/// Event guard over the raw state vector. A guard that starts at zero is
/// "unarmed" until its magnitude first exceeds arm_threshold, so integrations
/// seeded exactly on an event surface do not fire immediately.
template <std::size_t N>
struct RawEvent {
    std::function<double(double, const Vec<N>&)> guard;
    int direction = 0;  ///< +1 rising, -1 falling, 0 any
    bool terminal = false;
    double arm_threshold = 1e-9;
};

struct RawHit {
    std::size_t event_index = 0;
    double t = 0.0;
};

template <std::size_t N>
struct RawResult {
    double t_end = 0.0;
    Vec<N> y_end{};
    std::optional<std::size_t> terminal_event;
};

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;
} // namespace dp5

/// Integrates y' = rhs(t, y) from t=0 to t_end > 0.
///
/// on_step(t, y, dense) runs after every accepted step (dense spans the step
/// just taken); event hits are refined on the interpolant to a time bracket
/// of a few ulps, recorded via on_event(event_index, t, y), and a terminal
/// hit truncates the run. The caller sees monotonically increasing t.
template <std::size_t N, class Rhs, class StepSink, class EventSink>
RawResult<N> integrate_raw(Rhs&& rhs, Vec<N> y, double t_end, const StepControl& ctrl,
                           const std::vector<RawEvent<N>>& events, StepSink&& on_step,
                           EventSink&& on_event) {
    using namespace dp5;
    static constexpr double kSafe = 0.9, kBeta = 0.04;
    static constexpr double kExpo1 = 0.2 - kBeta * 0.75;
    static constexpr double kMaxFac = 10.0, kMinFac = 0.2;
    static constexpr std::size_t kMaxSteps = 20000000;

    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");
    for (double v : y) {
        if (!std::isfinite(v)) throw NonFiniteState("integrate: initial state not finite");
    }

    const double hmax = ctrl.max_step > 0.0 ? std::min(ctrl.max_step, t_end) : t_end;

    Vec<N> k1, k2, k3, k4, k5, k6, k7, yt, ynew;
    auto scale = [&](std::size_t i, const Vec<N>& a, const Vec<N>& b) {
        return ctrl.abs_tol + ctrl.rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
    };

    rhs(0.0, y, k1);

    // initial step size (Hairer's HINIT)
    double h;
    {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = ctrl.abs_tol + ctrl.rel_tol * std::abs(y[i]);
            dnf += (k1[i] / sc) * (k1[i] / sc);
            dny += (y[i] / sc) * (y[i] / sc);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, hmax);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * k1[i];
        rhs(h, yt, k2);
        double der2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = ctrl.abs_tol + ctrl.rel_tol * std::abs(y[i]);
            der2 += ((k2[i] - k1[i]) / sc) * ((k2[i] - k1[i]) / sc);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(der2, std::sqrt(dnf));
        const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                           : std::pow(0.01 / der12, 0.2);
        h = std::min({100.0 * h, h1, hmax});
    }

    // per-event tracking for location on the dense output
    struct EventState {
        double g_prev = 0.0;
        bool armed = false;
    };
    std::vector<EventState> estate(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
        estate[e].g_prev = events[e].guard(0.0, y);
        estate[e].armed = std::abs(estate[e].g_prev) > events[e].arm_threshold;
    }

    double t = 0.0;
    double facold = 1e-4;
    bool rejected = false;
    bool last = false;
    DenseStep<N> dense;
    Vec<N> ysample;

    for (std::size_t step = 0; step < kMaxSteps; ++step) {
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }
        if (h <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t)) {
            throw StepSizeUnderflow("integrate: step size underflow at t = " + std::to_string(t));
        }

        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, yt, k2);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, yt, k3);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, yt, k4);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, yt, k5);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                a65 * k5[i]);
        rhs(t + h, yt, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                  a76 * k6[i]);
        rhs(t + h, ynew, k7);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc = scale(i, y, ynew);
            err += (ei / sc) * (ei / sc);
            if (!std::isfinite(ynew[i])) finite = false;
        }
        err = std::sqrt(err / static_cast<double>(N));

        if (!finite || !std::isfinite(err)) {
            h *= 0.1;
            rejected = true;
            last = false;
            continue;
        }

        const double fac11 = std::pow(err, kExpo1);
        if (err > 1.0) {
            h /= std::min(1.0 / kMinFac, fac11 / kSafe);
            rejected = true;
            last = false;
            continue;
        }

        // step accepted: build the dense interpolant
        dense.t0 = t;
        dense.h = h;
        for (std::size_t i = 0; i < N; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            dense.r1[i] = y[i];
            dense.r2[i] = ydiff;
            dense.r3[i] = bspl;
            dense.r4[i] = ydiff - h * k7[i] - bspl;
            dense.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                               d6 * k6[i] + d7 * k7[i]);
        }

        // event search on the dense output, 8 samples per step
        std::vector<RawHit> hits;
        static constexpr int kSamples = 8;
        for (std::size_t e = 0; e < events.size(); ++e) {
            double ta = t;
            double ga = estate[e].g_prev;
            bool armed = estate[e].armed;
            for (int j = 1; j <= kSamples; ++j) {
                const double tb = (j == kSamples) ? t + h
                                                  : t + h * (static_cast<double>(j) / kSamples);
                double gb;
                if (j == kSamples) {
                    gb = events[e].guard(tb, ynew);
                } else {
                    dense.eval(tb, ysample);
                    gb = events[e].guard(tb, ysample);
                }
                if (!armed) {
                    if (std::abs(gb) > events[e].arm_threshold) armed = true;
                } else {
                    const bool crossing = (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0);
                    const int dir = (gb > ga) ? +1 : -1;
                    if (crossing && (events[e].direction == 0 || events[e].direction == dir)) {
                        // bisection to a few-ulp time bracket
                        double lo = ta, hi = tb, glo = ga;
                        for (int it = 0; it < 128; ++it) {
                            if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                                               std::max(1.0, hi)) {
                                break;
                            }
                            const double mid = 0.5 * (lo + hi);
                            dense.eval(mid, ysample);
                            const double gm = events[e].guard(mid, ysample);
                            if (gm == 0.0) {
                                lo = hi = mid;
                                break;
                            }
                            if ((glo < 0.0) == (gm < 0.0)) {
                                lo = mid;
                                glo = gm;
                            } else {
                                hi = mid;
                            }
                        }
                        hits.push_back(RawHit{e, 0.5 * (lo + hi)});
                    }
                }
                ta = tb;
                ga = gb;
            }
            estate[e].g_prev = ga;
            estate[e].armed = armed;
        }
        std::sort(hits.begin(), hits.end(),
                  [](const RawHit& a, const RawHit& b) { return a.t < b.t; });

        for (const RawHit& hit : hits) {
            dense.eval(hit.t, ysample);
            on_event(hit.event_index, hit.t, ysample);
            if (events[hit.event_index].terminal) {
                RawResult<N> res;
                res.t_end = hit.t;
                res.y_end = ysample;
                res.terminal_event = hit.event_index;
                on_step(hit.t, ysample, dense);
                return res;
            }
        }

        t += h;
        y = ynew;
        k1 = k7;  // FSAL
        on_step(t, y, dense);

        if (last) {
            RawResult<N> res;
            res.t_end = t;
            res.y_end = y;
            return res;
        }

        double fac = fac11 / std::pow(facold, kBeta);
        fac = std::max(1.0 / kMaxFac, std::min(1.0 / kMinFac, fac / kSafe));
        double hnew = h / fac;
        if (rejected) hnew = std::min(hnew, h);
        rejected = false;
        facold = std::max(err, 1e-4);
        h = std::min(hnew, hmax);
    }
    throw NumericalError("integrate: step budget exhausted");
}

} // namespace hhri::rk
