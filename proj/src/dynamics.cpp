#include "hhri/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace hhri {

void SystemParams::validate() const {
    if (!(m_x > 0.0) || !(m_y > 0.0) || !(omega_x > 0.0) || !(omega_y > 0.0)) {
        throw std::invalid_argument("masses and frequencies must be positive");
    }
    if (delta == 0.0) {
        throw std::invalid_argument("delta must be nonzero");
    }
}

bool PhaseState::finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(p_x) && std::isfinite(p_y);
}

double potential_energy(const SystemParams& p, double x, double y) {
    return 0.5 * p.omega_x * p.omega_x * x * x + 0.5 * p.omega_y * p.omega_y * y * y +
           x * x * y - (p.delta / 3.0) * y * y * y;
}

double hamiltonian_energy(const SystemParams& p, const PhaseState& s) {
    return s.p_x * s.p_x / (2.0 * p.m_x) + s.p_y * s.p_y / (2.0 * p.m_y) +
           potential_energy(p, s.x, s.y);
}

Eigen::Vector4d vector_field(const SystemParams& p, const PhaseState& s) {
    Eigen::Vector4d f;
    f[0] = s.p_x / p.m_x;
    f[1] = s.p_y / p.m_y;
    f[2] = -p.omega_x * p.omega_x * s.x - 2.0 * s.x * s.y;
    f[3] = -p.omega_y * p.omega_y * s.y - s.x * s.x + p.delta * s.y * s.y;
    return f;
}

Eigen::Matrix4d linearize(const SystemParams& p, const PhaseState& s) {
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 2) = 1.0 / p.m_x;
    a(1, 3) = 1.0 / p.m_y;
    a(2, 0) = -p.omega_x * p.omega_x - 2.0 * s.y;
    a(2, 1) = -2.0 * s.x;
    a(3, 0) = -2.0 * s.x;
    a(3, 1) = -p.omega_y * p.omega_y + 2.0 * p.delta * s.y;
    return a;
}

namespace {

std::array<std::complex<double>, 4> sorted_eigenvalues(const Eigen::Matrix4d& a) {
    Eigen::EigenSolver<Eigen::Matrix4d> es(a);
    std::array<std::complex<double>, 4> ev;
    for (int i = 0; i < 4; ++i) ev[size_t(i)] = es.eigenvalues()[i];
    // deterministic order: by real part, then imaginary part
    std::sort(ev.begin(), ev.end(), [](const auto& l, const auto& r) {
        if (l.real() != r.real()) return l.real() < r.real();
        return l.imag() < r.imag();
    });
    return ev;
}

EquilibriumPoint make_equilibrium(const SystemParams& p, double x, double y) {
    EquilibriumPoint eq;
    eq.state = PhaseState{x, y, 0.0, 0.0};
    eq.eigenvalues = sorted_eigenvalues(linearize(p, eq.state));
    bool has_real_pair = false;
    for (const auto& ev : eq.eigenvalues) {
        if (std::abs(ev.real()) > 1e-8) has_real_pair = true;
    }
    eq.kind = has_real_pair ? EquilibriumKind::SaddleCenter : EquilibriumKind::CenterCenter;
    return eq;
}

} // namespace

std::vector<EquilibriumPoint> equilibria(const SystemParams& p) {
    p.validate();
    const double wx2 = p.omega_x * p.omega_x;
    const double wy2 = p.omega_y * p.omega_y;
    // grad V = 0: the off-axis roots satisfy y = -wx^2/2 and
    // x^2 = delta*y^2 - wy^2*y, evaluated at that y.
    const double ys = -wx2 / 2.0;
    const double xs2 = p.delta * ys * ys - wy2 * ys;
    std::vector<EquilibriumPoint> eqs;
    eqs.push_back(make_equilibrium(p, 0.0, 0.0));
    eqs.push_back(make_equilibrium(p, 0.0, wy2 / p.delta));
    if (xs2 > 0.0) {
        const double xs = std::sqrt(xs2);
        eqs.push_back(make_equilibrium(p, -xs, ys));
        eqs.push_back(make_equilibrium(p, xs, ys));
    }
    return eqs;
}

EquilibriumPoint saddle_equilibrium(const SystemParams& p, SaddleId id) {
    const auto eqs = equilibria(p);
    for (const auto& eq : eqs) {
        if (eq.kind != EquilibriumKind::SaddleCenter) continue;
        switch (id) {
            case SaddleId::Top:
                if (eq.state.x == 0.0) return eq;
                break;
            case SaddleId::Left:
                if (eq.state.x < 0.0) return eq;
                break;
            case SaddleId::Right:
                if (eq.state.x > 0.0) return eq;
                break;
        }
    }
    throw NotASaddle("requested saddle equilibrium not found");
}

double saddle_energy(const SystemParams& p) {
    const auto eq = saddle_equilibrium(p, SaddleId::Top);
    return potential_energy(p, eq.state.x, eq.state.y);
}

SaddleEigenbasis saddle_eigenbasis(const SystemParams& p, const EquilibriumPoint& eq) {
    if (eq.kind != EquilibriumKind::SaddleCenter) {
        throw NotASaddle("saddle_eigenbasis requires a saddle x center equilibrium");
    }
    const Eigen::Matrix4d a = linearize(p, eq.state);
    Eigen::EigenSolver<Eigen::Matrix4d> es(a);

    SaddleEigenbasis basis;
    int idx_plus = -1, idx_minus = -1, idx_center = -1;
    for (int i = 0; i < 4; ++i) {
        const auto ev = es.eigenvalues()[i];
        if (std::abs(ev.imag()) < 1e-8 && ev.real() > 1e-8) idx_plus = i;
        if (std::abs(ev.imag()) < 1e-8 && ev.real() < -1e-8) idx_minus = i;
        if (std::abs(ev.real()) < 1e-8 && ev.imag() > 1e-8) idx_center = i;
    }
    if (idx_plus < 0 || idx_minus < 0 || idx_center < 0) {
        throw NotASaddle("linearization does not have saddle x center structure");
    }
    basis.lambda = es.eigenvalues()[idx_plus].real();
    basis.omega = es.eigenvalues()[idx_center].imag();

    auto real_eigvec = [&](int idx) {
        // eigenvector of a real eigenvalue: strip the arbitrary complex phase
        Eigen::Vector4cd v = es.eigenvectors().col(idx);
        int imax = 0;
        for (int i = 1; i < 4; ++i) {
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        }
        v /= v[imax] / std::abs(v[imax]);
        Eigen::Vector4d r = v.real();
        r.normalize();
        // orientation: first component of magnitude above 1e-12 is positive
        for (int i = 0; i < 4; ++i) {
            if (std::abs(r[i]) > 1e-12) {
                if (r[i] < 0.0) r = -r;
                break;
            }
        }
        return r;
    };
    basis.v_plus = real_eigvec(idx_plus);
    basis.v_minus = real_eigvec(idx_minus);

    Eigen::Vector4cd vc = es.eigenvectors().col(idx_center);
    if (std::abs(vc[0]) > 1e-10 * vc.norm()) {
        vc /= vc[0];  // closed-form normalization [1, k2, ...]
    } else {
        vc /= vc.norm();
    }
    basis.v_center_re = vc.real();
    basis.v_center_im = vc.imag();
    return basis;
}

std::pair<PhaseState, double> linear_po_guess(const SystemParams& p,
                                              const EquilibriumPoint& eq,
                                              double a_x) {
    const SaddleEigenbasis basis = saddle_eigenbasis(p, eq);
    // center solution 2 Re(B e^{i w t} v_c) with B = -a_x/2 at t = 0
    PhaseState s = eq.state;
    s.x -= a_x * basis.v_center_re[0];
    s.y -= a_x * basis.v_center_re[1];
    s.p_x -= a_x * basis.v_center_re[2];
    s.p_y -= a_x * basis.v_center_re[3];
    const double period_guess = 2.0 * M_PI / basis.omega;
    return {s, period_guess};
}

} // namespace hhri
