#pragma once
#include <array>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hhri/errors.hpp"

namespace hhri {

/// Parameters of the cubically coupled two-oscillator Hamiltonian
///   H = px^2/(2 m_x) + py^2/(2 m_y)
///     + (1/2) wx^2 x^2 + (1/2) wy^2 y^2 + x^2 y - (delta/3) y^3.
/// The classical benchmark values set everything to 1.
struct SystemParams {
    double m_x = 1.0;
    double m_y = 1.0;
    double omega_x = 1.0;
    double omega_y = 1.0;
    double delta = 1.0;

    /// Throws std::invalid_argument unless masses/frequencies are positive
    /// and delta is nonzero.
    void validate() const;
};

/// A point of the four-dimensional phase space.
struct PhaseState {
    double x = 0.0;
    double y = 0.0;
    double p_x = 0.0;
    double p_y = 0.0;

    bool finite() const;
};

enum class EquilibriumKind { CenterCenter, SaddleCenter };

/// Labels for the three index-one saddles; matches the escape channel
/// numbering used for trajectory labels (Left=1, Right=2, Top=3).
enum class SaddleId { Top, Left, Right };

struct EquilibriumPoint {
    PhaseState state;
    EquilibriumKind kind = EquilibriumKind::CenterCenter;
    std::array<std::complex<double>, 4> eigenvalues{};
};

/// Eigen-structure of the linearization at a saddle x center equilibrium:
/// a real pair +-lambda and an imaginary pair +-i*omega.
struct SaddleEigenbasis {
    double lambda = 0.0;  ///< growth rate of the real pair (> 0)
    double omega = 0.0;   ///< frequency of the center pair (> 0)
    Eigen::Vector4d v_plus;       ///< eigenvector for +lambda
    Eigen::Vector4d v_minus;      ///< eigenvector for -lambda
    Eigen::Vector4d v_center_re;  ///< Re of the +i*omega eigenvector
    Eigen::Vector4d v_center_im;  ///< Im of the +i*omega eigenvector
};

double potential_energy(const SystemParams& p, double x, double y);
double hamiltonian_energy(const SystemParams& p, const PhaseState& s);

/// (dx/dt, dy/dt, dpx/dt, dpy/dt) of Hamilton's equations.
Eigen::Vector4d vector_field(const SystemParams& p, const PhaseState& s);

/// Jacobian of the vector field at an arbitrary state. At an equilibrium
/// (x_e, y_e, 0, 0) this reduces to
///   [ 0 0 1/m_x 0; 0 0 0 1/m_y;
///     -wx^2-2y_e  -2x_e  0 0;  -2x_e  -wy^2+2*delta*y_e  0 0 ].
Eigen::Matrix4d linearize(const SystemParams& p, const PhaseState& s);

/// The four equilibria: the origin (center x center) plus three index-one
/// saddles, each with the eigenvalues of the linearization attached.
/// Order: origin, top, left, right.
std::vector<EquilibriumPoint> equilibria(const SystemParams& p);

/// Convenience lookup of a saddle equilibrium by id.
EquilibriumPoint saddle_equilibrium(const SystemParams& p, SaddleId id);

/// Energy of the (equal-energy) saddles; 1/6 for unit parameters.
double saddle_energy(const SystemParams& p);

/// Throws NotASaddle unless eq is saddle x center.
SaddleEigenbasis saddle_eigenbasis(const SystemParams& p, const EquilibriumPoint& eq);

/// Seed initial condition for the small periodic orbit around a saddle,
/// built from the center part of the linear solution with x-amplitude a_x:
/// state (x_e - a_x, y_e - a_x*k2, 0, 0), period guess 2*pi/omega.
std::pair<PhaseState, double> linear_po_guess(const SystemParams& p,
                                              const EquilibriumPoint& eq,
                                              double a_x);

} // namespace hhri
