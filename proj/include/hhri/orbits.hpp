#pragma once
#include <complex>

#include "hhri/integrator.hpp"

namespace hhri {

/// A corrected Lyapunov orbit. The initial state has p_x = p_y = 0, so the
/// orbit retraces itself after the half-period p_x = 0 crossing.
struct PeriodicOrbit {
    PhaseState initial_state;
    double period = 0.0;
    double energy = 0.0;
    SaddleId saddle_id = SaddleId::Top;
};

/// Monodromy matrix M = Phi(T) and its eigen-structure, eigenvalues sorted
/// by |lambda| descending: lambda_1 > 1, lambda_2 = 1/lambda_1, and a pair
/// at 1.
struct MonodromyAnalysis {
    Eigen::Matrix4d matrix;
    std::array<std::complex<double>, 4> eigenvalues{};
    Eigen::Vector4d unstable_eigvec;
    Eigen::Vector4d stable_eigvec;
};

struct ContinuationFamily {
    std::vector<PeriodicOrbit> orbits;  ///< energies strictly increasing
};

struct CorrectionSettings {
    /// Convergence threshold on |p_y| at the half-period crossing. The
    /// closure requirement ||phi(T;X0) - X0|| < 1e-6 amplifies this by the
    /// half-period state-transition norm, so the default sits well below
    /// the 1e-6 contract.
    double p_y_tol = 1e-9;
    int max_iter = 25;
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double t_search = 10.0;  ///< bound on the half-period event search
};

/// Newton correction of guess = (x0, y0, 0, 0): holds x0, adjusts y0 from
/// the state-transition matrix at the p_x = 0 half-period crossing until
/// |p_y| < p_y_tol. Period is twice the crossing time.
PeriodicOrbit differential_correction(const SystemParams& params, const PhaseState& guess,
                                      SaddleId saddle_id,
                                      const CorrectionSettings& settings = {});

/// Extends the family by linear extrapolation of consecutive initial states
/// (step capped at max_step_norm, halved on correction failure) until two
/// consecutive orbits bracket target_energy.
ContinuationFamily continue_family(const SystemParams& params, const PeriodicOrbit& orbit1,
                                   const PeriodicOrbit& orbit2, double target_energy,
                                   const CorrectionSettings& settings = {},
                                   double max_step_norm = 0.05);

/// Full pipeline: linear seed, correction, continuation, then bisection in
/// the bracketing pair until |H - E| < 1e-10.
PeriodicOrbit orbit_at_energy(const SystemParams& params, SaddleId saddle_id, double energy,
                              const CorrectionSettings& settings = {});

/// Variational integration over one full period at tightened tolerances.
MonodromyAnalysis monodromy(const SystemParams& params, const PeriodicOrbit& orbit,
                            double rel_tol = 1e-13, double abs_tol = 1e-13);

} // namespace hhri
