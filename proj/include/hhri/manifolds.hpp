#pragma once
#include <array>
#include <vector>

#include "hhri/orbits.hpp"

namespace hhri {

/// Poincare section {y = y_c, p_y > 0} on the energy surface H = energy.
struct SectionConfig {
    double y_c = 0.0;
    double energy = 0.0;
};

enum class Stability { Stable, Unstable };
enum class Side { Plus, Minus };

/// Escape channel numbering shared with trajectory labels.
enum class Channel { Left = 1, Right = 2, Top = 3 };

Channel channel_of(SaddleId id);

/// One globalized half of a tube manifold: fibers integrated from seeds
/// displaced off the orbit along the transported (un)stable eigenvector.
/// Fibers run backward for stable branches, forward for unstable ones, and
/// stop at the escape gates.
struct ManifoldBranch {
    PeriodicOrbit orbit;
    Stability stability = Stability::Stable;
    Side side = Side::Plus;
    double t_span = 0.0;
    std::vector<double> seed_times;
    std::vector<PhaseState> seeds;
    std::vector<Trajectory> fibers;
};

/// Section crossing of one fiber; index counts crossings with the requested
/// p_y sign along the fiber's own time direction, starting at 1.
struct SectionCrossing {
    double x = 0.0;
    double p_x = 0.0;
    double p_y = 0.0;
    double t = 0.0;
    int index = 0;
};

/// Closed curve in (x, p_x) bounding one first-order escape region.
struct ReactiveIsland {
    Channel channel = Channel::Top;
    SectionConfig section;
    std::vector<std::array<double, 2>> curve;
    int order = 1;
};

ManifoldBranch globalize_manifold(const SystemParams& params, const MonodromyAnalysis& analysis,
                                  const PeriodicOrbit& orbit, Stability stability, Side side,
                                  int n_seeds = 400, double t_span = 20.0);

/// The branch side whose fibers head into the potential well; decided by a
/// trial fiber, falling back to the displacement geometry.
Side find_well_side(const SystemParams& params, const MonodromyAnalysis& analysis,
                    const PeriodicOrbit& orbit, Stability stability = Stability::Stable);

/// Crossings with {y = y_c, sign(p_y) = p_y_sign} per fiber. Throws
/// NoCrossing only if no fiber reaches the section at all.
std::vector<std::vector<SectionCrossing>> section_crossings(const SystemParams& params,
                                                            const ManifoldBranch& branch,
                                                            const SectionConfig& section,
                                                            int p_y_sign = +1);

/// First crossing along each backward-integrated stable fiber (the last
/// forward-time section visit before escape), ordered by seed position.
/// Throws IncompleteIsland if more than 1% of fibers never cross.
ReactiveIsland extract_reactive_island(const SystemParams& params, const ManifoldBranch& branch,
                                       const SectionConfig& section);

/// Winding-number point-in-polygon; points within 1e-9 of the curve count
/// as inside.
bool island_contains(const ReactiveIsland& island, double x, double p_x);

/// Shoelace area of the island polygon.
double island_area(const ReactiveIsland& island);

/// Closed curve p_x^2/(2 m_x) + V(x, y_c) = E (the p_y = 0 rim of the
/// section). Throws EmptySection if the section is empty or unbounded.
std::vector<std::array<double, 2>> energy_boundary_on_section(const SystemParams& params,
                                                              const SectionConfig& section,
                                                              int n_samples = 512);

/// Extent of the section: |x| <= xm, |p_x| <= pm.
struct SectionBounds {
    double x_max = 0.0;
    double p_x_max = 0.0;
};
SectionBounds section_bounds(const SystemParams& params, const SectionConfig& section);

/// Convenience pipeline: orbit at energy -> monodromy -> well-side stable
/// branch -> first-order island.
ReactiveIsland compute_island(const SystemParams& params, SaddleId saddle,
                              const SectionConfig& section, int n_seeds = 400,
                              double t_span = 20.0);

} // namespace hhri
