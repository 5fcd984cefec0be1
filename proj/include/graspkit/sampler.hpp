#pragma once

#include "graspkit/cloud.hpp"
#include "graspkit/hand.hpp"
#include "graspkit/surface.hpp"

#include <cstdint>

namespace grasp {

struct SamplerConfig {
    int n_samples = 4000;     // points drawn from the cloud (with replacement)
    int n_orientations = 8;   // |Phi|: rotations about the curvature axis
    int n_positions = 20;     // |X|: offsets along the closing direction
    double ball_radius = 0.03; // neighborhood for the quadric fit
    std::uint64_t seed = 0;

    void validate() const;
};

/// Coarse grid search around one Darboux frame: for every (phi, x) cell the
/// hand is pushed along the approach axis to the deepest collision-free
/// offset y* (computed analytically from per-point forbidden intervals); the
/// cell emits a hypothesis iff y* exists and the closing slab contains at
/// least one point of `nbhd`.
///
/// `nbhd` must cover every point that could collide with any candidate
/// placement (sample_hands passes a superset; see there).
std::vector<HandHypothesis> grid_search(const DarbouxFrame& frame, std::span<const Vec3> nbhd,
                                        const HandParams& params, const SamplerConfig& cfg);

/// Samples hand hypotheses from a preprocessed cloud: draws points uniformly
/// (seeded, with replacement), estimates the local Darboux frame by Taubin
/// fitting over the ball neighborhood, and grid-searches hand placements
/// around it. Every returned hand is collision-free against the whole cloud
/// and has a non-empty closing slab; its closing-plane normal equals the
/// frame's curvature axis by construction.
std::vector<HandHypothesis> sample_hands(const PointCloud& c, const HandParams& params,
                                         const SamplerConfig& cfg);

}  // namespace grasp
