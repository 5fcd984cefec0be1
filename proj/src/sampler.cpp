#include "graspkit/sampler.hpp"

#include "graspkit/rng.hpp"

#include <algorithm>
#include <cmath>

namespace grasp {

namespace {

constexpr double kPushBackoff = 1e-9; // pulled back from exact face contact

struct Interval {
    double lo, hi;
};

// Largest y in [-range, range] avoiding all closed forbidden intervals.
// Returns false when the whole range is covered.
bool max_free_offset(std::vector<Interval>& forbidden, double range, double* out) {
    double y = range;
    if (forbidden.empty()) {
        *out = y;
        return true;
    }
    std::sort(forbidden.begin(), forbidden.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    // merge, bridging gaps smaller than the backoff
    std::vector<Interval> merged;
    merged.reserve(forbidden.size());
    for (const Interval& iv : forbidden) {
        if (!merged.empty() && iv.lo <= merged.back().hi + 2 * kPushBackoff)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
        if (y > it->hi) break;       // free: every remaining interval lies below y
        if (y >= it->lo - kPushBackoff) y = it->lo - kPushBackoff;
    }
    if (y < -range) return false;
    *out = y;
    return true;
}

}  // namespace

void SamplerConfig::validate() const {
    if (n_samples < 1 || n_orientations < 1 || n_positions < 1)
        throw InvalidArgument("sampler counts must be >= 1");
    if (!(ball_radius > 0.0)) throw InvalidArgument("ball_radius must be > 0");
}

std::vector<HandHypothesis> grid_search(const DarbouxFrame& frame, std::span<const Vec3> nbhd,
                                        const HandParams& params, const SamplerConfig& cfg) {
    cfg.validate();
    params.validate();
    const double range = params.open_aperture; // extent of X and Y
    const auto body = hand_body_boxes(params);
    const LocalBox region = closing_region_box(params);
    const double half_thick = params.finger_thickness / 2;

    std::vector<HandHypothesis> out;
    std::vector<Eigen::Vector3d> local; // points in the candidate hand basis (x = 0, y = 0)
    std::vector<Interval> forbidden;

    for (int iphi = 0; iphi < cfg.n_orientations; ++iphi) {
        const double phi =
            -M_PI / 2 + M_PI * static_cast<double>(iphi) / static_cast<double>(cfg.n_orientations);
        const Mat3 spin = axis_angle_rotation(frame.axis, phi);
        Mat3 rot;
        rot.col(0) = -(spin * frame.normal);   // approach, into the object
        rot.col(1) = -(spin * frame.binormal); // closing
        rot.col(2) = frame.axis;               // closing-plane normal

        // The axis coordinate is invariant over (x, y); pre-filter the slab.
        local.clear();
        for (const Vec3& q : nbhd) {
            const Vec3 w = rot.transpose() * (q - frame.origin);
            if (std::abs(w.z()) <= half_thick) local.push_back(w);
        }
        if (local.empty()) continue;

        for (int ix = 0; ix < cfg.n_positions; ++ix) {
            const double x = (cfg.n_positions == 1)
                                 ? 0.0
                                 : -range + 2 * range * static_cast<double>(ix) /
                                                static_cast<double>(cfg.n_positions - 1);
            forbidden.clear();
            for (const Vec3& w : local) {
                const double v = w.y() - x;
                for (const LocalBox& b : body) {
                    if (v < b.lo.y() || v > b.hi.y()) continue;
                    if (w.z() < b.lo.z() || w.z() > b.hi.z()) continue;
                    forbidden.push_back({w.x() - b.hi.x(), w.x() - b.lo.x()});
                }
            }
            double push = 0.0;
            if (!max_free_offset(forbidden, range, &push)) continue;

            // Constraint 2: the closing slab must contain a point.
            bool slab_hit = false;
            for (const Vec3& w : local) {
                const Vec3 q(w.x() - push, w.y() - x, w.z());
                if (region.contains(q) && std::abs(q.z()) <= params.slab / 2) {
                    slab_hit = true;
                    break;
                }
            }
            if (!slab_hit) continue;

            HandHypothesis h;
            h.pose.rotation = rot;
            h.pose.position = frame.origin + x * rot.col(1) + push * rot.col(0);
            h.params = params;
            h.cell_orientation = iphi;
            h.cell_position = ix;
            h.pushed_offset = push;
            out.push_back(h);
        }
    }
    return out;
}

std::vector<HandHypothesis> sample_hands(const PointCloud& c, const HandParams& params,
                                         const SamplerConfig& cfg) {
    cfg.validate();
    params.validate();
    if (c.empty()) throw InvalidArgument("sample_hands: empty cloud");

    const NeighborIndex index(c);
    Rng rng(cfg.seed);
    std::vector<std::size_t> picks(static_cast<std::size_t>(cfg.n_samples));
    for (auto& pick : picks) pick = static_cast<std::size_t>(rng.below(c.size()));

    // The per-sample candidate set must cover every reachable hand placement,
    // not just the open-aperture ball: offsets reach open_aperture along both
    // the closing and approach axes.
    const double reach = 2 * params.open_aperture + hand_bounding_radius(params);
    const double reach2 = reach * reach;
    const double half_thick = params.finger_thickness / 2;

    std::vector<std::vector<HandHypothesis>> slots(picks.size());

#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(picks.size()); ++s) {
        const std::size_t pi = picks[static_cast<std::size_t>(s)];
        const Vec3 p = c.points[pi];

        const auto fit_nbrs = index.radius_neighbors(p, cfg.ball_radius);
        if (fit_nbrs.size() < 10) continue;
        std::vector<Vec3> fit_pts;
        fit_pts.reserve(fit_nbrs.size());
        for (const int j : fit_nbrs) fit_pts.push_back(c.points[static_cast<std::size_t>(j)]);

        DarbouxFrame frame;
        try {
            const QuadricFit fit = fit_quadric_taubin(fit_pts);
            frame = darboux_from_quadric(fit, p, c.view_origin_of(pi));
        } catch (const InvalidArgument&) {
            continue;
        }

        // candidate points: inside the axis slab and within reach
        std::vector<Vec3> candidates;
        for (const Vec3& q : c.points) {
            const Vec3 d = q - p;
            if (std::abs(d.dot(frame.axis)) > half_thick) continue;
            if (d.squaredNorm() > reach2) continue;
            candidates.push_back(q);
        }

        auto hands = grid_search(frame, candidates, params, cfg);
        for (auto& h : hands) h.source_point = static_cast<int>(pi);
        slots[static_cast<std::size_t>(s)] = std::move(hands);
    }

    std::vector<HandHypothesis> out;
    for (auto& slot : slots)
        out.insert(out.end(), std::make_move_iterator(slot.begin()),
                   std::make_move_iterator(slot.end()));
    return out;
}

}  // namespace grasp
