#pragma once

#include "graspkit/common.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace grasp {

/// Parallel-jaw hand dimensions (meters).
struct HandParams {
    double finger_length = 0.06;
    double finger_width = 0.01;
    double open_aperture = 0.07;   // gap between the finger inner faces, fully open
    double closed_aperture = 0.03; // gap when fully closed (aperture lower bound)
    double finger_thickness = 0.01;
    double slab = 0.01; // closing-plane slab thickness; defaults to finger_thickness

    void validate() const;
};

/// Reads hand parameters from a JSON object or a key=value file.
HandParams load_hand_params(const std::string& path);
void save_hand_params(const HandParams& p, const std::string& path);

/// Axis-aligned box in hand-local coordinates.
struct LocalBox {
    Vec3 lo, hi;
    bool contains(const Vec3& q) const {
        return (q.array() >= lo.array()).all() && (q.array() <= hi.array()).all();
    }
};

// Hand-local frame: axis 0 = approach (into the object), axis 1 = finger
// closing direction, axis 2 = closing-plane normal. Origin at the centroid of
// the closing region.

/// Region swept by the fingers when they close (box between the inner faces).
LocalBox closing_region_box(const HandParams& p);

/// Hand body volume: two finger prisms plus the back plate behind them.
std::array<LocalBox, 3> hand_body_boxes(const HandParams& p);

/// Radius of a ball (around the hand origin) covering body and closing region.
double hand_bounding_radius(const HandParams& p);

/// 6-DOF hand pose. Rotation columns: approach, closing, plane normal.
struct HandPose {
    Mat3 rotation = Mat3::Identity();
    Vec3 position = Vec3::Zero(); // closing-region reference point r(h)

    Vec3 approach() const { return rotation.col(0); }
    Vec3 closing() const { return rotation.col(1); }
    Vec3 axis() const { return rotation.col(2); }
    Vec3 to_hand(const Vec3& q) const { return rotation.transpose() * (q - position); }
    Vec3 to_world(const Vec3& q) const { return rotation * q + position; }

    void validate() const;
};

/// One sampled hand configuration: the unit of labeling and classification.
struct HandHypothesis {
    HandPose pose;
    HandParams params;
    int source_point = -1;           // index of the generating sample point
    int cell_orientation = 0;        // phi index in the search grid
    int cell_position = 0;           // x index in the search grid
    double pushed_offset = 0.0;      // y*: approach offset after the collision push
};

/// True iff q lies in the closing region R(h).
bool closing_region_contains(const HandHypothesis& h, const Vec3& q);

/// True iff any point lies inside the hand body B(h).
bool body_collides(const HandHypothesis& h, std::span<const Vec3> pts);

/// Indices of points inside R(h) within `slab` of the closing plane
/// (|(q - r)·axis| <= slab/2).
std::vector<int> closing_plane_points(const HandHypothesis& h, std::span<const Vec3> pts,
                                      double slab);

/// Hypothesis list serialization (JSON Lines, one hypothesis per line).
void save_hypotheses_jsonl(const std::vector<HandHypothesis>& hands, const std::string& path);
std::vector<HandHypothesis> load_hypotheses_jsonl(const std::string& path);

std::string hypothesis_to_json_line(const HandHypothesis& h);
HandHypothesis hypothesis_from_json_line(const std::string& line);

}  // namespace grasp
