#pragma once

#include "graspkit/common.hpp"

#include <map>
#include <optional>
#include <vector>

namespace grasp {

/// Point cloud with per-point view provenance and optional oriented normals.
/// Positions are meters. Immutable by convention once handed to an index or a
/// parallel stage; all pipeline operations return new clouds.
class PointCloud {
  public:
    std::vector<Vec3> points;
    /// Per-point set of view ids (sorted, unique). Voxel merging unions sets.
    std::vector<std::vector<int>> views;
    /// Unit normals, camera-oriented. Empty when not estimated.
    std::vector<Vec3> normals;
    /// 1 where the normal is valid. Points with too-small neighborhoods keep 0.
    std::vector<std::uint8_t> normal_valid;
    /// view id -> camera position (meters). Covers every id used in `views`.
    std::map<int, Vec3> view_origins;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_normals() const { return !normals.empty(); }

    void add_point(const Vec3& p, std::vector<int> view_ids);

    /// First (smallest) view id of a point; used for camera-orienting normals.
    int first_view(std::size_t i) const;
    Vec3 view_origin_of(std::size_t i) const;

    /// Checks the type invariants (finite coordinates, unit normals, known
    /// view ids). Throws InvalidArgument with a description on violation.
    void validate() const;
};

/// Concatenates two registered clouds. View-id sets must be disjoint.
PointCloud merge_registered(const PointCloud& a, const PointCloud& b);

/// Voxel-grid downsampling: one point per occupied voxel, placed at the
/// centroid of the voxel's points. View sets are unioned; normals dropped.
/// The grid is anchored at `anchor` so results are deterministic for a fixed
/// workspace (pass the workspace minimum corner; defaults to the origin).
PointCloud voxelize(const PointCloud& c, double leaf, const Vec3& anchor = Vec3::Zero());

struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

/// Keeps exactly the points inside the closed box.
PointCloud crop_workspace(const PointCloud& c, const Aabb& box);

/// Exact radius search over an immutable snapshot of a cloud's positions.
class NeighborIndex {
  public:
    explicit NeighborIndex(const PointCloud& cloud);

    /// Indices of all points with ||p - q|| <= r (closed ball), ascending.
    std::vector<int> radius_neighbors(const Vec3& p, double r) const;

    std::size_t size() const { return pts_.size(); }
    const Vec3& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }

  private:
    struct Node {
        int left = -1;
        int right = -1;
        int begin = 0;
        int end = 0;   // leaf range in order_
        int axis = -1; // -1 for leaves
        double split = 0.0;
        Vec3 bb_min, bb_max;
    };

    int build(int begin, int end);
    void query(int node, const Vec3& p, double r2, std::vector<int>& out) const;

    std::vector<Vec3> pts_; // snapshot
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace grasp
