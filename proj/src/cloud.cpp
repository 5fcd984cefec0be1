#include "graspkit/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace grasp {

void PointCloud::add_point(const Vec3& p, std::vector<int> view_ids) {
    std::sort(view_ids.begin(), view_ids.end());
    view_ids.erase(std::unique(view_ids.begin(), view_ids.end()), view_ids.end());
    points.push_back(p);
    views.push_back(std::move(view_ids));
    if (!normals.empty()) {
        normals.emplace_back(Vec3::Zero());
        normal_valid.push_back(0);
    }
}

int PointCloud::first_view(std::size_t i) const {
    const auto& v = views.at(i);
    if (v.empty()) throw InvalidArgument("point has no view provenance");
    return v.front();
}

Vec3 PointCloud::view_origin_of(std::size_t i) const {
    const auto it = view_origins.find(first_view(i));
    if (it == view_origins.end()) throw InvalidArgument("view id without origin");
    return it->second;
}

void PointCloud::validate() const {
    if (views.size() != points.size()) throw InvalidArgument("views/points size mismatch");
    if (has_normals() &&
        (normals.size() != points.size() || normal_valid.size() != points.size()))
        throw InvalidArgument("normals/points size mismatch");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].allFinite()) throw InvalidArgument("non-finite coordinate");
        for (const int v : views[i])
            if (view_origins.find(v) == view_origins.end())
                throw InvalidArgument("view id " + std::to_string(v) + " has no origin");
        if (has_normals() && normal_valid[i]) {
            if (std::abs(normals[i].norm() - 1.0) > 1e-6)
                throw InvalidArgument("normal not unit length");
        }
    }
}

PointCloud merge_registered(const PointCloud& a, const PointCloud& b) {
    for (const auto& [vid, origin] : a.view_origins) {
        (void)origin;
        if (b.view_origins.count(vid))
            throw InvalidArgument("merge_registered: overlapping view id " + std::to_string(vid));
    }
    PointCloud out = a;
    out.points.insert(out.points.end(), b.points.begin(), b.points.end());
    out.views.insert(out.views.end(), b.views.begin(), b.views.end());
    out.view_origins.insert(b.view_origins.begin(), b.view_origins.end());
    const bool keep_normals = a.has_normals() && b.has_normals();
    if (keep_normals) {
        out.normals.insert(out.normals.end(), b.normals.begin(), b.normals.end());
        out.normal_valid.insert(out.normal_valid.end(), b.normal_valid.begin(),
                                b.normal_valid.end());
    } else {
        out.normals.clear();
        out.normal_valid.clear();
    }
    return out;
}

namespace {

struct VoxelKey {
    std::int64_t x, y, z;
    bool operator==(const VoxelKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (const std::int64_t v : {k.x, k.y, k.z}) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

PointCloud voxelize(const PointCloud& c, double leaf, const Vec3& anchor) {
    if (!(leaf > 0.0)) throw InvalidArgument("voxelize: leaf must be > 0");
    struct Acc {
        Vec3 sum = Vec3::Zero();
        int count = 0;
        std::vector<int> views;
        int first = 0; // first contributing input index, for deterministic output order
    };
    std::unordered_map<VoxelKey, Acc, VoxelKeyHash> grid;
    grid.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Vec3 q = (c.points[i] - anchor) / leaf;
        const VoxelKey key{static_cast<std::int64_t>(std::floor(q.x())),
                           static_cast<std::int64_t>(std::floor(q.y())),
                           static_cast<std::int64_t>(std::floor(q.z()))};
        auto [it, inserted] = grid.try_emplace(key);
        Acc& acc = it->second;
        if (inserted) acc.first = static_cast<int>(i);
        acc.sum += c.points[i];
        acc.count += 1;
        acc.views.insert(acc.views.end(), c.views[i].begin(), c.views[i].end());
    }
    std::vector<const Acc*> cells;
    cells.reserve(grid.size());
    for (const auto& [key, acc] : grid) {
        (void)key;
        cells.push_back(&acc);
    }
    std::sort(cells.begin(), cells.end(),
              [](const Acc* a, const Acc* b) { return a->first < b->first; });
    PointCloud out;
    out.view_origins = c.view_origins;
    out.points.reserve(cells.size());
    for (const Acc* acc : cells)
        out.add_point(acc->sum / acc->count, acc->views);
    return out;
}

PointCloud crop_workspace(const PointCloud& c, const Aabb& box) {
    if (!(box.min.array() <= box.max.array()).all())
        throw InvalidArgument("crop_workspace: inverted box");
    PointCloud out;
    out.view_origins = c.view_origins;
    const bool with_normals = c.has_normals();
    if (with_normals) {
        out.normals.reserve(c.size());
        out.normal_valid.reserve(c.size());
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!box.contains(c.points[i])) continue;
        out.points.push_back(c.points[i]);
        out.views.push_back(c.views[i]);
        if (with_normals) {
            out.normals.push_back(c.normals[i]);
            out.normal_valid.push_back(c.normal_valid[i]);
        }
    }
    return out;
}

NeighborIndex::NeighborIndex(const PointCloud& cloud) : pts_(cloud.points) {
    order_.resize(pts_.size());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(pts_.size() / 8 + 8);
    if (!pts_.empty()) root_ = build(0, static_cast<int>(pts_.size()));
}

int NeighborIndex::build(int begin, int end) {
    Node node;
    node.bb_min = Vec3::Constant(std::numeric_limits<double>::infinity());
    node.bb_max = Vec3::Constant(-std::numeric_limits<double>::infinity());
    for (int i = begin; i < end; ++i) {
        const Vec3& p = pts_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])];
        node.bb_min = node.bb_min.cwiseMin(p);
        node.bb_max = node.bb_max.cwiseMax(p);
    }
    constexpr int kLeafSize = 16;
    if (end - begin <= kLeafSize) {
        node.begin = begin;
        node.end = end;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }
    int axis = 0;
    (node.bb_max - node.bb_min).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         return pts_[static_cast<std::size_t>(a)][axis] <
                                pts_[static_cast<std::size_t>(b)][axis];
                     });
    node.axis = axis;
    node.split = pts_[static_cast<std::size_t>(order_[static_cast<std::size_t>(mid)])][axis];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

void NeighborIndex::query(int ni, const Vec3& p, double r2, std::vector<int>& out) const {
    const Node& node = nodes_[static_cast<std::size_t>(ni)];
    double d2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double lo = node.bb_min[a] - p[a];
        const double hi = p[a] - node.bb_max[a];
        const double d = std::max({lo, hi, 0.0});
        d2 += d * d;
    }
    if (d2 > r2) return;
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = order_[static_cast<std::size_t>(i)];
            if ((pts_[static_cast<std::size_t>(idx)] - p).squaredNorm() <= r2)
                out.push_back(idx);
        }
        return;
    }
    query(node.left, p, r2, out);
    query(node.right, p, r2, out);
}

std::vector<int> NeighborIndex::radius_neighbors(const Vec3& p, double r) const {
    if (!(r > 0.0)) throw InvalidArgument("radius_neighbors: r must be > 0");
    std::vector<int> out;
    if (root_ >= 0) query(root_, p, r * r, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace grasp
