#pragma once

#include "graspkit/cloud.hpp"

#include <span>

namespace grasp {

/// Implicit quadric f(x) = c · [x², y², z², xy, xz, yz, x, y, z, 1] with
/// ||c|| = 1, expressed in world coordinates.
struct QuadricFit {
    Eigen::Matrix<double, 10, 1> c = Eigen::Matrix<double, 10, 1>::Zero();

    double evaluate(const Vec3& p) const;
    Vec3 gradient(const Vec3& p) const;
    Mat3 hessian() const;
};

/// Orthonormal surface frame at a point: normal, minimum-|curvature| axis and
/// their binormal, plus the two principal curvatures (|k1| <= |k2|).
struct DarbouxFrame {
    Vec3 origin = Vec3::Zero();
    Vec3 normal = Vec3::UnitZ();   // camera-oriented
    Vec3 axis = Vec3::UnitX();     // minimum principal curvature direction
    Vec3 binormal = Vec3::UnitY(); // axis x normal
    double k1 = 0.0;
    double k2 = 0.0;

    /// Columns (normal, axis x normal, axis); always det +1.
    Mat3 basis() const;
};

class TooFewPoints : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};
class DegenerateNeighborhood : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};
class VanishingGradient : public InvalidArgument {
  public:
    using InvalidArgument::InvalidArgument;
};

/// Fits an implicit quadric to the neighborhood by Taubin's method: the
/// smallest-eigenvalue solution of A c = lambda B c with A the monomial outer
/// products and B the gradient Gram matrix. Points are centered and scaled
/// before assembly; the result is mapped back to world coordinates.
/// Needs at least 10 points.
QuadricFit fit_quadric_taubin(std::span<const Vec3> nbhd);

/// Extracts the Darboux frame at p from a fitted quadric. The normal sign is
/// chosen so it points toward `view_origin`.
DarbouxFrame darboux_from_quadric(const QuadricFit& q, const Vec3& p, const Vec3& view_origin);

struct NormalEstimationConfig {
    double radius = 0.03;
    int min_neighbors = 10;
};

/// Estimates camera-oriented normals for every point with a large enough
/// neighborhood; other points keep an invalid-normal flag. Per-point fit
/// failures are recorded, not fatal.
PointCloud estimate_normals(const PointCloud& c, const NormalEstimationConfig& cfg = {});

}  // namespace grasp
