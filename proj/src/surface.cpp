#include "graspkit/surface.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace grasp {

namespace {

using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat10 = Eigen::Matrix<double, 10, 10>;

Vec10 monomials(const Vec3& p) {
    Vec10 l;
    l << p.x() * p.x(), p.y() * p.y(), p.z() * p.z(), p.x() * p.y(), p.x() * p.z(),
        p.y() * p.z(), p.x(), p.y(), p.z(), 1.0;
    return l;
}

Eigen::Matrix<double, 3, 10> gradient_jacobian(const Vec3& p) {
    Eigen::Matrix<double, 3, 10> j = Eigen::Matrix<double, 3, 10>::Zero();
    j(0, 0) = 2 * p.x(); j(0, 3) = p.y(); j(0, 4) = p.z(); j(0, 6) = 1.0;
    j(1, 1) = 2 * p.y(); j(1, 3) = p.x(); j(1, 5) = p.z(); j(1, 7) = 1.0;
    j(2, 2) = 2 * p.z(); j(2, 4) = p.x(); j(2, 5) = p.y(); j(2, 8) = 1.0;
    return j;
}

Eigen::Matrix4d quadric_matrix(const Vec10& c) {
    Eigen::Matrix4d q;
    q << c[0], c[3] / 2, c[4] / 2, c[6] / 2,
         c[3] / 2, c[1], c[5] / 2, c[7] / 2,
         c[4] / 2, c[5] / 2, c[2], c[8] / 2,
         c[6] / 2, c[7] / 2, c[8] / 2, c[9];
    return q;
}

Vec10 quadric_vector(const Eigen::Matrix4d& q) {
    Vec10 c;
    c << q(0, 0), q(1, 1), q(2, 2), 2 * q(0, 1), 2 * q(0, 2), 2 * q(1, 2), 2 * q(0, 3),
        2 * q(1, 3), 2 * q(2, 3), q(3, 3);
    return c;
}

// Moore-Penrose pseudo-inverse of a small symmetric PSD matrix.
Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd inv = es.eigenvalues();
    for (int i = 0; i < inv.size(); ++i) inv[i] = (inv[i] > tol) ? 1.0 / inv[i] : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double QuadricFit::evaluate(const Vec3& p) const { return c.dot(monomials(p)); }

Vec3 QuadricFit::gradient(const Vec3& p) const {
    return Vec3(2 * c[0] * p.x() + c[3] * p.y() + c[4] * p.z() + c[6],
                2 * c[1] * p.y() + c[3] * p.x() + c[5] * p.z() + c[7],
                2 * c[2] * p.z() + c[4] * p.x() + c[5] * p.y() + c[8]);
}

Mat3 QuadricFit::hessian() const {
    Mat3 h;
    h << 2 * c[0], c[3], c[4],
         c[3], 2 * c[1], c[5],
         c[4], c[5], 2 * c[2];
    return h;
}

Mat3 DarbouxFrame::basis() const {
    Mat3 f;
    f.col(0) = normal;
    f.col(1) = binormal;
    f.col(2) = axis;
    return f;
}

QuadricFit fit_quadric_taubin(std::span<const Vec3> nbhd) {
    if (nbhd.size() < 10)
        throw TooFewPoints("taubin fit needs at least 10 points, got " +
                           std::to_string(nbhd.size()));

    // Center and scale to control the conditioning of the 10x10 pencil.
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : nbhd) centroid += p;
    centroid /= static_cast<double>(nbhd.size());
    double scale = 0.0;
    for (const Vec3& p : nbhd) scale += (p - centroid).norm();
    scale /= static_cast<double>(nbhd.size());
    if (!(scale > 1e-12)) throw DegenerateNeighborhood("neighborhood has no spatial extent");

    Mat10 a = Mat10::Zero();
    Mat10 b = Mat10::Zero();
    for (const Vec3& p : nbhd) {
        const Vec3 u = (p - centroid) / scale;
        const Vec10 l = monomials(u);
        a.selfadjointView<Eigen::Lower>().rankUpdate(l);
        const auto j = gradient_jacobian(u);
        b.selfadjointView<Eigen::Lower>().rankUpdate(j.transpose());
    }
    a = a.selfadjointView<Eigen::Lower>();
    b = b.selfadjointView<Eigen::Lower>();

    // Reduce A c = lambda B c with the pseudo-inverse square root of B.
    // Pencil directions with eigenvalue below the threshold are kept out of
    // the constraint space; their coefficients are recovered afterward from
    // the unconstrained optimum (pinv leaves data-indistinguishable
    // directions at zero, which is what makes exactly planar patches yield
    // a plane rather than an arbitrary ruled quadric).
    Eigen::SelfAdjointEigenSolver<Mat10> esb(b);
    const double tol_b = 1e-12 * b.trace();
    std::vector<int> kept, dropped;
    for (int i = 0; i < 10; ++i)
        (esb.eigenvalues()[i] > tol_b ? kept : dropped).push_back(i);
    if (kept.empty()) throw DegenerateNeighborhood("gradient constraint matrix is singular");

    Eigen::MatrixXd w(10, kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i)
        w.col(static_cast<Eigen::Index>(i)) =
            esb.eigenvectors().col(kept[i]) / std::sqrt(esb.eigenvalues()[kept[i]]);
    Eigen::MatrixXd n(10, dropped.size());
    for (std::size_t i = 0; i < dropped.size(); ++i)
        n.col(static_cast<Eigen::Index>(i)) = esb.eigenvectors().col(dropped[i]);

    const Eigen::MatrixXd waw = w.transpose() * a * w;
    Eigen::MatrixXd reduced = waw;
    Eigen::MatrixXd nan_pinv;
    if (dropped.size() > 0) {
        const Eigen::MatrixXd nan_block = n.transpose() * a * n;
        const Eigen::MatrixXd naw = n.transpose() * a * w;
        nan_pinv = symmetric_pinv(nan_block);
        reduced -= naw.transpose() * nan_pinv * naw;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esr(reduced);
    const Eigen::VectorXd u = esr.eigenvectors().col(0); // smallest eigenvalue
    Vec10 c_local = w * u;
    if (dropped.size() > 0) {
        const Eigen::VectorXd v = -nan_pinv * (n.transpose() * a * (w * u));
        c_local += n * v;
    }

    // Map the quadric back to world coordinates and renormalize.
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.topLeftCorner<3, 3>() = Mat3::Identity() / scale;
    m.topRightCorner<3, 1>() = -centroid / scale;
    m(3, 3) = 1.0;
    const Eigen::Matrix4d q_world = m.transpose() * quadric_matrix(c_local) * m;
    QuadricFit fit;
    fit.c = quadric_vector(q_world);
    const double norm = fit.c.norm();
    if (!(norm > 1e-300)) throw DegenerateNeighborhood("fit collapsed to the zero quadric");
    fit.c /= norm;
    // deterministic sign: largest-magnitude coefficient positive
    int imax = 0;
    fit.c.cwiseAbs().maxCoeff(&imax);
    if (fit.c[imax] < 0) fit.c = -fit.c;
    return fit;
}

DarbouxFrame darboux_from_quadric(const QuadricFit& q, const Vec3& p, const Vec3& view_origin) {
    Vec3 g = q.gradient(p);
    const double gnorm = g.norm();
    if (!(gnorm > 1e-12)) throw VanishingGradient("quadric gradient vanishes at the query point");
    Mat3 h = q.hessian();
    // orient toward the camera; flip the implicit function with the normal so
    // curvature signs stay consistent (convex toward the camera is positive)
    if (g.dot(view_origin - p) < 0.0) {
        g = -g;
        h = -h;
    }
    const Vec3 normal = g / gnorm;

    // tangent basis
    int least = 0;
    normal.cwiseAbs().minCoeff(&least);
    const Vec3 t1 = normal.cross(Vec3::Unit(least)).normalized();
    const Vec3 t2 = normal.cross(t1);

    Eigen::Matrix2d shape;
    shape(0, 0) = t1.dot(h * t1) / gnorm;
    shape(0, 1) = t1.dot(h * t2) / gnorm;
    shape(1, 0) = shape(0, 1);
    shape(1, 1) = t2.dot(h * t2) / gnorm;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shape);
    const double ka = es.eigenvalues()[0];
    const double kb = es.eigenvalues()[1];
    const Vec3 da = (es.eigenvectors()(0, 0) * t1 + es.eigenvectors()(1, 0) * t2).normalized();
    const Vec3 db = (es.eigenvectors()(0, 1) * t1 + es.eigenvectors()(1, 1) * t2).normalized();

    DarbouxFrame f;
    f.origin = p;
    f.normal = normal;
    const double abs_max = std::max(std::abs(ka), std::abs(kb));
    const bool umbilic = abs_max < 1e-9 || std::abs(std::abs(ka) - std::abs(kb)) <= 0.01 * abs_max;
    if (umbilic) {
        // tie-break: axis is the tangent direction closest to world x, then y
        Vec3 cand = Vec3::UnitX() - normal * normal.x();
        if (cand.norm() < 1e-6) cand = Vec3::UnitY() - normal * normal.y();
        f.axis = cand.normalized();
        f.k1 = ka;
        f.k2 = kb;
    } else if (std::abs(ka) <= std::abs(kb)) {
        f.axis = da;
        f.k1 = ka;
        f.k2 = kb;
    } else {
        f.axis = db;
        f.k1 = kb;
        f.k2 = ka;
    }
    // deterministic axis sign: largest-|component| coordinate positive
    int imax = 0;
    f.axis.cwiseAbs().maxCoeff(&imax);
    if (f.axis[imax] < 0) f.axis = -f.axis;
    f.binormal = f.axis.cross(f.normal);
    return f;
}

PointCloud estimate_normals(const PointCloud& c, const NormalEstimationConfig& cfg) {
    if (!(cfg.radius > 0.0)) throw InvalidArgument("estimate_normals: radius must be > 0");
    PointCloud out = c;
    out.normals.assign(c.size(), Vec3::Zero());
    out.normal_valid.assign(c.size(), 0);
    if (c.empty()) return out;
    const NeighborIndex index(c);

#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(c.size()); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const auto nbrs = index.radius_neighbors(c.points[idx], cfg.radius);
        if (nbrs.size() < static_cast<std::size_t>(cfg.min_neighbors)) continue;
        std::vector<Vec3> nbhd;
        nbhd.reserve(nbrs.size());
        for (const int j : nbrs) nbhd.push_back(c.points[static_cast<std::size_t>(j)]);
        try {
            const QuadricFit fit = fit_quadric_taubin(nbhd);
            const DarbouxFrame frame =
                darboux_from_quadric(fit, c.points[idx], c.view_origin_of(idx));
            out.normals[idx] = frame.normal;
            out.normal_valid[idx] = 1;
        } catch (const InvalidArgument&) {
            // degenerate neighborhood: leave the normal invalid
        }
    }
    return out;
}

}  // namespace grasp
