#include "graspkit/common.hpp"
#include "graspkit/rng.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace grasp {

Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 nearest_rotation(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    Mat3 v = svd.matrixV();
    Mat3 r = u * v.transpose();
    if (r.determinant() < 0.0) {
        u.col(2) *= -1.0;
        r = u * v.transpose();
    }
    return r;
}

double angle_between(const Vec3& a, const Vec3& b) {
    const double denom = a.norm() * b.norm();
    if (denom <= 0.0) throw InvalidArgument("angle_between: zero-length vector");
    const double c = std::clamp(a.dot(b) / denom, -1.0, 1.0);
    return std::acos(c);
}

void atomic_write_file(const std::string& path, const std::string& data) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("rename failed for " + target.string() + ": " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stage_seed(std::uint64_t root_seed, std::string_view stage) {
    // FNV-1a over the stage name, mixed with the root seed
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(root_seed ^ h);
}

}  // namespace grasp
