#pragma once

#include "graspkit/cloud.hpp"

#include <map>
#include <string>

namespace grasp {

struct PcdLoadOptions {
    /// View id assigned to every point when the file has no `view` field.
    int default_view = 0;
    /// Origins for view ids; ids not listed fall back to the file's VIEWPOINT
    /// translation (when present) and then to the origin.
    std::map<int, Vec3> view_origins;
};

/// Reads the ASCII PCD subset (FIELDS x y z [view], DATA ascii).
/// Parse failures throw IoError with the 1-based line number.
PointCloud load_pcd(const std::string& path, const PcdLoadOptions& opts = {});

struct PcdSaveOptions {
    /// Force the per-point `view` field. By default it is written only when
    /// the cloud carries more than one distinct view id.
    bool with_view_field = false;
};

/// Writes the ASCII PCD subset. Multi-view provenance of merged points is
/// reduced to the first view id; use JSON Lines for lossless interchange.
void save_pcd(const PointCloud& c, const std::string& path, const PcdSaveOptions& opts = {});

/// JSON Lines interchange: a header line {"type":"cloud","view_origins":...}
/// followed by one {"x","y","z","views":[...]} object per point, with
/// "nx","ny","nz" present on points that carry a valid normal.
void save_cloud_jsonl(const PointCloud& c, const std::string& path);
PointCloud load_cloud_jsonl(const std::string& path);

}  // namespace grasp
