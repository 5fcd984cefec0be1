#include "graspkit/cloud_io.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace grasp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
    throw IoError(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& tok, const std::string& path, int line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail(path, line, "expected a number, got '" + tok + "'");
    }
}

std::string format_float(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(static_cast<float>(v)));
    return buf;
}

}  // namespace

PointCloud load_pcd(const std::string& path, const PcdLoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);

    std::vector<std::string> fields;
    long declared_points = -1;
    long width = -1, height = -1;
    bool data_ascii = false;
    bool have_viewpoint = false;
    Vec3 viewpoint = Vec3::Zero();

    std::string line;
    int lineno = 0;
    // header
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& key = toks[0];
        if (key == "VERSION") {
            continue;
        } else if (key == "FIELDS") {
            fields.assign(toks.begin() + 1, toks.end());
        } else if (key == "SIZE" || key == "TYPE" || key == "COUNT") {
            if (!fields.empty() && toks.size() - 1 != fields.size())
                fail(path, lineno, key + " entry count does not match FIELDS");
        } else if (key == "WIDTH") {
            width = std::lround(parse_double(toks.at(1), path, lineno));
        } else if (key == "HEIGHT") {
            height = std::lround(parse_double(toks.at(1), path, lineno));
        } else if (key == "VIEWPOINT") {
            if (toks.size() < 4) fail(path, lineno, "VIEWPOINT needs at least 3 values");
            viewpoint = Vec3(parse_double(toks[1], path, lineno),
                             parse_double(toks[2], path, lineno),
                             parse_double(toks[3], path, lineno));
            have_viewpoint = true;
        } else if (key == "POINTS") {
            declared_points = std::lround(parse_double(toks.at(1), path, lineno));
        } else if (key == "DATA") {
            if (toks.size() < 2 || toks[1] != "ascii")
                fail(path, lineno, "only DATA ascii is supported");
            data_ascii = true;
            break;
        } else {
            fail(path, lineno, "unknown header field '" + key + "'");
        }
    }
    if (!data_ascii) fail(path, lineno, "missing DATA ascii header");
    if (fields.empty()) fail(path, lineno, "missing FIELDS header");

    int ix = -1, iy = -1, iz = -1, iview = -1;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "x") ix = static_cast<int>(i);
        else if (fields[i] == "y") iy = static_cast<int>(i);
        else if (fields[i] == "z") iz = static_cast<int>(i);
        else if (fields[i] == "view") iview = static_cast<int>(i);
        else fail(path, lineno, "unsupported field '" + fields[i] + "'");
    }
    if (ix < 0 || iy < 0 || iz < 0) fail(path, lineno, "FIELDS must include x y z");

    if (declared_points < 0) {
        if (width >= 0 && height >= 0) declared_points = width * height;
        else fail(path, lineno, "missing POINTS header");
    }

    PointCloud out;
    out.points.reserve(static_cast<std::size_t>(declared_points));
    long rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto toks = tokenize(line);
        if (toks.size() != fields.size())
            fail(path, lineno, "expected " + std::to_string(fields.size()) + " columns, got " +
                                   std::to_string(toks.size()));
        if (rows >= declared_points)
            fail(path, lineno, "more data rows than the declared POINTS " +
                                   std::to_string(declared_points));
        const Vec3 p(parse_double(toks[static_cast<std::size_t>(ix)], path, lineno),
                     parse_double(toks[static_cast<std::size_t>(iy)], path, lineno),
                     parse_double(toks[static_cast<std::size_t>(iz)], path, lineno));
        if (!p.allFinite()) fail(path, lineno, "non-finite coordinate");
        int view = opts.default_view;
        if (iview >= 0)
            view = static_cast<int>(
                std::lround(parse_double(toks[static_cast<std::size_t>(iview)], path, lineno)));
        out.add_point(p, {view});
        ++rows;
    }
    if (rows != declared_points)
        fail(path, lineno,
             "header declares " + std::to_string(declared_points) + " points but file has " +
                 std::to_string(rows) + " data rows");

    for (const auto& v : out.views) {
        const int id = v.front();
        if (out.view_origins.count(id)) continue;
        const auto it = opts.view_origins.find(id);
        if (it != opts.view_origins.end()) out.view_origins[id] = it->second;
        else if (have_viewpoint) out.view_origins[id] = viewpoint;
        else out.view_origins[id] = Vec3::Zero();
    }
    return out;
}

void save_pcd(const PointCloud& c, const std::string& path, const PcdSaveOptions& opts) {
    bool multi_view = false;
    int only_view = c.empty() ? 0 : c.views.front().empty() ? 0 : c.views.front().front();
    for (const auto& v : c.views)
        if (v.empty() || v.front() != only_view || v.size() > 1) {
            multi_view = true;
            break;
        }
    const bool with_view = opts.with_view_field || multi_view;

    std::ostringstream out;
    out << "VERSION .7\n";
    if (with_view) {
        out << "FIELDS x y z view\nSIZE 4 4 4 4\nTYPE F F F I\nCOUNT 1 1 1 1\n";
    } else {
        out << "FIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n";
    }
    out << "WIDTH " << c.size() << "\nHEIGHT 1\n";
    Vec3 vp = Vec3::Zero();
    if (!c.view_origins.empty()) vp = c.view_origins.begin()->second;
    out << "VIEWPOINT " << format_float(vp.x()) << ' ' << format_float(vp.y()) << ' '
        << format_float(vp.z()) << " 1 0 0 0\n";
    out << "POINTS " << c.size() << "\nDATA ascii\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Vec3& p = c.points[i];
        out << format_float(p.x()) << ' ' << format_float(p.y()) << ' ' << format_float(p.z());
        if (with_view) out << ' ' << c.first_view(i);
        out << '\n';
    }
    atomic_write_file(path, out.str());
}

void save_cloud_jsonl(const PointCloud& c, const std::string& path) {
    std::ostringstream out;
    json header;
    header["type"] = "cloud";
    json origins = json::object();
    for (const auto& [vid, o] : c.view_origins)
        origins[std::to_string(vid)] = {o.x(), o.y(), o.z()};
    header["view_origins"] = origins;
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < c.size(); ++i) {
        json row;
        row["x"] = c.points[i].x();
        row["y"] = c.points[i].y();
        row["z"] = c.points[i].z();
        row["views"] = c.views[i];
        if (c.has_normals() && c.normal_valid[i]) {
            row["nx"] = c.normals[i].x();
            row["ny"] = c.normals[i].y();
            row["nz"] = c.normals[i].z();
        }
        out << row.dump() << '\n';
    }
    atomic_write_file(path, out.str());
}

PointCloud load_cloud_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    PointCloud c;
    std::string line;
    int lineno = 0;
    bool any_normal = false;
    std::vector<std::pair<std::size_t, Vec3>> pending_normals;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            fail(path, lineno, std::string("bad JSON: ") + e.what());
        }
        if (row.contains("type")) {
            if (row.value("type", "") != "cloud") fail(path, lineno, "unexpected header type");
            for (const auto& [key, val] : row.value("view_origins", json::object()).items())
                c.view_origins[std::stoi(key)] = Vec3(val.at(0), val.at(1), val.at(2));
            continue;
        }
        try {
            const Vec3 p(row.at("x").get<double>(), row.at("y").get<double>(),
                         row.at("z").get<double>());
            std::vector<int> views = row.value("views", std::vector<int>{0});
            c.add_point(p, std::move(views));
            if (row.contains("nx")) {
                any_normal = true;
                pending_normals.emplace_back(
                    c.size() - 1, Vec3(row.at("nx").get<double>(), row.at("ny").get<double>(),
                                       row.at("nz").get<double>()));
            }
        } catch (const json::exception& e) {
            fail(path, lineno, std::string("bad point row: ") + e.what());
        }
    }
    if (any_normal) {
        c.normals.assign(c.size(), Vec3::Zero());
        c.normal_valid.assign(c.size(), 0);
        for (const auto& [idx, n] : pending_normals) {
            c.normals[idx] = n;
            c.normal_valid[idx] = 1;
        }
    }
    for (const auto& v : c.views)
        for (const int id : v)
            if (!c.view_origins.count(id)) c.view_origins[id] = Vec3::Zero();
    return c;
}

}  // namespace grasp
