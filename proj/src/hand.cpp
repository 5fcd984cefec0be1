#include "graspkit/hand.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace grasp {

using nlohmann::json;

void HandParams::validate() const {
    const double vals[] = {finger_length, finger_width, open_aperture,
                           closed_aperture, finger_thickness, slab};
    for (const double v : vals)
        if (!(v > 0.0)) throw InvalidArgument("hand parameters must be strictly positive");
    if (!(closed_aperture < open_aperture))
        throw InvalidArgument("closed_aperture must be smaller than open_aperture");
}

namespace {

void assign_param(HandParams& p, const std::string& key, double value, bool& slab_set) {
    if (key == "finger_length") p.finger_length = value;
    else if (key == "finger_width") p.finger_width = value;
    else if (key == "open_aperture") p.open_aperture = value;
    else if (key == "closed_aperture") p.closed_aperture = value;
    else if (key == "finger_thickness") p.finger_thickness = value;
    else if (key == "slab") { p.slab = value; slab_set = true; }
    else throw IoError("unknown hand parameter '" + key + "'");
}

}  // namespace

HandParams load_hand_params(const std::string& path) {
    const std::string text = read_file(path);
    HandParams p;
    bool slab_set = false;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::exception& e) {
            throw IoError(path + ": bad JSON: " + e.what());
        }
        for (const auto& [key, val] : doc.items())
            assign_param(p, key, val.get<double>(), slab_set);
    } else {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw IoError(path + ":" + std::to_string(lineno) + ": expected key=value");
            std::string key = line.substr(0, eq);
            std::string val = line.substr(eq + 1);
            const auto trim = [](std::string& s) {
                const auto b = s.find_first_not_of(" \t\r\n");
                const auto e = s.find_last_not_of(" \t\r\n");
                s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
            };
            trim(key);
            trim(val);
            try {
                assign_param(p, key, std::stod(val), slab_set);
            } catch (const std::invalid_argument&) {
                throw IoError(path + ":" + std::to_string(lineno) + ": bad number '" + val + "'");
            }
        }
    }
    if (!slab_set) p.slab = p.finger_thickness;
    p.validate();
    return p;
}

void save_hand_params(const HandParams& p, const std::string& path) {
    json doc;
    doc["finger_length"] = p.finger_length;
    doc["finger_width"] = p.finger_width;
    doc["open_aperture"] = p.open_aperture;
    doc["closed_aperture"] = p.closed_aperture;
    doc["finger_thickness"] = p.finger_thickness;
    doc["slab"] = p.slab;
    atomic_write_file(path, doc.dump(2) + "\n");
}

LocalBox closing_region_box(const HandParams& p) {
    return {Vec3(-p.finger_length / 2, -p.open_aperture / 2, -p.finger_thickness / 2),
            Vec3(p.finger_length / 2, p.open_aperture / 2, p.finger_thickness / 2)};
}

std::array<LocalBox, 3> hand_body_boxes(const HandParams& p) {
    const double hl = p.finger_length / 2;
    const double ha = p.open_aperture / 2;
    const double ht = p.finger_thickness / 2;
    const double fw = p.finger_width;
    const LocalBox finger_pos{Vec3(-hl, ha, -ht), Vec3(hl, ha + fw, ht)};
    const LocalBox finger_neg{Vec3(-hl, -ha - fw, -ht), Vec3(hl, -ha, ht)};
    const LocalBox back_plate{Vec3(-hl - fw, -ha - fw, -ht), Vec3(-hl, ha + fw, ht)};
    return {finger_pos, finger_neg, back_plate};
}

double hand_bounding_radius(const HandParams& p) {
    const Vec3 far_corner(p.finger_length / 2 + p.finger_width,
                          p.open_aperture / 2 + p.finger_width, p.finger_thickness / 2);
    return far_corner.norm();
}

void HandPose::validate() const {
    if ((rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidArgument("hand rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-9)
        throw InvalidArgument("hand rotation must have det +1");
    if (!position.allFinite()) throw InvalidArgument("hand position not finite");
}

bool closing_region_contains(const HandHypothesis& h, const Vec3& q) {
    return closing_region_box(h.params).contains(h.pose.to_hand(q));
}

bool body_collides(const HandHypothesis& h, std::span<const Vec3> pts) {
    const auto boxes = hand_body_boxes(h.params);
    for (const Vec3& p : pts) {
        const Vec3 q = h.pose.to_hand(p);
        for (const LocalBox& b : boxes)
            if (b.contains(q)) return true;
    }
    return false;
}

std::vector<int> closing_plane_points(const HandHypothesis& h, std::span<const Vec3> pts,
                                      double slab) {
    if (!(slab > 0.0)) throw InvalidArgument("closing_plane_points: slab must be > 0");
    const LocalBox region = closing_region_box(h.params);
    std::vector<int> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec3 q = h.pose.to_hand(pts[i]);
        if (region.contains(q) && std::abs(q.z()) <= slab / 2)
            out.push_back(static_cast<int>(i));
    }
    return out;
}

std::string hypothesis_to_json_line(const HandHypothesis& h) {
    json row;
    std::vector<double> rot(9);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rot[static_cast<std::size_t>(3 * r + c)] = h.pose.rotation(r, c);
    row["rot"] = rot;
    row["pos"] = {h.pose.position.x(), h.pose.position.y(), h.pose.position.z()};
    row["params"] = {{"finger_length", h.params.finger_length},
                     {"finger_width", h.params.finger_width},
                     {"open_aperture", h.params.open_aperture},
                     {"closed_aperture", h.params.closed_aperture},
                     {"finger_thickness", h.params.finger_thickness},
                     {"slab", h.params.slab}};
    row["sample"] = h.source_point;
    row["cell"] = {h.cell_orientation, h.cell_position};
    row["push"] = h.pushed_offset;
    return row.dump();
}

HandHypothesis hypothesis_from_json_line(const std::string& line) {
    const json row = json::parse(line);
    HandHypothesis h;
    const auto rot = row.at("rot").get<std::vector<double>>();
    if (rot.size() != 9) throw IoError("hypothesis rot must have 9 entries");
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) h.pose.rotation(r, c) = rot[static_cast<std::size_t>(3 * r + c)];
    const auto pos = row.at("pos").get<std::vector<double>>();
    h.pose.position = Vec3(pos.at(0), pos.at(1), pos.at(2));
    const json& p = row.at("params");
    h.params.finger_length = p.at("finger_length");
    h.params.finger_width = p.at("finger_width");
    h.params.open_aperture = p.at("open_aperture");
    h.params.closed_aperture = p.at("closed_aperture");
    h.params.finger_thickness = p.at("finger_thickness");
    h.params.slab = p.at("slab");
    h.source_point = row.at("sample");
    h.cell_orientation = row.at("cell").at(0);
    h.cell_position = row.at("cell").at(1);
    h.pushed_offset = row.at("push");
    return h;
}

void save_hypotheses_jsonl(const std::vector<HandHypothesis>& hands, const std::string& path) {
    std::ostringstream out;
    for (const auto& h : hands) out << hypothesis_to_json_line(h) << '\n';
    atomic_write_file(path, out.str());
}

std::vector<HandHypothesis> load_hypotheses_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<HandHypothesis> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            out.push_back(hypothesis_from_json_line(line));
        } catch (const json::exception& e) {
            throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace grasp
