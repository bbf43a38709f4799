#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vscnn/skeleton.hpp"

namespace vscnn {

// Dataset layout: a manifest.jsonl with one entry per sequence, plus one CSV
// per sequence. CSV rows are frames: j0x,j0y,j0z,...,j24x,j24y,j24z (75 cols),
// then 25 validity flags, then one angle_deg column for varying-view files.

struct ManifestEntry {
    int subject_id = 0;
    int action_id = 0;
    bool varying = false;
    int view_index = 0;  // meaningful when !varying
    std::string setting = "synthetic";
    std::string path;    // relative to the manifest file
};

inline nlohmann::json to_json(const ManifestEntry& e) {
    nlohmann::json j;
    j["subject_id"] = e.subject_id;
    j["action_id"] = e.action_id;
    if (e.varying)
        j["view"] = "varying";
    else
        j["view"] = e.view_index;
    j["setting"] = e.setting;
    j["path"] = e.path;
    return j;
}

inline ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
    ManifestEntry e;
    e.subject_id = j.at("subject_id").get<int>();
    e.action_id = j.at("action_id").get<int>();
    const auto& v = j.at("view");
    if (v.is_string()) {
        if (v.get<std::string>() != "varying")
            throw std::runtime_error("manifest: view string must be \"varying\"");
        e.varying = true;
    } else {
        e.view_index = v.get<int>();
        if (e.view_index < 0 || e.view_index >= kFixedViewCount)
            throw std::runtime_error("manifest: fixed view index out of [0,7]");
    }
    e.setting = j.value("setting", std::string("synthetic"));
    e.path = j.at("path").get<std::string>();
    return e;
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    for (const auto& e : entries) out << to_json(e).dump() << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read manifest: " + path.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& ex) {
            throw std::runtime_error("manifest line " + std::to_string(lineno) + ": " + ex.what());
        }
        entries.push_back(manifest_entry_from_json(j));
    }
    return entries;
}

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    out.append(buf, static_cast<std::size_t>(n));
}

inline double parse_double(std::string_view field, const std::string& context) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw std::runtime_error("bad numeric field '" + std::string(field) + "' in " + context);
    return v;
}

}  // namespace detail

inline void write_skeleton_csv(const std::filesystem::path& path, const SkeletonSequence& seq) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write skeleton csv: " + path.string());
    std::string row;
    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        const auto& f = seq.frames[t];
        if (f.joints.size() != static_cast<std::size_t>(kJointCount))
            throw std::runtime_error("write_skeleton_csv: frame without 25 joints");
        row.clear();
        for (int j = 0; j < kJointCount; ++j) {
            detail::append_double(row, f.joints[j].x); row.push_back(',');
            detail::append_double(row, f.joints[j].y); row.push_back(',');
            detail::append_double(row, f.joints[j].z); row.push_back(',');
        }
        for (int j = 0; j < kJointCount; ++j) {
            row.push_back(f.valid[j] ? '1' : '0');
            row.push_back(',');
        }
        if (seq.view.is_fixed()) {
            row.pop_back();  // trailing comma
        } else {
            detail::append_double(row, seq.view.angles.at(t));
        }
        out << row << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Reads a skeleton CSV. The manifest entry supplies the view interpretation:
/// fixed files have 100 columns, varying files 101 (trailing angle_deg).
inline SkeletonSequence read_skeleton_csv(const std::filesystem::path& path,
                                          const ManifestEntry& entry) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read skeleton csv: " + path.string());

    SkeletonSequence seq;
    seq.subject_id = entry.subject_id;
    seq.action_id = entry.action_id;
    seq.setting = entry.setting;

    const std::size_t expected = entry.varying ? 101 : 100;
    std::vector<double> angles;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string_view> fields;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string ctx = path.string() + ":" + std::to_string(lineno);

        fields.clear();
        std::string_view rest(line);
        while (true) {
            const auto pos = rest.find(',');
            if (pos == std::string_view::npos) {
                fields.push_back(rest);
                break;
            }
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        if (fields.size() != expected)
            throw std::runtime_error("expected " + std::to_string(expected) + " columns, got " +
                                     std::to_string(fields.size()) + " in " + ctx);

        SkeletonFrame f;
        for (int j = 0; j < kJointCount; ++j) {
            f.joints[j].x = detail::parse_double(fields[3 * j + 0], ctx);
            f.joints[j].y = detail::parse_double(fields[3 * j + 1], ctx);
            f.joints[j].z = detail::parse_double(fields[3 * j + 2], ctx);
        }
        for (int j = 0; j < kJointCount; ++j) {
            const auto v = fields[75 + j];
            if (v == "1")
                f.valid[j] = 1;
            else if (v == "0")
                f.valid[j] = 0;
            else
                throw std::runtime_error("validity flag must be 0 or 1 in " + ctx);
        }
        if (entry.varying) angles.push_back(detail::parse_double(fields[100], ctx));
        seq.frames.push_back(std::move(f));
    }

    seq.view = entry.varying ? ViewDescriptor::varying_view(std::move(angles))
                             : ViewDescriptor::fixed_view(entry.view_index);
    return seq;
}

inline SkeletonSequence load_sequence(const std::filesystem::path& manifest_dir,
                                      const ManifestEntry& entry) {
    return read_skeleton_csv(manifest_dir / entry.path, entry);
}

}  // namespace vscnn
