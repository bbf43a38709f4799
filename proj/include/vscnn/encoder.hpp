#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "vscnn/dataset.hpp"
#include "vscnn/skeleton.hpp"

namespace vscnn {

inline constexpr int kDefaultSampleFrames = 40;
inline constexpr int kImageChannels = 6;  // position x,y,z then motion dx,dy,dz

/// Image-like encoding of a skeleton sequence: joints as rows, frames as
/// columns, 6 channels (normalized position + inter-frame motion), all
/// intensities in [0,1].
struct SkeletonImage {
    int joints = kJointCount;
    int frames = kDefaultSampleFrames;
    std::vector<double> data;  // (joint, frame, channel), row-major

    int label = 0;  // action_id
    int subject_id = 0;
    ViewDescriptor view;

    double& at(int j, int t, int c) { return data[(static_cast<std::size_t>(j) * frames + t) * kImageChannels + c]; }
    double at(int j, int t, int c) const { return data[(static_cast<std::size_t>(j) * frames + t) * kImageChannels + c]; }
    std::size_t size() const { return data.size(); }
};

namespace detail {

inline void require_encodable(const SkeletonSequence& seq) {
    for (const auto& f : seq.frames) {
        if (f.joints.size() != static_cast<std::size_t>(kJointCount))
            throw std::invalid_argument("encoder: frame without exactly 25 joints");
        for (int j = 0; j < kJointCount; ++j)
            if (!f.valid[j]) throw std::invalid_argument("encoder: sequence has missing joints");
    }
}

inline double coord(const SkeletonFrame& f, int j, int c) {
    const Vec3& p = f.joints[j];
    return c == 0 ? p.x : (c == 1 ? p.y : p.z);
}

}  // namespace detail

/// Position grid: pixel (j,t,c) = normalized coordinate c of joint j at frame t.
inline std::vector<double> encode_position(const SkeletonSequence& seq) {
    detail::require_encodable(seq);
    const std::size_t T = seq.frames.size();
    std::vector<double> grid(static_cast<std::size_t>(kJointCount) * T * 3);
    for (int j = 0; j < kJointCount; ++j)
        for (std::size_t t = 0; t < T; ++t)
            for (int c = 0; c < 3; ++c)
                grid[(j * T + t) * 3 + c] = detail::coord(seq.frames[t], j, c);
    return grid;
}

/// Motion grid: inter-frame coordinate difference, mapped from [-1,1] to
/// [0,1]; the first column is the 0.5 midpoint.
inline std::vector<double> encode_motion(const SkeletonSequence& seq) {
    detail::require_encodable(seq);
    const std::size_t T = seq.frames.size();
    std::vector<double> grid(static_cast<std::size_t>(kJointCount) * T * 3);
    for (int j = 0; j < kJointCount; ++j) {
        for (std::size_t t = 0; t < T; ++t) {
            for (int c = 0; c < 3; ++c) {
                const double d = t == 0 ? 0.0
                                        : detail::coord(seq.frames[t], j, c) -
                                              detail::coord(seq.frames[t - 1], j, c);
                grid[(j * T + t) * 3 + c] = 0.5 * (d + 1.0);
            }
        }
    }
    return grid;
}

/// Full encoding pipeline: repair missing joints, resample to `frames`,
/// min-max normalize, then stack position and motion grids channel-wise.
inline SkeletonImage encode_sample(const SkeletonSequence& raw, int frames = kDefaultSampleFrames) {
    if (frames <= 0) throw std::invalid_argument("encode_sample: frames must be positive");
    const SkeletonSequence repaired = interpolate_missing(raw);
    const SkeletonSequence sampled = sample_frames(repaired, static_cast<std::size_t>(frames));
    const SkeletonSequence norm = normalize_sequence(sampled);

    const auto pos = encode_position(norm);
    const auto mot = encode_motion(norm);

    SkeletonImage img;
    img.joints = kJointCount;
    img.frames = frames;
    img.data.resize(static_cast<std::size_t>(kJointCount) * frames * kImageChannels);
    for (int j = 0; j < kJointCount; ++j) {
        for (int t = 0; t < frames; ++t) {
            for (int c = 0; c < 3; ++c) {
                img.at(j, t, c) = pos[(j * static_cast<std::size_t>(frames) + t) * 3 + c];
                img.at(j, t, 3 + c) = mot[(j * static_cast<std::size_t>(frames) + t) * 3 + c];
            }
        }
    }
    img.label = raw.action_id;
    img.subject_id = raw.subject_id;
    img.view = sampled.view;  // subsampled trajectory for varying views
    return img;
}

// Binary cache: encoded.bin holds raw doubles back to back; index.jsonl has
// one line per sample with its byte offset and metadata.

inline nlohmann::json view_to_json(const ViewDescriptor& v) {
    nlohmann::json j;
    if (v.is_fixed()) {
        j["kind"] = "fixed";
        j["index"] = v.fixed_index;
    } else {
        j["kind"] = "varying";
        j["angles"] = v.angles;
    }
    return j;
}

inline ViewDescriptor view_from_json(const nlohmann::json& j) {
    if (j.at("kind") == "fixed") return ViewDescriptor::fixed_view(j.at("index").get<int>());
    return ViewDescriptor::varying_view(j.at("angles").get<std::vector<double>>());
}

inline void write_encoded_cache(const std::filesystem::path& dir,
                                const std::vector<SkeletonImage>& samples) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream bin(dir / "encoded.bin", std::ios::binary);
    std::ofstream idx(dir / "index.jsonl");
    if (!bin || !idx) throw std::runtime_error("cannot write encoded cache in " + dir.string());

    std::uint64_t offset = 0;
    for (const auto& s : samples) {
        nlohmann::json j;
        j["offset"] = offset;
        j["joints"] = s.joints;
        j["frames"] = s.frames;
        j["channels"] = kImageChannels;
        j["label"] = s.label;
        j["subject_id"] = s.subject_id;
        j["view"] = view_to_json(s.view);
        idx << j.dump() << "\n";
        bin.write(reinterpret_cast<const char*>(s.data.data()),
                  static_cast<std::streamsize>(s.data.size() * sizeof(double)));
        offset += s.data.size() * sizeof(double);
    }
    if (!bin || !idx) throw std::runtime_error("write failed in " + dir.string());
}

inline std::vector<SkeletonImage> read_encoded_cache(const std::filesystem::path& dir) {
    std::ifstream bin(dir / "encoded.bin", std::ios::binary);
    std::ifstream idx(dir / "index.jsonl");
    if (!bin || !idx) throw std::runtime_error("cannot read encoded cache in " + dir.string());

    std::vector<SkeletonImage> samples;
    std::string line;
    while (std::getline(idx, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        SkeletonImage s;
        s.joints = j.at("joints").get<int>();
        s.frames = j.at("frames").get<int>();
        s.label = j.at("label").get<int>();
        s.subject_id = j.at("subject_id").get<int>();
        s.view = view_from_json(j.at("view"));
        s.data.resize(static_cast<std::size_t>(s.joints) * s.frames * kImageChannels);
        bin.seekg(static_cast<std::streamoff>(j.at("offset").get<std::uint64_t>()));
        bin.read(reinterpret_cast<char*>(s.data.data()),
                 static_cast<std::streamsize>(s.data.size() * sizeof(double)));
        if (!bin) throw std::runtime_error("encoded.bin truncated in " + dir.string());
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace vscnn
