#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace vscnn {

inline constexpr int kJointCount = 25;
inline constexpr int kActionClassCount = 40;
inline constexpr int kFixedViewCount = 8;
inline constexpr double kFixedViewStepDeg = 45.0;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3& a, const Vec3& b) = default;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// One captured frame: 25 joints with per-joint validity flags.
struct SkeletonFrame {
    std::vector<Vec3> joints = std::vector<Vec3>(kJointCount);
    std::vector<std::uint8_t> valid = std::vector<std::uint8_t>(kJointCount, 1);
};

inline double wrap_angle_deg(double a) {
    a = std::fmod(a, 360.0);
    if (a < 0.0) a += 360.0;
    // fmod can return 360.0 - eps rounding back to 360.0 after +=; clamp.
    if (a >= 360.0) a = 0.0;
    return a;
}

/// Camera viewpoint of a sequence: one of the 8 fixed positions on the capture
/// circle, or a per-frame angle trajectory for orbit captures.
struct ViewDescriptor {
    enum class Kind { fixed, varying };

    Kind kind = Kind::fixed;
    int fixed_index = 0;          // [0,7]; 0 = front viewpoint
    std::vector<double> angles;   // per-frame angle in degrees when varying

    static ViewDescriptor fixed_view(int index) {
        if (index < 0 || index >= kFixedViewCount)
            throw std::invalid_argument("fixed view index must be in [0,7]");
        ViewDescriptor v;
        v.kind = Kind::fixed;
        v.fixed_index = index;
        return v;
    }

    static ViewDescriptor varying_view(std::vector<double> per_frame_angles) {
        ViewDescriptor v;
        v.kind = Kind::varying;
        v.angles = std::move(per_frame_angles);
        return v;
    }

    bool is_fixed() const { return kind == Kind::fixed; }

    double fixed_angle_deg() const { return kFixedViewStepDeg * fixed_index; }

    double angle_at(std::size_t frame) const {
        return is_fixed() ? fixed_angle_deg() : angles.at(frame);
    }
};

struct SkeletonSequence {
    std::vector<SkeletonFrame> frames;
    int subject_id = 0;
    int action_id = 0;
    ViewDescriptor view;
    std::string setting = "synthetic";  // A | B | C | synthetic

    std::size_t size() const { return frames.size(); }
};

struct ValidationReport {
    std::size_t frame_count = 0;
    std::size_t missing_joint_count = 0;
    std::vector<std::size_t> distorted_frame_indices;
    std::vector<std::string> violations;
    bool pass = false;
};

/// Structural check. Missing joints are reported but do not fail validation;
/// non-finite coordinates on valid joints and shape violations do.
inline ValidationReport validate_sequence(const SkeletonSequence& seq) {
    ValidationReport r;
    r.frame_count = seq.frames.size();

    if (seq.frames.empty()) r.violations.push_back("sequence has no frames");
    if (seq.action_id < 0 || seq.action_id >= kActionClassCount)
        r.violations.push_back("action_id out of [0,39]");
    if (seq.subject_id <= 0) r.violations.push_back("subject_id must be positive");

    if (seq.view.is_fixed()) {
        if (seq.view.fixed_index < 0 || seq.view.fixed_index >= kFixedViewCount)
            r.violations.push_back("fixed view index out of [0,7]");
    } else {
        if (seq.view.angles.size() != seq.frames.size())
            r.violations.push_back("varying-view angle list length != frame count");
        for (double a : seq.view.angles) {
            if (!(a >= 0.0 && a < 360.0)) {
                r.violations.push_back("view angle out of [0,360)");
                break;
            }
        }
    }

    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        const auto& f = seq.frames[t];
        if (f.joints.size() != static_cast<std::size_t>(kJointCount) ||
            f.valid.size() != f.joints.size()) {
            r.violations.push_back("frame " + std::to_string(t) + " does not have exactly 25 joints");
            continue;
        }
        bool distorted = false;
        for (int j = 0; j < kJointCount; ++j) {
            if (!f.valid[j]) {
                ++r.missing_joint_count;
            } else if (!f.joints[j].finite()) {
                distorted = true;
            }
        }
        if (distorted) r.distorted_frame_indices.push_back(t);
    }

    r.pass = r.violations.empty() && r.distorted_frame_indices.empty();
    return r;
}

/// Repairs missing joints by per-joint temporal linear interpolation between
/// the nearest valid frames; leading/trailing gaps copy the nearest valid
/// value; joints missing in every frame become the zero coordinate. Valid
/// joints are never altered.
inline SkeletonSequence interpolate_missing(const SkeletonSequence& seq) {
    SkeletonSequence out = seq;
    const std::size_t n = out.frames.size();
    if (n == 0) return out;

    for (int j = 0; j < kJointCount; ++j) {
        std::vector<std::size_t> valid_ts;
        for (std::size_t t = 0; t < n; ++t)
            if (out.frames[t].valid[j]) valid_ts.push_back(t);

        if (valid_ts.empty()) {
            for (std::size_t t = 0; t < n; ++t) {
                out.frames[t].joints[j] = Vec3{};
                out.frames[t].valid[j] = 1;
            }
            continue;
        }

        std::size_t vi = 0;  // index into valid_ts of first valid frame >= t
        for (std::size_t t = 0; t < n; ++t) {
            if (out.frames[t].valid[j]) {
                while (vi < valid_ts.size() && valid_ts[vi] < t) ++vi;
                continue;
            }
            while (vi < valid_ts.size() && valid_ts[vi] < t) ++vi;
            const bool has_next = vi < valid_ts.size();
            const bool has_prev = vi > 0;
            Vec3 filled;
            if (has_prev && has_next) {
                const std::size_t p = valid_ts[vi - 1];
                const std::size_t q = valid_ts[vi];
                const double w = static_cast<double>(t - p) / static_cast<double>(q - p);
                const Vec3& a = out.frames[p].joints[j];
                const Vec3& b = out.frames[q].joints[j];
                filled = a + w * (b - a);
            } else if (has_next) {
                filled = out.frames[valid_ts[vi]].joints[j];
            } else {
                filled = out.frames[valid_ts.back()].joints[j];
            }
            out.frames[t].joints[j] = filled;
            out.frames[t].valid[j] = 1;
        }
    }
    return out;
}

inline std::vector<std::size_t> sample_indices(std::size_t length, std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = (i * length) / n;
    return idx;
}

/// Evenly selects n frames at indices floor(i*L/n). When L < n the indices
/// repeat, preserving order. View trajectories are subsampled identically.
inline SkeletonSequence sample_frames(const SkeletonSequence& seq, std::size_t n) {
    if (n == 0) throw std::invalid_argument("sample_frames: n must be positive");
    if (seq.frames.empty()) throw std::invalid_argument("sample_frames: empty sequence");

    const auto idx = sample_indices(seq.frames.size(), n);
    SkeletonSequence out;
    out.subject_id = seq.subject_id;
    out.action_id = seq.action_id;
    out.setting = seq.setting;
    out.frames.reserve(n);
    for (std::size_t i : idx) out.frames.push_back(seq.frames[i]);

    if (seq.view.is_fixed()) {
        out.view = seq.view;
    } else {
        std::vector<double> angles;
        angles.reserve(n);
        for (std::size_t i : idx) angles.push_back(seq.view.angles.at(i));
        out.view = ViewDescriptor::varying_view(std::move(angles));
    }
    return out;
}

/// Splits into k contiguous clips; the first (L mod k) clips carry one extra
/// frame, so concatenating the clips reproduces the input exactly.
inline std::vector<SkeletonSequence> clip_sequence(const SkeletonSequence& seq, std::size_t k) {
    if (k == 0) throw std::invalid_argument("clip_sequence: k must be positive");
    const std::size_t length = seq.frames.size();
    if (length < k) throw std::invalid_argument("clip_sequence: sequence shorter than k");

    const std::size_t base = length / k;
    const std::size_t extra = length % k;

    std::vector<SkeletonSequence> clips;
    clips.reserve(k);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        SkeletonSequence clip;
        clip.subject_id = seq.subject_id;
        clip.action_id = seq.action_id;
        clip.setting = seq.setting;
        clip.frames.assign(seq.frames.begin() + begin, seq.frames.begin() + begin + len);
        if (seq.view.is_fixed()) {
            clip.view = seq.view;
        } else {
            clip.view = ViewDescriptor::varying_view(std::vector<double>(
                seq.view.angles.begin() + begin, seq.view.angles.begin() + begin + len));
        }
        clips.push_back(std::move(clip));
        begin += len;
    }
    return clips;
}

/// Per-axis min-max scaling to [0,1] over all joints and frames of the
/// sequence. A constant axis maps to 0.5. Expects all joints valid.
inline SkeletonSequence normalize_sequence(const SkeletonSequence& seq) {
    SkeletonSequence out = seq;
    if (out.frames.empty()) return out;

    constexpr double inf = std::numeric_limits<double>::infinity();
    double lo[3] = {inf, inf, inf};
    double hi[3] = {-inf, -inf, -inf};
    for (const auto& f : out.frames) {
        for (const auto& p : f.joints) {
            lo[0] = std::min(lo[0], p.x); hi[0] = std::max(hi[0], p.x);
            lo[1] = std::min(lo[1], p.y); hi[1] = std::max(hi[1], p.y);
            lo[2] = std::min(lo[2], p.z); hi[2] = std::max(hi[2], p.z);
        }
    }

    const auto scale = [&](double v, int axis) {
        const double span = hi[axis] - lo[axis];
        if (span <= 0.0) return 0.5;
        return (v - lo[axis]) / span;
    };
    for (auto& f : out.frames) {
        for (auto& p : f.joints) {
            p = Vec3{scale(p.x, 0), scale(p.y, 1), scale(p.z, 2)};
        }
    }
    return out;
}

/// Circular mean of angles in degrees, wrapped to [0,360).
inline double circular_mean_deg(const std::vector<double>& angles_deg) {
    if (angles_deg.empty()) throw std::invalid_argument("circular_mean_deg: empty angle list");
    double s = 0.0, c = 0.0;
    for (double a : angles_deg) {
        const double r = a * std::numbers::pi / 180.0;
        s += std::sin(r);
        c += std::cos(r);
    }
    const double mean = std::atan2(s, c) * 180.0 / std::numbers::pi;
    return wrap_angle_deg(mean);
}

/// Representative angle of a sequence for view-group routing.
inline double routing_angle_deg(const ViewDescriptor& view) {
    if (view.is_fixed()) return view.fixed_angle_deg();
    if (view.angles.empty())
        throw std::invalid_argument("routing_angle_deg: varying view without angles");
    return circular_mean_deg(view.angles);
}

}  // namespace vscnn
