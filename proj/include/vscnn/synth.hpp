#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "vscnn/dataset.hpp"
#include "vscnn/rng.hpp"
#include "vscnn/skeleton.hpp"

namespace vscnn {

// Synthetic multi-view capture rig: 8 fixed sensors on a 2.5 m circle at
// 1.2 m height, plus a full-orbit varying-view sweep. Subjects face the
// front-view sensor; actions are parametric periodic limb motions.

struct CameraPose {
    double angle_deg = 0.0;
    double radius = 2.5;
    double height = 1.2;
};

inline CameraPose camera_pose(int view_index) {
    if (view_index < 0 || view_index >= kFixedViewCount)
        throw std::invalid_argument("camera_pose: view index must be in [0,7]");
    return CameraPose{kFixedViewStepDeg * view_index, 2.5, 1.2};
}

/// Linear 360 degree sweep: angle(t) = 360*t/n, t = 0..n-1.
inline std::vector<double> orbit_trajectory(std::size_t n_frames) {
    if (n_frames < 2) throw std::invalid_argument("orbit_trajectory: need at least 2 frames");
    std::vector<double> angles(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t)
        angles[t] = 360.0 * static_cast<double>(t) / static_cast<double>(n_frames);
    return angles;
}

/// Rotation about the vertical (y) axis: angle 90 maps (1,0,0) to (0,0,-1).
inline Vec3 rotate_vertical_deg(const Vec3& p, double angle_deg) {
    const double a = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(a);
    const double s = std::sin(a);
    return Vec3{p.x * c + p.z * s, p.y, -p.x * s + p.z * c};
}

/// Camera frame of a world-frame point: rotate by the view angle, then place
/// the camera at the origin with the subject at +z distance `radius` and the
/// sensor height subtracted from y.
inline Vec3 world_to_camera_point(const Vec3& p, double angle_deg, double radius, double height) {
    Vec3 q = rotate_vertical_deg(p, angle_deg);
    return Vec3{q.x, q.y - height, q.z + radius};
}

inline SkeletonSequence world_to_camera(const SkeletonSequence& seq, const CameraPose& pose) {
    SkeletonSequence out = seq;
    for (auto& f : out.frames)
        for (auto& p : f.joints)
            p = world_to_camera_point(p, pose.angle_deg, pose.radius, pose.height);
    return out;
}

inline SkeletonSequence world_to_camera(const SkeletonSequence& seq,
                                        const std::vector<double>& per_frame_angles,
                                        double radius = 2.5, double height = 1.2) {
    if (per_frame_angles.size() != seq.frames.size())
        throw std::invalid_argument("world_to_camera: angle list length mismatch");
    SkeletonSequence out = seq;
    for (std::size_t t = 0; t < out.frames.size(); ++t)
        for (auto& p : out.frames[t].joints)
            p = world_to_camera_point(p, per_frame_angles[t], radius, height);
    out.view = ViewDescriptor::varying_view(per_frame_angles);
    return out;
}

/// Per-class motion parameter table. Deterministic integer formulas so the
/// table is inspectable; classes differ in dominant frequency and in which
/// axes/limbs carry the motion.
struct ActionParams {
    double freq = 0.0;  // cycles per frame
    double arm_amp = 0.0, leg_amp = 0.0, torso_amp = 0.0, head_amp = 0.0;
    int arm_axis = 0, leg_axis = 0;  // 0:x 1:y 2:z
    bool arms_antiphase = false, legs_antiphase = false;
    double phase0 = 0.0;
};

inline ActionParams class_motion_params(int class_id) {
    if (class_id < 0 || class_id >= kActionClassCount)
        throw std::invalid_argument("class_motion_params: class id out of [0,39]");
    const int c = class_id;
    const int family = c / 8;
    ActionParams p;
    p.freq = 0.02 * (1.0 + 0.35 * (c % 8));
    p.arm_axis = (c + family) % 3;
    p.leg_axis = (2 * c + 1 + family) % 3;
    p.arms_antiphase = (c % 2) == 0;
    p.legs_antiphase = ((c / 2) % 2) == 0;
    p.arm_amp = 0.12 + 0.03 * ((c * 3) % 4);
    p.leg_amp = 0.08 + 0.025 * ((c * 5) % 4);
    p.torso_amp = 0.02 + 0.012 * (family % 3);
    p.head_amp = 0.012 + 0.006 * (c % 3);
    p.phase0 = 0.4 * (c % 5);
    return p;
}

namespace detail {

// Kinect v2 joint order: 0 SpineBase, 1 SpineMid, 2 Neck, 3 Head,
// 4-7 left arm (Shoulder/Elbow/Wrist/Hand), 8-11 right arm, 12-15 left leg
// (Hip/Knee/Ankle/Foot), 16-19 right leg, 20 SpineShoulder, 21 HandTipLeft,
// 22 ThumbLeft, 23 HandTipRight, 24 ThumbRight.
inline const std::array<Vec3, 25>& base_pose() {
    static const std::array<Vec3, 25> pose = {{
        {0.00, 0.95, 0.00},   {0.00, 1.20, 0.00},   {0.00, 1.52, 0.00},  {0.00, 1.67, 0.00},
        {0.20, 1.45, 0.00},   {0.28, 1.18, 0.00},   {0.33, 0.93, 0.00},  {0.35, 0.86, 0.00},
        {-0.20, 1.45, 0.00},  {-0.28, 1.18, 0.00},  {-0.33, 0.93, 0.00}, {-0.35, 0.86, 0.00},
        {0.10, 0.92, 0.00},   {0.12, 0.50, 0.00},   {0.14, 0.10, 0.00},  {0.15, 0.03, -0.12},
        {-0.10, 0.92, 0.00},  {-0.12, 0.50, 0.00},  {-0.14, 0.10, 0.00}, {-0.15, 0.03, -0.12},
        {0.00, 1.42, 0.00},   {0.36, 0.80, 0.00},   {0.31, 0.84, 0.03},  {-0.36, 0.80, 0.00},
        {-0.31, 0.84, 0.03},
    }};
    return pose;
}

struct ChainWeight {
    int joint;
    double w;
};

inline constexpr std::array<ChainWeight, 6> kLeftArm = {{{4, 0.15}, {5, 0.45}, {6, 0.85}, {7, 1.0}, {21, 1.1}, {22, 0.95}}};
inline constexpr std::array<ChainWeight, 6> kRightArm = {{{8, 0.15}, {9, 0.45}, {10, 0.85}, {11, 1.0}, {23, 1.1}, {24, 0.95}}};
inline constexpr std::array<ChainWeight, 4> kLeftLeg = {{{12, 0.1}, {13, 0.5}, {14, 0.9}, {15, 1.0}}};
inline constexpr std::array<ChainWeight, 4> kRightLeg = {{{16, 0.1}, {17, 0.5}, {18, 0.9}, {19, 1.0}}};
inline constexpr std::array<ChainWeight, 5> kTorso = {{{0, 0.2}, {1, 0.5}, {20, 0.9}, {2, 1.0}, {3, 1.1}}};
inline constexpr std::array<ChainWeight, 2> kHead = {{{2, 0.4}, {3, 1.0}}};

inline void add_axis(Vec3& p, int axis, double d) {
    if (axis == 0)
        p.x += d;
    else if (axis == 1)
        p.y += d;
    else
        p.z += d;
}

struct SubjectTraits {
    double height_scale = 1.0;
    double width_scale = 1.0;
    double amp_scale = 1.0;
    double phase_jitter = 0.0;
};

inline SubjectTraits subject_traits(std::uint64_t subject_seed) {
    Rng rng(Rng::mix(subject_seed, 0xA11CEULL));
    SubjectTraits t;
    t.height_scale = rng.uniform(0.92, 1.08);
    t.width_scale = rng.uniform(0.92, 1.08);
    t.amp_scale = rng.uniform(0.85, 1.15);
    t.phase_jitter = rng.uniform(0.0, 0.9);
    return t;
}

}  // namespace detail

/// Deterministic world-frame action: class-specific periodic limb
/// trajectories on a 25-joint figure plus subject-specific scale/phase jitter.
inline SkeletonSequence generate_action(int class_id, std::uint64_t subject_seed,
                                        std::size_t n_frames) {
    if (n_frames == 0) throw std::invalid_argument("generate_action: n_frames must be positive");
    const ActionParams ap = class_motion_params(class_id);
    const detail::SubjectTraits st = detail::subject_traits(subject_seed);

    SkeletonSequence seq;
    seq.action_id = class_id;
    seq.setting = "synthetic";
    seq.frames.resize(n_frames);

    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t t = 0; t < n_frames; ++t) {
        SkeletonFrame& f = seq.frames[t];
        for (int j = 0; j < kJointCount; ++j) {
            Vec3 p = detail::base_pose()[j];
            p.x *= st.width_scale;
            p.y *= st.height_scale;
            f.joints[j] = p;
        }

        const double theta = two_pi * ap.freq * static_cast<double>(t) + ap.phase0 + st.phase_jitter;
        const double arm_a = ap.arm_amp * st.amp_scale;
        const double leg_a = ap.leg_amp * st.amp_scale;

        const double left_arm = arm_a * std::sin(theta);
        const double right_arm = arm_a * std::sin(theta + (ap.arms_antiphase ? std::numbers::pi : 0.0));
        for (const auto& cw : detail::kLeftArm) detail::add_axis(f.joints[cw.joint], ap.arm_axis, left_arm * cw.w);
        for (const auto& cw : detail::kRightArm) detail::add_axis(f.joints[cw.joint], ap.arm_axis, right_arm * cw.w);

        const double leg_phase = theta + 0.5 * std::numbers::pi;
        const double left_leg = leg_a * std::sin(leg_phase);
        const double right_leg = leg_a * std::sin(leg_phase + (ap.legs_antiphase ? std::numbers::pi : 0.0));
        for (const auto& cw : detail::kLeftLeg) detail::add_axis(f.joints[cw.joint], ap.leg_axis, left_leg * cw.w);
        for (const auto& cw : detail::kRightLeg) detail::add_axis(f.joints[cw.joint], ap.leg_axis, right_leg * cw.w);

        const double sway = ap.torso_amp * st.amp_scale * std::sin(0.5 * theta);
        for (const auto& cw : detail::kTorso) f.joints[cw.joint].x += sway * cw.w;

        const double bob = ap.head_amp * st.amp_scale * std::sin(2.0 * theta);
        for (const auto& cw : detail::kHead) f.joints[cw.joint].y += bob * cw.w;
    }
    return seq;
}

/// Occlusion severity profile over the capture circle: a cosine bump peaking
/// at the side views (90 and 270 degrees) and vanishing at front/back.
inline double occlusion_bump(double angle_deg) {
    const double a = wrap_angle_deg(angle_deg) * std::numbers::pi / 180.0;
    return std::max(0.0, -std::cos(2.0 * a));
}

struct SynthSpec {
    int n_classes = 5;
    int subjects_per_class = 8;
    std::size_t frames_fixed = 200;
    std::size_t frames_orbit = 2000;
    double noise_std = 0.0;       // meters, Gaussian, camera frame
    double occlusion_rate = 0.0;  // peak per-frame joint dropout probability
    double occlusion_burst_frames = 12.0;  // mean dropout run length
    std::uint64_t seed = 1;
    double radius = 2.5;
    double height = 1.2;
    bool sync_front_copies = false;  // extra synchronous FV captures per side view

    void validate() const {
        if (n_classes < 1 || n_classes > kActionClassCount)
            throw std::invalid_argument("SynthSpec: n_classes out of [1,40]");
        if (subjects_per_class < 1) throw std::invalid_argument("SynthSpec: subjects_per_class < 1");
        if (frames_fixed == 0 || frames_orbit < 2)
            throw std::invalid_argument("SynthSpec: frame counts must be positive");
        if (noise_std < 0.0) throw std::invalid_argument("SynthSpec: noise_std < 0");
        if (occlusion_rate < 0.0 || occlusion_rate > 1.0)
            throw std::invalid_argument("SynthSpec: occlusion_rate out of [0,1]");
        if (occlusion_burst_frames < 1.0)
            throw std::invalid_argument("SynthSpec: occlusion_burst_frames must be >= 1");
        if (radius <= 0.0) throw std::invalid_argument("SynthSpec: radius must be > 0");
    }
};

namespace detail {

// Dropouts follow a two-state Markov chain per joint whose per-frame marginal
// equals occlusion_rate * occlusion_bump(angle); runs last occlusion_burst_frames
// on average, the way trackers lose a joint for a stretch rather than for
// isolated frames.
inline void apply_sensor_noise(SkeletonSequence& seq, const SynthSpec& spec, Rng& rng) {
    const double recover = 1.0 / spec.occlusion_burst_frames;
    std::array<bool, kJointCount> dropped{};
    if (spec.occlusion_rate > 0.0 && !seq.frames.empty()) {
        const double p0 = spec.occlusion_rate * occlusion_bump(seq.view.angle_at(0));
        for (int j = 0; j < kJointCount; ++j) dropped[j] = rng.uniform() < p0;
    }

    for (std::size_t t = 0; t < seq.frames.size(); ++t) {
        const double angle = seq.view.angle_at(t);
        const double p = spec.occlusion_rate * occlusion_bump(angle);
        const double enter = p >= 1.0 ? 1.0 : std::min(1.0, p * recover / (1.0 - p));
        auto& f = seq.frames[t];
        for (int j = 0; j < kJointCount; ++j) {
            if (spec.noise_std > 0.0) {
                f.joints[j].x += rng.normal(0.0, spec.noise_std);
                f.joints[j].y += rng.normal(0.0, spec.noise_std);
                f.joints[j].z += rng.normal(0.0, spec.noise_std);
            }
            if (spec.occlusion_rate > 0.0) {
                const double u = rng.uniform();
                dropped[j] = dropped[j] ? !(u < recover) : u < enter;
                if (dropped[j]) {
                    f.joints[j] = Vec3{};
                    f.valid[j] = 0;
                }
            }
        }
    }
}

}  // namespace detail

/// One fixed-viewpoint capture of a world-frame performance.
inline SkeletonSequence capture_fixed(const SkeletonSequence& world, int view_index,
                                      const SynthSpec& spec, Rng& rng) {
    CameraPose pose = camera_pose(view_index);
    pose.radius = spec.radius;
    pose.height = spec.height;
    SkeletonSequence cam = world_to_camera(world, pose);
    cam.view = ViewDescriptor::fixed_view(view_index);
    detail::apply_sensor_noise(cam, spec, rng);
    return cam;
}

/// One full-orbit varying-view capture of a world-frame performance.
inline SkeletonSequence capture_orbit(const SkeletonSequence& world, const SynthSpec& spec,
                                      Rng& rng) {
    const auto angles = orbit_trajectory(world.frames.size());
    SkeletonSequence cam = world_to_camera(world, angles, spec.radius, spec.height);
    detail::apply_sensor_noise(cam, spec, rng);
    return cam;
}

/// Generates the full synthetic dataset under out_dir: per (class, subject)
/// one capture from each of the 8 fixed viewpoints plus one full orbit.
/// Writes data CSVs and manifest.jsonl; returns the manifest entries.
inline std::vector<ManifestEntry> generate_dataset(const SynthSpec& spec,
                                                   const std::filesystem::path& out_dir) {
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "data", ec);
    if (ec) throw std::runtime_error("cannot create output dir: " + (out_dir / "data").string());

    std::vector<ManifestEntry> entries;
    char name[64];
    for (int c = 0; c < spec.n_classes; ++c) {
        for (int s = 0; s < spec.subjects_per_class; ++s) {
            const int subject_id = s + 1;
            const std::uint64_t subject_seed = Rng::mix(spec.seed, 1000 + static_cast<std::uint64_t>(s));
            const std::uint64_t item = (static_cast<std::uint64_t>(c) * 1024 + static_cast<std::uint64_t>(s)) * 16;

            const SkeletonSequence world_fixed = generate_action(c, subject_seed, spec.frames_fixed);
            for (int v = 0; v < kFixedViewCount; ++v) {
                Rng rng(Rng::mix(spec.seed, item + static_cast<std::uint64_t>(v)));
                SkeletonSequence cam = capture_fixed(world_fixed, v, spec, rng);
                cam.subject_id = subject_id;

                std::snprintf(name, sizeof(name), "data/c%02d_s%03d_v%d.csv", c, subject_id, v);
                write_skeleton_csv(out_dir / name, cam);
                entries.push_back(ManifestEntry{subject_id, c, false, v, "synthetic", name});

                if (spec.sync_front_copies && v != 0) {
                    Rng rng_fv(Rng::mix(spec.seed, item + 9 + static_cast<std::uint64_t>(v)));
                    SkeletonSequence fv = capture_fixed(world_fixed, 0, spec, rng_fv);
                    fv.subject_id = subject_id;
                    std::snprintf(name, sizeof(name), "data/c%02d_s%03d_v%d_syncfv.csv", c, subject_id, v);
                    write_skeleton_csv(out_dir / name, fv);
                    entries.push_back(ManifestEntry{subject_id, c, false, 0, "synthetic", name});
                }
            }

            Rng rng(Rng::mix(spec.seed, item + 8));
            const SkeletonSequence world_orbit = generate_action(c, subject_seed, spec.frames_orbit);
            SkeletonSequence orbit = capture_orbit(world_orbit, spec, rng);
            orbit.subject_id = subject_id;
            std::snprintf(name, sizeof(name), "data/c%02d_s%03d_orbit.csv", c, subject_id);
            write_skeleton_csv(out_dir / name, orbit);
            entries.push_back(ManifestEntry{subject_id, c, true, 0, "synthetic", name});
        }
    }

    write_manifest(out_dir / "manifest.jsonl", entries);
    return entries;
}

}  // namespace vscnn
