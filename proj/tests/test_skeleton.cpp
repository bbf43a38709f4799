#include <catch_amalgamated.hpp>

#include <cmath>

#include "vscnn/rng.hpp"
#include "vscnn/skeleton.hpp"

using namespace vscnn;

namespace {

SkeletonSequence make_sequence(std::size_t n_frames, int subject = 1, int action = 0) {
    SkeletonSequence seq;
    seq.subject_id = subject;
    seq.action_id = action;
    seq.view = ViewDescriptor::fixed_view(0);
    seq.frames.resize(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t)
        for (int j = 0; j < kJointCount; ++j)
            seq.frames[t].joints[j] = Vec3{0.01 * static_cast<double>(t), 0.1 * j, 1.0};
    return seq;
}

SkeletonSequence random_sequence(Rng& rng, std::size_t n_frames) {
    SkeletonSequence seq = make_sequence(n_frames);
    for (auto& f : seq.frames)
        for (auto& p : f.joints)
            p = Vec3{rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(-1, 1)};
    return seq;
}

}  // namespace

TEST_CASE("validate_sequence clean input passes") {
    const auto seq = make_sequence(200);
    const auto r = validate_sequence(seq);
    CHECK(r.pass);
    CHECK(r.frame_count == 200);
    CHECK(r.missing_joint_count == 0);
    CHECK(r.violations.empty());
}

TEST_CASE("validate_sequence flags a 24-joint frame") {
    auto seq = make_sequence(10);
    seq.frames[3].joints.pop_back();
    seq.frames[3].valid.pop_back();
    const auto r = validate_sequence(seq);
    CHECK_FALSE(r.pass);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].find("25 joints") != std::string::npos);
}

TEST_CASE("validate_sequence counts missing joints without failing") {
    auto seq = make_sequence(10);
    seq.frames[0].valid[3] = 0;
    seq.frames[5].valid[7] = 0;
    seq.frames[9].valid[24] = 0;
    const auto r = validate_sequence(seq);
    CHECK(r.pass);
    CHECK(r.missing_joint_count == 3);
}

TEST_CASE("validate_sequence flags non-finite valid joints as distorted") {
    auto seq = make_sequence(5);
    seq.frames[2].joints[4].x = std::nan("");
    const auto r = validate_sequence(seq);
    CHECK_FALSE(r.pass);
    REQUIRE(r.distorted_frame_indices.size() == 1);
    CHECK(r.distorted_frame_indices[0] == 2);
}

TEST_CASE("interpolate_missing fills a single gap linearly") {
    auto seq = make_sequence(3);
    seq.frames[0].joints[5] = {0, 0, 0};
    seq.frames[1].valid[5] = 0;
    seq.frames[2].joints[5] = {2, 0, 0};
    const auto out = interpolate_missing(seq);
    CHECK(out.frames[1].joints[5] == Vec3{1, 0, 0});
    CHECK(out.frames[1].valid[5] == 1);
}

TEST_CASE("interpolate_missing copies nearest value into leading gaps") {
    auto seq = make_sequence(6);
    for (std::size_t t = 0; t < 3; ++t) seq.frames[t].valid[8] = 0;
    seq.frames[3].joints[8] = {0.5, 0.6, 0.7};
    const auto out = interpolate_missing(seq);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(out.frames[t].joints[8] == Vec3{0.5, 0.6, 0.7});
        CHECK(out.frames[t].valid[8] == 1);
    }
}

TEST_CASE("interpolate_missing zeroes a joint missing everywhere") {
    auto seq = make_sequence(4);
    for (auto& f : seq.frames) f.valid[12] = 0;
    const auto out = interpolate_missing(seq);
    for (const auto& f : out.frames) {
        CHECK(f.joints[12] == Vec3{0, 0, 0});
        CHECK(f.valid[12] == 1);
    }
    CHECK(validate_sequence(out).missing_joint_count == 0);
}

TEST_CASE("interpolate_missing never alters valid joints") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        auto seq = random_sequence(rng, 30);
        for (auto& f : seq.frames)
            for (int j = 0; j < kJointCount; ++j)
                if (rng.uniform() < 0.3) f.valid[j] = 0;
        const auto out = interpolate_missing(seq);
        for (std::size_t t = 0; t < seq.frames.size(); ++t)
            for (int j = 0; j < kJointCount; ++j)
                if (seq.frames[t].valid[j]) REQUIRE(out.frames[t].joints[j] == seq.frames[t].joints[j]);
    }
}

TEST_CASE("sample_frames picks indices floor(i*L/n)") {
    const auto seq = make_sequence(200);
    const auto out = sample_frames(seq, 40);
    REQUIRE(out.frames.size() == 40);
    // independent oracle: explicit index arithmetic
    for (std::size_t i = 0; i < 40; ++i) {
        const std::size_t expect = (i * 200) / 40;  // 0,5,10,...,195
        CHECK(out.frames[i].joints[0].x == seq.frames[expect].joints[0].x);
    }
}

TEST_CASE("sample_frames is the identity when L == n") {
    Rng rng(3);
    const auto seq = random_sequence(rng, 40);
    const auto out = sample_frames(seq, 40);
    REQUIRE(out.frames.size() == 40);
    for (std::size_t t = 0; t < 40; ++t)
        CHECK(out.frames[t].joints == seq.frames[t].joints);
    // idempotence
    const auto twice = sample_frames(out, 40);
    for (std::size_t t = 0; t < 40; ++t)
        CHECK(twice.frames[t].joints == out.frames[t].joints);
}

TEST_CASE("sample_frames duplicates frames in order when L < n") {
    const auto seq = make_sequence(20);
    const auto out = sample_frames(seq, 40);
    REQUIRE(out.frames.size() == 40);
    for (std::size_t i = 0; i < 40; ++i) {
        const std::size_t expect = (i * 20) / 40;  // each frame twice, in order
        CHECK(out.frames[i].joints[0].x == seq.frames[expect].joints[0].x);
    }
}

TEST_CASE("sample_frames rejects n = 0") {
    const auto seq = make_sequence(5);
    CHECK_THROWS_AS(sample_frames(seq, 0), std::invalid_argument);
}

TEST_CASE("sample_frames subsamples varying-view angles with the frames") {
    auto seq = make_sequence(100);
    std::vector<double> angles(100);
    for (std::size_t t = 0; t < 100; ++t) angles[t] = 3.6 * static_cast<double>(t);
    seq.view = ViewDescriptor::varying_view(angles);
    const auto out = sample_frames(seq, 10);
    REQUIRE(out.view.angles.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(out.view.angles[i] == angles[(i * 100) / 10]);
}

TEST_CASE("clip_sequence equal split") {
    const auto seq = make_sequence(2000);
    const auto clips = clip_sequence(seq, 10);
    REQUIRE(clips.size() == 10);
    for (const auto& c : clips) CHECK(c.frames.size() == 200);
}

TEST_CASE("clip_sequence one-frame clips") {
    const auto seq = make_sequence(10);
    const auto clips = clip_sequence(seq, 10);
    REQUIRE(clips.size() == 10);
    for (const auto& c : clips) CHECK(c.frames.size() == 1);
}

TEST_CASE("clip_sequence gives earlier clips the remainder") {
    const auto seq = make_sequence(1735);
    const auto clips = clip_sequence(seq, 10);
    REQUIRE(clips.size() == 10);
    for (std::size_t c = 0; c < 5; ++c) CHECK(clips[c].frames.size() == 174);
    for (std::size_t c = 5; c < 10; ++c) CHECK(clips[c].frames.size() == 173);
}

TEST_CASE("clip_sequence rejects short input") {
    const auto seq = make_sequence(5);
    CHECK_THROWS_AS(clip_sequence(seq, 6), std::invalid_argument);
    CHECK_THROWS_AS(clip_sequence(seq, 0), std::invalid_argument);
}

TEST_CASE("clip then concatenate reproduces the input exactly") {
    Rng rng(11);
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t k = 1 + rng.below(12);
        const std::size_t length = k + rng.below(200);
        auto seq = random_sequence(rng, length);
        std::vector<double> angles(length);
        for (auto& a : angles) a = rng.uniform(0.0, 360.0);
        seq.view = ViewDescriptor::varying_view(angles);

        const auto clips = clip_sequence(seq, k);
        std::size_t pos = 0;
        for (const auto& clip : clips) {
            for (std::size_t t = 0; t < clip.frames.size(); ++t, ++pos) {
                REQUIRE(clip.frames[t].joints == seq.frames[pos].joints);
                REQUIRE(clip.view.angles[t] == seq.view.angles[pos]);
            }
        }
        REQUIRE(pos == length);
    }
}

TEST_CASE("normalize_sequence maps axis extremes to 0 and 1") {
    auto seq = make_sequence(2);
    for (auto& f : seq.frames)
        for (auto& p : f.joints) p = Vec3{0, 0, 0};
    seq.frames[0].joints[0].x = -1.0;
    seq.frames[1].joints[1].x = 1.0;
    // give y and z some spread too
    seq.frames[0].joints[2].y = 1.0;
    seq.frames[0].joints[3].z = 2.0;
    const auto out = normalize_sequence(seq);
    CHECK(out.frames[0].joints[0].x == 0.0);
    CHECK(out.frames[1].joints[1].x == 1.0);
    CHECK(out.frames[0].joints[5].x == Catch::Approx(0.5));  // 0 maps to midpoint
}

TEST_CASE("normalize_sequence maps constant axes to 0.5") {
    auto seq = make_sequence(3);
    for (auto& f : seq.frames)
        for (auto& p : f.joints) p = Vec3{0.7, 0.7, 0.7};
    const auto out = normalize_sequence(seq);
    for (const auto& f : out.frames)
        for (const auto& p : f.joints) CHECK(p == Vec3{0.5, 0.5, 0.5});
}

TEST_CASE("normalize_sequence midpoint example") {
    // y spanning [0.2, 0.7]: 0.45 -> 0.5 by (v - min)/(max - min)
    auto seq = make_sequence(1);
    for (auto& p : seq.frames[0].joints) p = Vec3{0, 0.2, 0};
    seq.frames[0].joints[1].y = 0.7;
    seq.frames[0].joints[2].y = 0.45;
    seq.frames[0].joints[3].x = 1.0;
    seq.frames[0].joints[4].z = 1.0;
    const auto out = normalize_sequence(seq);
    CHECK(out.frames[0].joints[2].y == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("normalize_sequence output in [0,1] and idempotent") {
    Rng rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        const auto seq = random_sequence(rng, 25);
        const auto once = normalize_sequence(seq);
        for (const auto& f : once.frames)
            for (const auto& p : f.joints) {
                REQUIRE(p.x >= 0.0); REQUIRE(p.x <= 1.0);
                REQUIRE(p.y >= 0.0); REQUIRE(p.y <= 1.0);
                REQUIRE(p.z >= 0.0); REQUIRE(p.z <= 1.0);
            }
        const auto twice = normalize_sequence(once);
        for (std::size_t t = 0; t < once.frames.size(); ++t)
            for (int j = 0; j < kJointCount; ++j) {
                REQUIRE(std::abs(twice.frames[t].joints[j].x - once.frames[t].joints[j].x) < 1e-12);
                REQUIRE(std::abs(twice.frames[t].joints[j].y - once.frames[t].joints[j].y) < 1e-12);
                REQUIRE(std::abs(twice.frames[t].joints[j].z - once.frames[t].joints[j].z) < 1e-12);
            }
    }
}

TEST_CASE("circular_mean_deg handles wraparound") {
    CHECK(circular_mean_deg({350.0, 10.0}) == Catch::Approx(0.0).margin(1e-9));
    CHECK(circular_mean_deg({190.0, 210.0}) == Catch::Approx(200.0).margin(1e-9));
    CHECK(routing_angle_deg(ViewDescriptor::fixed_view(3)) == 135.0);
}
