#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "finite_diff.hpp"
#include "vscnn/rng.hpp"
#include "vscnn/view_groups.hpp"

using namespace vscnn;

TEST_CASE("partition covers all viewpoints with the right overlaps") {
    std::set<int> covered;
    for (const auto& group : GroupPartition::members) {
        CHECK(group.size() == 3);
        for (int v : group) covered.insert(v);
    }
    CHECK(covered.size() == 8);

    // adjacent groups share exactly one viewpoint: FV, V2, V4, V6
    const std::array<int, 4> shared = {2, 4, 6, 0};
    for (int g = 0; g < 4; ++g) {
        const auto& a = GroupPartition::members[g];
        const auto& b = GroupPartition::members[(g + 1) % 4];
        std::vector<int> common;
        for (int v : a)
            if (std::find(b.begin(), b.end(), v) != b.end()) common.push_back(v);
        REQUIRE(common.size() == 1);
        CHECK(common[0] == shared[g]);
    }
}

TEST_CASE("group_membership at the named angles") {
    CHECK(group_membership(0.0) == std::vector<int>{1, 4});
    CHECK(group_membership(90.0) == std::vector<int>{1, 2});
    CHECK(group_membership(180.0) == std::vector<int>{2, 3});
    CHECK(group_membership(270.0) == std::vector<int>{3, 4});
    CHECK(group_membership(160.0) == std::vector<int>{2});
    CHECK(group_membership(45.0) == std::vector<int>{1});
    CHECK(group_membership(315.0) == std::vector<int>{4});
}

TEST_CASE("group_membership covers every angle with 1 or 2 groups") {
    int doubles = 0;
    for (int i = 0; i < 3600; ++i) {
        const double a = i * 0.1;
        const auto m = group_membership(a);
        REQUIRE(m.size() >= 1);
        REQUIRE(m.size() <= 2);
        if (m.size() == 2) ++doubles;
    }
    CHECK(doubles == 4);  // exactly 0, 90, 180, 270 on this grid
}

TEST_CASE("fixed views map to the expected groups") {
    // multiples of 45 degrees: boundary views get 2 groups, others 1
    for (int v = 0; v < 8; ++v) {
        const auto m = group_membership(45.0 * v);
        if (v % 2 == 0)
            CHECK(m.size() == 2);
        else
            CHECK(m.size() == 1);
    }
}

TEST_CASE("group_target examples") {
    CHECK(group_target(45.0) == GroupTarget{1, 0, 0, 0});
    CHECK(group_target(90.0) == GroupTarget{0.5, 0.5, 0, 0});
    CHECK(group_target(270.0) == GroupTarget{0, 0, 0.5, 0.5});
}

TEST_CASE("fusion_weights on zero scores is uniform") {
    const auto a = fusion_weights(GroupScore{0, 0, 0, 0});
    for (double v : a) CHECK(v == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("fusion_weights literal mode matches e^{-z} normalization") {
    const auto a = fusion_weights(GroupScore{1, 0, 0, 0}, FusionWeightSign::literal);
    const double e = std::exp(-1.0);
    const double sum = e + 3.0;
    CHECK(a[0] == Catch::Approx(e / sum).margin(1e-12));
    CHECK(a[1] == Catch::Approx(1.0 / sum).margin(1e-12));
    // values quoted from evaluating the formula directly
    CHECK(a[0] == Catch::Approx(0.1092).margin(1e-4));
    CHECK(a[1] == Catch::Approx(0.2969).margin(1e-4));
}

TEST_CASE("fusion_weights is shift invariant") {
    Rng rng(41);
    for (int rep = 0; rep < 30; ++rep) {
        GroupScore z{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        GroupScore shifted = z;
        const double c = rng.uniform(-100, 100);
        for (auto& v : shifted) v += c;
        for (auto sign : {FusionWeightSign::literal, FusionWeightSign::corrected}) {
            const auto a = fusion_weights(z, sign);
            const auto b = fusion_weights(shifted, sign);
            for (int i = 0; i < 4; ++i) REQUIRE(a[i] == Catch::Approx(b[i]).margin(1e-12));
        }
    }
}

TEST_CASE("fusion_weights stays a simplex point at extreme scores") {
    Rng rng(42);
    for (int rep = 0; rep < 50; ++rep) {
        GroupScore z;
        for (auto& v : z) v = rng.uniform(-1000.0, 1000.0);
        for (auto sign : {FusionWeightSign::literal, FusionWeightSign::corrected}) {
            const auto a = fusion_weights(z, sign);
            double sum = 0.0;
            for (double v : a) {
                REQUIRE(std::isfinite(v));
                REQUIRE(v >= 0.0);
                sum += v;
            }
            REQUIRE(sum == Catch::Approx(1.0).margin(1e-6));
        }
    }
}

TEST_CASE("argmax of the weights follows the mode") {
    Rng rng(43);
    for (int rep = 0; rep < 30; ++rep) {
        GroupScore z;
        for (auto& v : z) v = rng.uniform(-3, 3);
        const int zmax = nn::argmax(z);
        const int zmin = static_cast<int>(std::min_element(z.begin(), z.end()) - z.begin());
        CHECK(nn::argmax(fusion_weights(z, FusionWeightSign::corrected)) == zmax);
        CHECK(nn::argmax(fusion_weights(z, FusionWeightSign::literal)) == zmin);
    }
}

TEST_CASE("group_loss values") {
    // uniform softmax, one-hot target -> log 4
    CHECK(group_loss(GroupScore{0, 0, 0, 0}, GroupTarget{1, 0, 0, 0}) ==
          Catch::Approx(std::log(4.0)).margin(1e-12));
    // overlap target, uniform softmax -> log 4 as well
    CHECK(group_loss(GroupScore{0, 0, 0, 0}, GroupTarget{0.5, 0.5, 0, 0}) ==
          Catch::Approx(std::log(4.0)).margin(1e-12));
    // near-perfect prediction -> loss near 0
    CHECK(group_loss(GroupScore{50, 0, 0, 0}, GroupTarget{1, 0, 0, 0}) < 1e-12);
    // non-negative on random inputs
    Rng rng(44);
    for (int rep = 0; rep < 30; ++rep) {
        GroupScore z;
        for (auto& v : z) v = rng.uniform(-10, 10);
        REQUIRE(group_loss(z, group_target(rng.uniform(0, 360))) >= 0.0);
    }
}

TEST_CASE("group_loss gradient is softmax minus target") {
    Rng rng(45);
    for (int rep = 0; rep < 20; ++rep) {
        GroupScore z;
        for (auto& v : z) v = rng.uniform(-2, 2);
        const GroupTarget y = group_target(rng.uniform(0, 360));
        const auto g = group_loss_grad(z, y);
        const auto p = nn::softmax(z);
        for (int i = 0; i < 4; ++i) REQUIRE(g[i] == Catch::Approx(p[i] - y[i]).margin(1e-12));

        for (int i = 0; i < 4; ++i) {
            GroupScore zp = z, zm = z;
            zp[i] += 1e-6;
            zm[i] -= 1e-6;
            const double numeric = (group_loss(zp, y) - group_loss(zm, y)) / 2e-6;
            const double denom = std::max({std::abs(numeric), std::abs(g[i]), 1e-4});
            REQUIRE(std::abs(numeric - g[i]) / denom < 1e-4);
        }
    }
}

TEST_CASE("predictor with zeroed classifier outputs the bias") {
    Rng rng(46);
    PredictorNet net;
    net.init(rng);
    auto blocks = net.params();
    // zero the classifier weights, set a known bias
    for (auto& b : blocks) {
        if (b.name == "predictor.fc.w") std::fill(b.value->begin(), b.value->end(), 0.0);
        if (b.name == "predictor.fc.b") {
            (*b.value)[0] = 0.1;
            (*b.value)[1] = -0.2;
            (*b.value)[2] = 0.3;
            (*b.value)[3] = 0.4;
        }
    }
    nn::Tensor x(kImageChannels, 25, 40);
    const auto z = net.forward(x);
    CHECK(z[0] == Catch::Approx(0.1));
    CHECK(z[1] == Catch::Approx(-0.2));
    CHECK(z[2] == Catch::Approx(0.3));
    CHECK(z[3] == Catch::Approx(0.4));
}

TEST_CASE("predictor is deterministic") {
    Rng rng(47);
    PredictorNet net;
    net.init(rng);
    nn::Tensor x(kImageChannels, 25, 40);
    for (auto& v : x.v) v = rng.uniform();
    const auto z1 = net.forward(x);
    const auto z2 = net.forward(x);
    CHECK(z1 == z2);
}

TEST_CASE("predictor gradients match finite differences") {
    Rng rng(48);
    PredictorNet net(2);
    net.init(rng);
    nn::Tensor x(2, 6, 7);
    for (auto& v : x.v) v = rng.uniform();
    const GroupTarget y = group_target(90.0);

    const auto loss = [&]() { return group_loss(net.forward(x), y); };
    auto blocks = net.params();
    nn::zero_grads(blocks);
    net.backward(group_loss_grad(net.forward(x), y));

    const auto r = testutil::finite_diff_check(blocks, loss, 1e-5, 3);
    INFO(r.worst_block << "[" << r.worst_index << "] analytic=" << r.analytic
                       << " numeric=" << r.numeric);
    CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("fusion_weights_backward matches finite differences") {
    Rng rng(49);
    for (auto sign : {FusionWeightSign::literal, FusionWeightSign::corrected}) {
        GroupScore z;
        for (auto& v : z) v = rng.uniform(-2, 2);
        GroupScore dalpha;
        for (auto& v : dalpha) v = rng.uniform(-1, 1);

        const auto alpha = fusion_weights(z, sign);
        const auto dz = fusion_weights_backward(alpha, dalpha, sign);

        for (int i = 0; i < 4; ++i) {
            GroupScore zp = z, zm = z;
            zp[i] += 1e-6;
            zm[i] -= 1e-6;
            const auto ap = fusion_weights(zp, sign);
            const auto am = fusion_weights(zm, sign);
            double fp = 0.0, fm = 0.0;
            for (int j = 0; j < 4; ++j) {
                fp += dalpha[j] * ap[j];
                fm += dalpha[j] * am[j];
            }
            CHECK(dz[i] == Catch::Approx((fp - fm) / 2e-6).margin(1e-7));
        }
    }
}
