#include <catch_amalgamated.hpp>

#include <cmath>

#include "finite_diff.hpp"
#include "vscnn/nn.hpp"
#include "vscnn/rng.hpp"

using namespace vscnn;
using nn::Tensor;

namespace {

Tensor random_tensor(int c, int h, int w, Rng& rng) {
    Tensor t(c, h, w);
    for (auto& v : t.v) v = rng.uniform(-1.0, 1.0);
    return t;
}

// direct 3x3 convolution, pad 1: the oracle the GEMM path is checked against
Tensor naive_conv(const Tensor& x, const std::vector<double>& w, const std::vector<double>& b,
                  int out_c, int stride) {
    const int oh = nn::conv_out_dim(x.h, stride);
    const int ow = nn::conv_out_dim(x.w, stride);
    Tensor y(out_c, oh, ow);
    for (int co = 0; co < out_c; ++co)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = b[co];
                for (int ci = 0; ci < x.c; ++ci)
                    for (int ky = 0; ky < 3; ++ky)
                        for (int kx = 0; kx < 3; ++kx) {
                            const int iy = oy * stride + ky - 1;
                            const int ix = ox * stride + kx - 1;
                            if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                            acc += w[((co * x.c + ci) * 3 + ky) * 3 + kx] * x.at(ci, iy, ix);
                        }
                y.at(co, oy, ox) = acc;
            }
    return y;
}

}  // namespace

TEST_CASE("Conv2d forward matches the direct convolution oracle") {
    Rng rng(31);
    for (int stride : {1, 2}) {
        nn::Conv2d conv(3, 5, stride);
        conv.init(rng);
        std::vector<nn::ParamBlock> blocks;
        conv.collect_params("conv", blocks);

        const Tensor x = random_tensor(3, 7, 9, rng);
        const Tensor y = conv.forward(x);
        const Tensor expect = naive_conv(x, *blocks[0].value, *blocks[1].value, 5, stride);
        REQUIRE(y.c == expect.c);
        REQUIRE(y.h == expect.h);
        REQUIRE(y.w == expect.w);
        for (std::size_t i = 0; i < y.v.size(); ++i)
            REQUIRE(y.v[i] == Catch::Approx(expect.v[i]).margin(1e-12));
    }
}

TEST_CASE("Conv2d gradients match finite differences") {
    Rng rng(32);
    nn::Conv2d conv(2, 3, 1);
    conv.init(rng);
    const Tensor x = random_tensor(2, 5, 6, rng);

    // scalar loss: weighted sum of outputs (fixed random projection)
    std::vector<double> proj;
    {
        const Tensor probe = conv.forward(x);
        for (std::size_t i = 0; i < probe.size(); ++i) proj.push_back(rng.uniform(-1, 1));
    }
    const auto loss = [&]() {
        Tensor y = conv.forward(x);
        double l = 0.0;
        for (std::size_t i = 0; i < y.v.size(); ++i) l += proj[i] * y.v[i];
        return l;
    };

    std::vector<nn::ParamBlock> blocks;
    conv.collect_params("conv", blocks);
    nn::zero_grads(blocks);
    Tensor y = conv.forward(x);
    Tensor dy(y.c, y.h, y.w);
    for (std::size_t i = 0; i < dy.v.size(); ++i) dy.v[i] = proj[i];
    const Tensor dx = conv.backward(dy);

    const auto r = testutil::finite_diff_check(blocks, loss);
    INFO(r.worst_block << "[" << r.worst_index << "] analytic=" << r.analytic
                       << " numeric=" << r.numeric);
    CHECK(r.max_rel_error < 1e-6);

    // input gradient via the same oracle
    double max_rel = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Tensor xp = x;
        xp.v[i] += 1e-5;
        Tensor xm = x;
        xm.v[i] -= 1e-5;
        double lp = 0.0, lm = 0.0;
        {
            Tensor yp = conv.forward(xp);
            for (std::size_t k = 0; k < yp.v.size(); ++k) lp += proj[k] * yp.v[k];
            Tensor ym = conv.forward(xm);
            for (std::size_t k = 0; k < ym.v.size(); ++k) lm += proj[k] * ym.v[k];
        }
        const double numeric = (lp - lm) / 2e-5;
        const double denom = std::max({std::abs(numeric), std::abs(dx.v[i]), 1e-8});
        max_rel = std::max(max_rel, std::abs(numeric - dx.v[i]) / denom);
    }
    CHECK(max_rel < 1e-6);
}

TEST_CASE("pooling and linear layers backprop correctly") {
    Rng rng(33);
    nn::Conv2d conv(2, 4, 1);
    nn::Relu relu;
    nn::AvgPool2 pool;
    nn::GlobalAvgPool gap;
    nn::Linear fc(4, 3);
    conv.init(rng);
    fc.init(rng);

    const Tensor x = random_tensor(2, 6, 8, rng);
    std::vector<double> target = {0.2, 0.5, 0.3};

    const auto loss = [&]() {
        auto h = pool.forward(relu.forward(conv.forward(x)));
        const auto logits = fc.forward(gap.forward(h));
        return nn::cross_entropy_logits(logits, target);
    };

    std::vector<nn::ParamBlock> blocks;
    conv.collect_params("conv", blocks);
    fc.collect_params("fc", blocks);
    nn::zero_grads(blocks);
    {
        auto h = pool.forward(relu.forward(conv.forward(x)));
        const auto logits = fc.forward(gap.forward(h));
        const auto dlogits = nn::cross_entropy_logits_grad(logits, target);
        auto d = gap.backward(fc.backward(dlogits));
        (void)conv.backward(relu.backward(pool.backward(d)));
    }

    const auto r = testutil::finite_diff_check(blocks, loss);
    INFO(r.worst_block << "[" << r.worst_index << "]");
    CHECK(r.max_rel_error < 1e-5);
}

TEST_CASE("softmax is a shift-invariant distribution") {
    Rng rng(34);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> z(6);
        for (auto& v : z) v = rng.uniform(-30, 30);
        const auto p = nn::softmax(z);
        double sum = 0.0;
        for (double v : p) {
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));

        auto shifted = z;
        for (auto& v : shifted) v += 123.456;
        const auto q = nn::softmax(shifted);
        for (std::size_t i = 0; i < p.size(); ++i) REQUIRE(p[i] == Catch::Approx(q[i]).margin(1e-12));
    }
}

TEST_CASE("cross entropy gradient equals softmax minus target") {
    Rng rng(35);
    std::vector<double> z(5), y = {0.0, 0.5, 0.0, 0.5, 0.0};
    for (auto& v : z) v = rng.uniform(-2, 2);

    const auto grad = nn::cross_entropy_logits_grad(z, y);
    const auto p = nn::softmax(z);
    for (std::size_t i = 0; i < z.size(); ++i)
        CHECK(grad[i] == Catch::Approx(p[i] - y[i]).margin(1e-14));

    // finite differences on the loss itself
    for (std::size_t i = 0; i < z.size(); ++i) {
        auto zp = z, zm = z;
        zp[i] += 1e-6;
        zm[i] -= 1e-6;
        const double numeric =
            (nn::cross_entropy_logits(zp, y) - nn::cross_entropy_logits(zm, y)) / 2e-6;
        CHECK(grad[i] == Catch::Approx(numeric).margin(1e-7));
    }
}

TEST_CASE("cross entropy agrees between logit and probability forms") {
    Rng rng(36);
    std::vector<double> z(7), y(7, 0.0);
    for (auto& v : z) v = rng.uniform(-3, 3);
    y[2] = 1.0;
    const double a = nn::cross_entropy_logits(z, y);
    const double b = nn::cross_entropy(nn::softmax(z), y);
    CHECK(a == Catch::Approx(b).margin(1e-12));
}

TEST_CASE("softmax_backward matches the Jacobian product") {
    Rng rng(37);
    std::vector<double> z(4), dp(4);
    for (auto& v : z) v = rng.uniform(-1, 1);
    for (auto& v : dp) v = rng.uniform(-1, 1);
    const auto p = nn::softmax(z);
    const auto dz = nn::softmax_backward(p, dp);

    // numeric: d/dz_i of sum_j dp_j * softmax_j(z)
    for (std::size_t i = 0; i < z.size(); ++i) {
        auto zp = z, zm = z;
        zp[i] += 1e-6;
        zm[i] -= 1e-6;
        const auto pp = nn::softmax(zp);
        const auto pm = nn::softmax(zm);
        double fp = 0.0, fm = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            fp += dp[j] * pp[j];
            fm += dp[j] * pm[j];
        }
        CHECK(dz[i] == Catch::Approx((fp - fm) / 2e-6).margin(1e-7));
    }
}

TEST_CASE("argmax breaks ties toward the lowest index") {
    CHECK(nn::argmax(std::vector<double>{0.5, 0.5, 0.1}) == 0);
    CHECK(nn::argmax(std::vector<double>{-3, -1, -2, -5}) == 1);
}
