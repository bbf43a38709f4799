#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vscnn/encoder.hpp"
#include "vscnn/nn.hpp"
#include "vscnn/skeleton.hpp"

namespace vscnn {

inline constexpr int kGroupCount = 4;

using GroupScore = std::array<double, kGroupCount>;    // predictor logits z
using FusionWeights = std::array<double, kGroupCount>; // simplex weights alpha
using GroupTarget = std::array<double, kGroupCount>;   // ground-truth distribution

/// The four overlapping view groups. Group ids are 1-based; adjacent groups
/// share one viewpoint (FV, V2, V4, V6).
struct GroupPartition {
    // fixed-view indices per group: G1={FV,V1,V2}, G2={V2,V3,V4},
    // G3={V4,V5,V6}, G4={V6,V7,FV}
    static constexpr std::array<std::array<int, 3>, kGroupCount> members = {{
        {0, 1, 2}, {2, 3, 4}, {4, 5, 6}, {6, 7, 0}}};
    // closed angle ranges in degrees; group 4 wraps through 0
    static constexpr std::array<std::array<double, 2>, kGroupCount> angle_ranges = {{
        {0.0, 90.0}, {90.0, 180.0}, {180.0, 270.0}, {270.0, 360.0}}};
};

/// Groups whose closed angle range contains the angle; the four boundary
/// angles (0, 90, 180, 270) belong to two groups. 1-based ids, ascending.
inline std::vector<int> group_membership(double angle_deg) {
    const double a = wrap_angle_deg(angle_deg);
    std::vector<int> groups;
    if (a >= 0.0 && a <= 90.0) groups.push_back(1);
    if (a >= 90.0 && a <= 180.0) groups.push_back(2);
    if (a >= 180.0 && a <= 270.0) groups.push_back(3);
    if (a >= 270.0 || a == 0.0) groups.push_back(4);
    return groups;
}

/// Uniform distribution over group_membership(angle): one-hot away from the
/// shared viewpoints, 0.5/0.5 on them.
inline GroupTarget group_target(double angle_deg) {
    const auto groups = group_membership(angle_deg);
    GroupTarget y{};
    const double p = 1.0 / static_cast<double>(groups.size());
    for (int g : groups) y[g - 1] = p;
    return y;
}

enum class FusionWeightSign {
    literal,   // alpha_i = exp(-z_i)/sum exp(-z_j), as printed
    corrected, // alpha_i = exp(+z_i)/sum exp(+z_j)
};

/// Fusion weights from group scores. Max-subtracted, so any finite z
/// (including |z_i| ~ 1e3) yields a valid simplex point.
inline FusionWeights fusion_weights(const GroupScore& z,
                                    FusionWeightSign sign = FusionWeightSign::literal) {
    const double s = sign == FusionWeightSign::literal ? -1.0 : 1.0;
    GroupScore u;
    for (int i = 0; i < kGroupCount; ++i) u[i] = s * z[i];
    const double m = *std::max_element(u.begin(), u.end());
    FusionWeights a{};
    double sum = 0.0;
    for (int i = 0; i < kGroupCount; ++i) {
        a[i] = std::exp(u[i] - m);
        sum += a[i];
    }
    for (auto& x : a) x /= sum;
    return a;
}

/// Backprop through fusion_weights: given alpha and dL/dalpha, returns dL/dz.
inline GroupScore fusion_weights_backward(const FusionWeights& alpha, const GroupScore& dalpha,
                                          FusionWeightSign sign) {
    const double s = sign == FusionWeightSign::literal ? -1.0 : 1.0;
    double dot = 0.0;
    for (int i = 0; i < kGroupCount; ++i) dot += dalpha[i] * alpha[i];
    GroupScore dz;
    for (int i = 0; i < kGroupCount; ++i) dz[i] = s * alpha[i] * (dalpha[i] - dot);
    return dz;
}

/// Group prediction loss: cross entropy of softmax(z) against the group
/// target distribution.
inline double group_loss(const GroupScore& z, const GroupTarget& y) {
    return nn::cross_entropy_logits(z, y);
}

/// Gradient of group_loss w.r.t. z: softmax(z) - y.
inline GroupScore group_loss_grad(const GroupScore& z, const GroupTarget& y) {
    const auto g = nn::cross_entropy_logits_grad(z, y);
    GroupScore out;
    std::copy(g.begin(), g.end(), out.begin());
    return out;
}

/// View-group predictor: three conv layers (16/32 stride 1, 32 stride 2),
/// rectified, then global average pooling and a linear map to 4 logits.
class PredictorNet {
public:
    explicit PredictorNet(int in_channels = kImageChannels)
        : conv1_(in_channels, 16, 1), conv2_(16, 32, 1), conv3_(32, 32, 2), fc_(32, kGroupCount) {}

    void init(Rng& rng) {
        conv1_.init(rng);
        conv2_.init(rng);
        conv3_.init(rng);
        fc_.init(rng);
    }

    GroupScore forward(const nn::Tensor& x) {
        auto h = relu1_.forward(conv1_.forward(x));
        h = relu2_.forward(conv2_.forward(h));
        h = relu3_.forward(conv3_.forward(h));
        const auto pooled = gap_.forward(h);
        const auto logits = fc_.forward(pooled);
        GroupScore z;
        std::copy(logits.begin(), logits.end(), z.begin());
        return z;
    }

    /// Backward from dL/dz through the whole stack; accumulates parameter grads.
    void backward(const GroupScore& dz) {
        const std::vector<double> dzv(dz.begin(), dz.end());
        auto d = gap_.backward(fc_.backward(dzv));
        d = conv3_.backward(relu3_.backward(d));
        d = conv2_.backward(relu2_.backward(d));
        (void)conv1_.backward(relu1_.backward(d));
    }

    std::vector<nn::ParamBlock> params() {
        std::vector<nn::ParamBlock> out;
        conv1_.collect_params("predictor.conv1", out);
        conv2_.collect_params("predictor.conv2", out);
        conv3_.collect_params("predictor.conv3", out);
        fc_.collect_params("predictor.fc", out);
        return out;
    }

private:
    nn::Conv2d conv1_, conv2_, conv3_;
    nn::Relu relu1_, relu2_, relu3_;
    nn::GlobalAvgPool gap_;
    nn::Linear fc_;
};

/// Tensor layout expected by the networks: (channel, joint, frame).
inline nn::Tensor image_to_tensor(const SkeletonImage& img) {
    nn::Tensor t(kImageChannels, img.joints, img.frames);
    for (int j = 0; j < img.joints; ++j)
        for (int f = 0; f < img.frames; ++f)
            for (int c = 0; c < kImageChannels; ++c)
                t.at(c, j, f) = img.at(j, f, c);
    return t;
}

inline GroupScore predict_groups(const SkeletonImage& img, PredictorNet& net) {
    return net.forward(image_to_tensor(img));
}

}  // namespace vscnn
