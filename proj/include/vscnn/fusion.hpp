#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "vscnn/channels.hpp"
#include "vscnn/nn.hpp"
#include "vscnn/view_groups.hpp"

namespace vscnn {

/// Final classifier: a fully connected layer over the alpha-weighted sum of
/// the four channel score vectors, followed by softmax.
class FusionLayer {
public:
    explicit FusionLayer(int n_classes) : n_classes_(n_classes), fc_(n_classes, n_classes) {}

    void init(Rng& rng) { fc_.init(rng); }

    std::vector<double> forward_logits(const std::vector<double>& weighted_sum) {
        return fc_.forward(weighted_sum);
    }

    std::vector<double> backward_logits(const std::vector<double>& dlogits) {
        return fc_.backward(dlogits);
    }

    std::vector<nn::ParamBlock> params() {
        std::vector<nn::ParamBlock> out;
        fc_.collect_params("fusion.fc", out);
        return out;
    }

    int n_classes() const { return n_classes_; }

private:
    int n_classes_;
    nn::Linear fc_;
};

/// Weighted sum of the four channel score vectors.
inline std::vector<double> weighted_score_sum(const std::array<ChannelScores, kGroupCount>& scores,
                                              const FusionWeights& alpha) {
    const std::size_t n = scores[0].size();
    for (const auto& s : scores)
        if (s.size() != n) throw std::invalid_argument("weighted_score_sum: score size mismatch");
    std::vector<double> sum(n, 0.0);
    for (int i = 0; i < kGroupCount; ++i) {
        if (alpha[i] == 0.0) continue;  // keeps alpha=(1,0,0,0) exact
        for (std::size_t j = 0; j < n; ++j) sum[j] += alpha[i] * scores[i][j];
    }
    return sum;
}

/// Final action distribution: softmax(fc(sum_i alpha_i * yhat_i)).
inline std::vector<double> fuse_predict(const std::array<ChannelScores, kGroupCount>& scores,
                                        const FusionWeights& alpha, FusionLayer& fusion) {
    return nn::softmax(fusion.forward_logits(weighted_score_sum(scores, alpha)));
}

/// Cross entropy of the fused distribution against the action target.
inline double fusion_loss(const std::vector<double>& yhat, const std::vector<double>& target) {
    if (yhat.size() != target.size()) throw std::invalid_argument("fusion_loss: size mismatch");
    return nn::cross_entropy(yhat, target);
}

}  // namespace vscnn
