#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "vscnn/nn.hpp"
#include "vscnn/view_groups.hpp"

namespace vscnn {

/// Post-softmax action score vector of one channel.
using ChannelScores = std::vector<double>;

inline std::vector<double> one_hot(int label, int n_classes) {
    if (label < 0 || label >= n_classes) throw std::invalid_argument("one_hot: label out of range");
    std::vector<double> y(n_classes, 0.0);
    y[label] = 1.0;
    return y;
}

/// Feature-learning channel: a compact convolutional backbone (3x3 conv +
/// rectification + 2x2 average downsampling per block), global average
/// pooling, and a linear action classifier. Block widths are configurable;
/// the four channels share this architecture but never share parameters.
class ChannelNet {
public:
    ChannelNet(int in_channels, const std::vector<int>& widths, int n_classes)
        : n_classes_(n_classes), fc_(widths.empty() ? in_channels : widths.back(), n_classes) {
        int c = in_channels;
        for (int w : widths) {
            convs_.emplace_back(c, w, 1);
            c = w;
        }
        relus_.resize(convs_.size());
        pools_.resize(convs_.size());
    }

    void init(Rng& rng) {
        for (auto& conv : convs_) conv.init(rng);
        fc_.init(rng);
    }

    std::vector<double> forward_logits(const nn::Tensor& x) {
        nn::Tensor h = x;
        for (std::size_t i = 0; i < convs_.size(); ++i)
            h = pools_[i].forward(relus_[i].forward(convs_[i].forward(h)));
        return fc_.forward(gap_.forward(h));
    }

    void backward_logits(const std::vector<double>& dlogits) {
        auto d = gap_.backward(fc_.backward(dlogits));
        for (std::size_t i = convs_.size(); i-- > 0;)
            d = convs_[i].backward(relus_[i].backward(pools_[i].backward(d)));
    }

    std::vector<nn::ParamBlock> params(const std::string& prefix) {
        std::vector<nn::ParamBlock> out;
        for (std::size_t i = 0; i < convs_.size(); ++i)
            convs_[i].collect_params(prefix + ".conv" + std::to_string(i + 1), out);
        fc_.collect_params(prefix + ".fc", out);
        return out;
    }

    int n_classes() const { return n_classes_; }

private:
    int n_classes_;
    std::vector<nn::Conv2d> convs_;
    std::vector<nn::Relu> relus_;
    std::vector<nn::AvgPool2> pools_;
    nn::GlobalAvgPool gap_;
    nn::Linear fc_;
};

/// Channel prediction: softmax over the channel's action logits.
inline ChannelScores channel_forward(const nn::Tensor& x, ChannelNet& net) {
    return nn::softmax(net.forward_logits(x));
}

/// Cross entropy of a channel's score vector against the action target.
inline double channel_loss(const ChannelScores& scores, const std::vector<double>& target) {
    if (scores.size() != target.size()) throw std::invalid_argument("channel_loss: size mismatch");
    return nn::cross_entropy(scores, target);
}

/// Training-time routing: ground-truth view-group membership of the sample's
/// view angle (fixed views use their nominal angle, varying clips their
/// circular mean). One or two 1-based channel ids.
inline std::vector<int> route_training(const ViewDescriptor& view) {
    return group_membership(routing_angle_deg(view));
}

/// Test-time routing: channel of the highest group score, ties broken toward
/// the lowest index. 1-based.
inline int route_test(const GroupScore& z) {
    return nn::argmax(z) + 1;
}

}  // namespace vscnn
