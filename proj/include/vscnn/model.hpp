#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "vscnn/channels.hpp"
#include "vscnn/encoder.hpp"
#include "vscnn/fusion.hpp"
#include "vscnn/view_groups.hpp"

namespace vscnn {

struct ModelDims {
    int in_channels = kImageChannels;
    int joints = kJointCount;
    int frames = kDefaultSampleFrames;
    int n_classes = kActionClassCount;
    std::vector<int> channel_widths = {32, 64, 128, 256};

    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

inline nlohmann::json to_json(const ModelDims& d) {
    return nlohmann::json{{"in_channels", d.in_channels},
                          {"joints", d.joints},
                          {"frames", d.frames},
                          {"n_classes", d.n_classes},
                          {"channel_widths", d.channel_widths}};
}

inline ModelDims model_dims_from_json(const nlohmann::json& j) {
    ModelDims d;
    d.in_channels = j.at("in_channels").get<int>();
    d.joints = j.at("joints").get<int>();
    d.frames = j.at("frames").get<int>();
    d.n_classes = j.at("n_classes").get<int>();
    d.channel_widths = j.at("channel_widths").get<std::vector<int>>();
    return d;
}

/// Full VS-CNN parameter state: view-group predictor, four feature-learning
/// channels, and the fusion classifier.
struct ModelState {
    ModelDims dims;
    PredictorNet predictor;
    std::array<ChannelNet, kGroupCount> channels;
    FusionLayer fusion;
    std::string stage = "init";  // init | predictor | channels | e2e | single-channel

    explicit ModelState(const ModelDims& d = {})
        : dims(d),
          predictor(d.in_channels),
          channels{ChannelNet(d.in_channels, d.channel_widths, d.n_classes),
                   ChannelNet(d.in_channels, d.channel_widths, d.n_classes),
                   ChannelNet(d.in_channels, d.channel_widths, d.n_classes),
                   ChannelNet(d.in_channels, d.channel_widths, d.n_classes)},
          fusion(d.n_classes) {}

    void init(Rng& rng) {
        predictor.init(rng);
        for (auto& ch : channels) ch.init(rng);
        fusion.init(rng);
        stage = "init";
    }

    /// All named parameter blocks, in a fixed order.
    std::vector<nn::ParamBlock> params() {
        auto out = predictor.params();
        for (int i = 0; i < kGroupCount; ++i) {
            auto ch = channels[i].params("channel" + std::to_string(i + 1));
            out.insert(out.end(), ch.begin(), ch.end());
        }
        auto f = fusion.params();
        out.insert(out.end(), f.begin(), f.end());
        return out;
    }
};

struct InferResult {
    int action = 0;
    GroupScore z{};
    FusionWeights alpha{};
    int routed_channel = 0;  // argmax-z channel, 1-based
    std::vector<double> yhat;
    std::array<ChannelScores, kGroupCount> channel_scores;
};

/// Full inference path: predictor scores -> fusion weights -> all four
/// channels -> weighted fusion -> argmax action.
inline InferResult infer_tensor(const nn::Tensor& x, ModelState& model,
                                FusionWeightSign sign = FusionWeightSign::literal) {
    InferResult r;
    r.z = model.predictor.forward(x);
    r.alpha = fusion_weights(r.z, sign);
    r.routed_channel = route_test(r.z);
    for (int i = 0; i < kGroupCount; ++i) r.channel_scores[i] = channel_forward(x, model.channels[i]);
    r.yhat = fuse_predict(r.channel_scores, r.alpha, model.fusion);
    r.action = nn::argmax(r.yhat);
    return r;
}

inline InferResult infer(const SkeletonImage& img, ModelState& model,
                         FusionWeightSign sign = FusionWeightSign::literal) {
    return infer_tensor(image_to_tensor(img), model, sign);
}

}  // namespace vscnn
