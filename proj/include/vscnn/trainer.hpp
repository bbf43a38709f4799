#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vscnn/dataset.hpp"
#include "vscnn/encoder.hpp"
#include "vscnn/model.hpp"

namespace vscnn {

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    int epochs_step1 = 30;
    int epochs_step2 = 50;
    int epochs_step3 = 20;
    std::uint64_t seed = 1;
    FusionWeightSign fusion_weight_sign = FusionWeightSign::literal;
    bool single_channel_mode = false;
    int frames = kDefaultSampleFrames;  // encoder sample length
    int n_sections = 10;                // orbit clipping when loading varying-view data
    int n_classes = kActionClassCount;
    std::vector<int> channel_widths = {32, 64, 128, 256};

    void validate() const {
        if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("TrainConfig: momentum out of [0,1)");
        if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        if (epochs_step1 < 1 || epochs_step2 < 1 || epochs_step3 < 1)
            throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (frames < 2) throw std::invalid_argument("TrainConfig: frames must be >= 2");
        if (n_sections < 1) throw std::invalid_argument("TrainConfig: n_sections must be >= 1");
        if (n_classes < 2) throw std::invalid_argument("TrainConfig: n_classes must be >= 2");
    }

    ModelDims dims() const {
        ModelDims d;
        d.frames = frames;
        d.n_classes = n_classes;
        d.channel_widths = channel_widths;
        return d;
    }
};

inline nlohmann::json to_json(const TrainConfig& c) {
    nlohmann::json j;
    j["learning_rate"] = c.learning_rate;
    j["momentum"] = c.momentum;
    j["batch_size"] = c.batch_size;
    j["epochs"] = {{"step1", c.epochs_step1}, {"step2", c.epochs_step2}, {"step3", c.epochs_step3}};
    j["seed"] = c.seed;
    j["fusion_weight_sign"] = c.fusion_weight_sign == FusionWeightSign::literal ? "literal" : "corrected";
    j["single_channel_mode"] = c.single_channel_mode;
    j["frames"] = c.frames;
    j["n_sections"] = c.n_sections;
    j["n_classes"] = c.n_classes;
    j["channel_widths"] = c.channel_widths;
    return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.batch_size = j.value("batch_size", c.batch_size);
    if (j.contains("epochs")) {
        const auto& e = j.at("epochs");
        c.epochs_step1 = e.value("step1", c.epochs_step1);
        c.epochs_step2 = e.value("step2", c.epochs_step2);
        c.epochs_step3 = e.value("step3", c.epochs_step3);
    }
    c.seed = j.value("seed", c.seed);
    const std::string sign = j.value("fusion_weight_sign", std::string("literal"));
    if (sign == "literal")
        c.fusion_weight_sign = FusionWeightSign::literal;
    else if (sign == "corrected")
        c.fusion_weight_sign = FusionWeightSign::corrected;
    else
        throw std::invalid_argument("fusion_weight_sign must be 'literal' or 'corrected'");
    c.single_channel_mode = j.value("single_channel_mode", c.single_channel_mode);
    c.frames = j.value("frames", c.frames);
    c.n_sections = j.value("n_sections", c.n_sections);
    c.n_classes = j.value("n_classes", c.n_classes);
    c.channel_widths = j.value("channel_widths", c.channel_widths);
    c.validate();
    return c;
}

/// FNV-1a over the canonical config dump; stored in checkpoints.
inline std::string config_hash(const TrainConfig& c) {
    const std::string s = to_json(c).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// One SGD update with momentum: v <- momentum*v + g, theta <- theta - lr*v.
/// With momentum 0 this is plain theta <- theta - lr*g.
inline void sgd_step(std::vector<double>& params, const std::vector<double>& grads,
                     std::vector<double>& velocity, double lr, double momentum) {
    if (params.size() != grads.size() || params.size() != velocity.size())
        throw std::invalid_argument("sgd_step: shape mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = momentum * velocity[i] + grads[i];
        params[i] -= lr * velocity[i];
    }
}

/// Momentum SGD over named parameter blocks.
class SgdOptimizer {
public:
    SgdOptimizer(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

    /// Applies one update; grads are pre-scaled by `grad_scale` (1/batch).
    void step(std::vector<nn::ParamBlock>& blocks, double grad_scale) {
        for (auto& b : blocks) {
            auto& v = velocity_[b.name];
            if (v.size() != b.value->size()) v.assign(b.value->size(), 0.0);
            if (grad_scale != 1.0)
                for (auto& g : *b.grad) g *= grad_scale;
            sgd_step(*b.value, *b.grad, v, lr_, momentum_);
        }
    }

private:
    double lr_, momentum_;
    std::map<std::string, std::vector<double>> velocity_;
};

/// Training/evaluation sample: encoded tensor plus routing metadata.
struct EncodedSample {
    nn::Tensor x;
    int label = 0;
    int subject_id = 0;
    double angle_deg = 0.0;  // routing angle of the clip
    bool fixed = true;
    int view_index = 0;     // fixed views only
    int section_index = 0;  // 1-based clip index for varying views, 0 otherwise
    std::string source;     // data path (+ "#N" for clips); used for disjointness checks
};

inline EncodedSample make_encoded_sample(const SkeletonSequence& seq, int frames,
                                         std::string source, int section_index = 0) {
    const SkeletonImage img = encode_sample(seq, frames);
    EncodedSample s;
    s.x = image_to_tensor(img);
    s.label = img.label;
    s.subject_id = img.subject_id;
    s.angle_deg = routing_angle_deg(img.view);
    s.fixed = img.view.is_fixed();
    s.view_index = img.view.fixed_index;
    s.section_index = section_index;
    s.source = std::move(source);
    return s;
}

/// Loads and encodes every manifest entry. Varying-view sequences are clipped
/// into n_sections clips first; orbits shorter than n_sections are skipped
/// with a warning.
inline std::vector<EncodedSample> load_encoded_samples(const std::filesystem::path& manifest_path,
                                                       int frames, int n_sections,
                                                       std::vector<std::string>* warnings = nullptr) {
    const auto entries = read_manifest(manifest_path);
    const auto dir = manifest_path.parent_path();
    std::vector<EncodedSample> samples;
    for (const auto& e : entries) {
        SkeletonSequence seq = load_sequence(dir, e);
        if (!e.varying) {
            samples.push_back(make_encoded_sample(seq, frames, e.path));
        } else {
            if (seq.frames.size() < static_cast<std::size_t>(n_sections)) {
                if (warnings)
                    warnings->push_back("skipping " + e.path + ": shorter than " +
                                        std::to_string(n_sections) + " sections");
                continue;
            }
            const auto clips = clip_sequence(seq, static_cast<std::size_t>(n_sections));
            for (std::size_t k = 0; k < clips.size(); ++k)
                samples.push_back(make_encoded_sample(clips[k], frames,
                                                      e.path + "#" + std::to_string(k + 1),
                                                      static_cast<int>(k + 1)));
        }
    }
    return samples;
}

namespace detail {

struct FusedTrace {
    GroupScore z{};
    FusionWeights alpha{};
    std::array<ChannelScores, kGroupCount> scores;
    std::vector<double> fused;  // final distribution
    double loss = 0.0;
};

/// Forward pass of the full fused network. With pinned_alpha the predictor is
/// bypassed and channels with a zero weight are not evaluated.
inline FusedTrace fused_forward(ModelState& m, const nn::Tensor& x, const std::vector<double>& target,
                                FusionWeightSign sign, const FusionWeights* pinned_alpha) {
    FusedTrace t;
    if (pinned_alpha) {
        t.alpha = *pinned_alpha;
    } else {
        t.z = m.predictor.forward(x);
        t.alpha = fusion_weights(t.z, sign);
    }
    const int n = m.fusion.n_classes();
    for (int i = 0; i < kGroupCount; ++i) {
        if (pinned_alpha && t.alpha[i] == 0.0) {
            t.scores[i].assign(n, 0.0);  // unused; keeps shapes uniform
            continue;
        }
        t.scores[i] = channel_forward(x, m.channels[i]);
    }
    t.fused = fuse_predict(t.scores, t.alpha, m.fusion);
    t.loss = fusion_loss(t.fused, target);
    return t;
}

}  // namespace detail

/// Loss of the fused network on one sample (no gradient accumulation).
inline double fused_loss(ModelState& m, const nn::Tensor& x, const std::vector<double>& target,
                         FusionWeightSign sign, const FusionWeights* pinned_alpha = nullptr) {
    return detail::fused_forward(m, x, target, sign, pinned_alpha).loss;
}

/// Forward + backward of the fused network on one sample; accumulates grads
/// in every touched parameter block.
///
/// With a pinned alpha, the weights are constants: channels with alpha_i = 0
/// receive exactly zero gradient (they are skipped outright) and the
/// predictor is not involved at all.
inline double fused_forward_backward(ModelState& m, const nn::Tensor& x,
                                     const std::vector<double>& target, FusionWeightSign sign,
                                     const FusionWeights* pinned_alpha = nullptr) {
    auto t = detail::fused_forward(m, x, target, sign, pinned_alpha);

    // d loss / d fusion logits = p - y
    std::vector<double> dflogits(t.fused.size());
    for (std::size_t j = 0; j < t.fused.size(); ++j) dflogits[j] = t.fused[j] - target[j];
    const std::vector<double> dsum = m.fusion.backward_logits(dflogits);

    GroupScore dalpha{};
    for (int i = 0; i < kGroupCount; ++i) {
        if (pinned_alpha && t.alpha[i] == 0.0) continue;
        double da = 0.0;
        std::vector<double> dscores(dsum.size());
        for (std::size_t j = 0; j < dsum.size(); ++j) {
            dscores[j] = t.alpha[i] * dsum[j];
            da += t.scores[i][j] * dsum[j];
        }
        dalpha[i] = da;
        m.channels[i].backward_logits(nn::softmax_backward(t.scores[i], dscores));
    }

    if (!pinned_alpha) {
        const GroupScore dz = fusion_weights_backward(t.alpha, dalpha, sign);
        m.predictor.backward(dz);
    }
    return t.loss;
}

struct TrainMetrics {
    std::vector<double> step1_loss;
    std::array<std::vector<double>, kGroupCount> step2_loss;
    std::vector<double> step3_loss;
    std::vector<double> single_channel_loss;
    std::vector<std::string> warnings;
};

inline nlohmann::json to_json(const TrainMetrics& m) {
    nlohmann::json j;
    j["step1_loss"] = m.step1_loss;
    for (int i = 0; i < kGroupCount; ++i)
        j["step2_loss"]["channel" + std::to_string(i + 1)] = m.step2_loss[i];
    j["step3_loss"] = m.step3_loss;
    j["single_channel_loss"] = m.single_channel_loss;
    j["warnings"] = m.warnings;
    return j;
}

struct TrainResult {
    ModelState model;
    TrainMetrics metrics;
};

namespace detail {

inline std::vector<double> target_of(const EncodedSample& s, int n_classes) {
    return one_hot(s.label, n_classes);
}

template <typename StepFn>
inline double run_epoch(const std::vector<const EncodedSample*>& set, int batch_size, Rng& rng,
                        std::vector<nn::ParamBlock>& blocks, SgdOptimizer& opt, StepFn&& per_sample) {
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    double epoch_loss = 0.0;
    std::size_t done = 0;
    while (done < order.size()) {
        const std::size_t count = std::min<std::size_t>(batch_size, order.size() - done);
        nn::zero_grads(blocks);
        double batch_loss = 0.0;
        for (std::size_t k = 0; k < count; ++k)
            batch_loss += per_sample(*set[order[done + k]]);
        opt.step(blocks, 1.0 / static_cast<double>(count));
        epoch_loss += batch_loss;
        done += count;
    }
    return epoch_loss / static_cast<double>(order.size());
}

}  // namespace detail

/// The three-step training procedure: (1) train the view-group predictor on
/// group targets, (2) freeze it and train each channel on the samples routed
/// to it by ground-truth view membership, (3) unfreeze everything and train
/// the full network end-to-end through the weighted fusion. `last_step`
/// truncates the procedure (1 = predictor only, 2 = through channels).
inline TrainResult train_three_steps(const std::vector<EncodedSample>& train_set,
                                     const TrainConfig& config, int last_step = 3) {
    config.validate();
    if (last_step < 1 || last_step > 3)
        throw std::invalid_argument("train_three_steps: last_step must be 1..3");
    if (train_set.empty()) throw std::invalid_argument("train_three_steps: empty train set");

    TrainResult result{ModelState(config.dims()), {}};
    ModelState& model = result.model;
    Rng init_rng(Rng::mix(config.seed, 0x1417));
    model.init(init_rng);

    std::vector<const EncodedSample*> all;
    all.reserve(train_set.size());
    for (const auto& s : train_set) all.push_back(&s);

    // Step 1: view-group predictor.
    {
        Rng rng(Rng::mix(config.seed, 0x57E1));
        SgdOptimizer opt(config.learning_rate, config.momentum);
        auto blocks = model.predictor.params();
        for (int epoch = 0; epoch < config.epochs_step1; ++epoch) {
            const double loss = detail::run_epoch(all, config.batch_size, rng, blocks, opt,
                [&](const EncodedSample& s) {
                    const GroupTarget y = group_target(s.angle_deg);
                    const GroupScore z = model.predictor.forward(s.x);
                    model.predictor.backward(group_loss_grad(z, y));
                    return group_loss(z, y);
                });
            result.metrics.step1_loss.push_back(loss);
        }
        model.stage = "predictor";
    }
    if (last_step == 1) return result;

    // Step 2: channels, routed by ground-truth membership; predictor frozen.
    for (int ch = 0; ch < kGroupCount; ++ch) {
        std::vector<const EncodedSample*> routed;
        for (const auto& s : train_set) {
            const auto groups = group_membership(s.angle_deg);
            if (std::find(groups.begin(), groups.end(), ch + 1) != groups.end())
                routed.push_back(&s);
        }
        if (routed.empty()) {
            result.metrics.warnings.push_back("channel " + std::to_string(ch + 1) +
                                              " received zero samples; left at initialization");
            continue;
        }
        Rng rng(Rng::mix(config.seed, 0x57E2 + static_cast<std::uint64_t>(ch)));
        SgdOptimizer opt(config.learning_rate, config.momentum);
        auto blocks = model.channels[ch].params("channel" + std::to_string(ch + 1));
        for (int epoch = 0; epoch < config.epochs_step2; ++epoch) {
            const double loss = detail::run_epoch(routed, config.batch_size, rng, blocks, opt,
                [&](const EncodedSample& s) {
                    const auto y = detail::target_of(s, config.n_classes);
                    const auto logits = model.channels[ch].forward_logits(s.x);
                    model.channels[ch].backward_logits(nn::cross_entropy_logits_grad(logits, y));
                    return nn::cross_entropy_logits(logits, y);
                });
            result.metrics.step2_loss[ch].push_back(loss);
        }
    }
    model.stage = "channels";
    if (last_step == 2) return result;

    // Step 3: end-to-end through the weighted fusion, alpha from the
    // (differentiable) fusion weights of the predictor scores.
    {
        Rng rng(Rng::mix(config.seed, 0x57E3));
        SgdOptimizer opt(config.learning_rate, config.momentum);
        auto blocks = model.params();
        for (int epoch = 0; epoch < config.epochs_step3; ++epoch) {
            const double loss = detail::run_epoch(all, config.batch_size, rng, blocks, opt,
                [&](const EncodedSample& s) {
                    const auto y = detail::target_of(s, config.n_classes);
                    return fused_forward_backward(model, s.x, y, config.fusion_weight_sign);
                });
            result.metrics.step3_loss.push_back(loss);
        }
        model.stage = "e2e";
    }

    return result;
}

/// Single-channel mode (used by cross-view I): alpha pinned to (1,0,0,0);
/// only channel 1 and the fusion classifier receive gradients, the predictor
/// stays untrained.
inline TrainResult train_single_channel(const std::vector<EncodedSample>& train_set,
                                        const TrainConfig& config) {
    config.validate();
    if (!config.single_channel_mode)
        throw std::invalid_argument("train_single_channel: single_channel_mode must be set");
    if (train_set.empty()) throw std::invalid_argument("train_single_channel: empty train set");

    TrainResult result{ModelState(config.dims()), {}};
    ModelState& model = result.model;
    Rng init_rng(Rng::mix(config.seed, 0x1417));
    model.init(init_rng);

    std::vector<const EncodedSample*> all;
    all.reserve(train_set.size());
    for (const auto& s : train_set) all.push_back(&s);

    static constexpr FusionWeights kPinned = {1.0, 0.0, 0.0, 0.0};
    Rng rng(Rng::mix(config.seed, 0x51C1));
    SgdOptimizer opt(config.learning_rate, config.momentum);
    std::vector<nn::ParamBlock> blocks = model.channels[0].params("channel1");
    {
        auto f = model.fusion.params();
        blocks.insert(blocks.end(), f.begin(), f.end());
    }
    for (int epoch = 0; epoch < config.epochs_step2; ++epoch) {
        const double loss = detail::run_epoch(all, config.batch_size, rng, blocks, opt,
            [&](const EncodedSample& s) {
                const auto y = detail::target_of(s, config.n_classes);
                return fused_forward_backward(model, s.x, y, config.fusion_weight_sign, &kPinned);
            });
        result.metrics.single_channel_loss.push_back(loss);
    }
    model.stage = "single-channel";
    return result;
}

/// Top-1 action prediction with the pinned single-channel path when the model
/// was trained in single-channel mode, the full fused path otherwise.
inline int predict_action(ModelState& model, const EncodedSample& s, FusionWeightSign sign) {
    if (model.stage == "single-channel") {
        static constexpr FusionWeights kPinned = {1.0, 0.0, 0.0, 0.0};
        const auto scores = channel_forward(s.x, model.channels[0]);
        std::array<ChannelScores, kGroupCount> all_scores;
        all_scores[0] = scores;
        for (int i = 1; i < kGroupCount; ++i) all_scores[i].assign(scores.size(), 0.0);
        return nn::argmax(fuse_predict(all_scores, kPinned, model.fusion));
    }
    return infer_tensor(s.x, model, sign).action;
}

}  // namespace vscnn
