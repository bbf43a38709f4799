// Command-line front end: synthetic dataset generation, sample encoding,
// training, protocol evaluation, and report re-rendering.
//
// Exit codes: 0 success, 2 invalid arguments, 3 data/runtime errors.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vscnn/vscnn.hpp"

namespace fs = std::filesystem;

namespace {

vscnn::TrainConfig load_config(const std::string& path) {
    if (path.empty()) return vscnn::TrainConfig{};
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    nlohmann::json j;
    in >> j;
    return vscnn::train_config_from_json(j);
}

int run_synth(int classes, int subjects, const std::string& out, std::uint64_t seed, double noise,
              double occlusion, std::size_t frames_fixed, std::size_t frames_orbit) {
    vscnn::SynthSpec spec;
    spec.n_classes = classes;
    spec.subjects_per_class = subjects;
    spec.seed = seed;
    spec.noise_std = noise;
    spec.occlusion_rate = occlusion;
    spec.frames_fixed = frames_fixed;
    spec.frames_orbit = frames_orbit;
    const auto entries = vscnn::generate_dataset(spec, out);
    std::cout << "wrote " << entries.size() << " sequences to " << (fs::path(out) / "manifest.jsonl").string()
              << "\n";
    return 0;
}

int run_encode(const std::string& manifest, const std::string& out, int frames, int sections) {
    const auto manifest_path = fs::path(manifest);
    const auto mentries = vscnn::read_manifest(manifest_path);
    const auto dir = manifest_path.parent_path();

    std::vector<vscnn::SkeletonImage> images;
    std::vector<std::string> warnings;
    for (const auto& e : mentries) {
        vscnn::SkeletonSequence seq = vscnn::load_sequence(dir, e);
        if (!e.varying) {
            images.push_back(vscnn::encode_sample(seq, frames));
        } else {
            if (seq.frames.size() < static_cast<std::size_t>(sections)) {
                warnings.push_back("skipping " + e.path + ": shorter than requested sections");
                continue;
            }
            for (const auto& clip : vscnn::clip_sequence(seq, static_cast<std::size_t>(sections)))
                images.push_back(vscnn::encode_sample(clip, frames));
        }
    }
    vscnn::write_encoded_cache(out, images);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "encoded " << images.size() << " samples into " << out << "\n";
    return 0;
}

int run_train(const std::string& manifest, const std::string& config_path, const std::string& out,
              const std::string& stage) {
    vscnn::TrainConfig config = load_config(config_path);
    if (stage == "single-channel") config.single_channel_mode = true;

    std::vector<std::string> warnings;
    const auto samples =
        vscnn::load_encoded_samples(manifest, config.frames, config.n_sections, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    vscnn::TrainResult result = [&] {
        if (stage == "single-channel") return vscnn::train_single_channel(samples, config);
        int last_step = 3;
        if (stage == "predictor") last_step = 1;
        else if (stage == "channels") last_step = 2;
        else if (stage != "all" && stage != "e2e")
            throw std::invalid_argument("unknown stage: " + stage);
        return vscnn::train_three_steps(samples, config, last_step);
    }();
    for (const auto& w : result.metrics.warnings) std::cerr << "warning: " << w << "\n";

    const fs::path ckpt(out);
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    vscnn::save_checkpoint(ckpt, result.model,
                           {result.model.stage, config.seed, vscnn::config_hash(config)});

    nlohmann::json metrics;
    metrics["stage"] = result.model.stage;
    metrics["seed"] = config.seed;
    metrics["config"] = vscnn::to_json(config);
    metrics["train_samples"] = samples.size();
    metrics["losses"] = vscnn::to_json(result.metrics);
    const fs::path metrics_path = ckpt.parent_path() / "metrics.json";
    std::ofstream mout(metrics_path);
    if (!mout) throw std::runtime_error("cannot write " + metrics_path.string());
    mout << metrics.dump(2) << "\n";

    std::cout << "checkpoint: " << ckpt.string() << "\nmetrics: " << metrics_path.string() << "\n";
    return 0;
}

int run_evaluate(const std::string& protocol, const std::string& manifest,
                 const std::string& config_path, const std::string& out, int sections,
                 const std::string& direction) {
    vscnn::TrainConfig config = load_config(config_path);

    std::vector<std::string> warnings;
    const auto samples = vscnn::load_encoded_samples(manifest, config.frames, sections, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const auto mentries = vscnn::read_manifest(manifest);
    const bool synthetic = std::all_of(mentries.begin(), mentries.end(),
                                       [](const vscnn::ManifestEntry& e) { return e.setting == "synthetic"; });

    vscnn::EvalReport report;
    if (protocol == "cross-subject")
        report = vscnn::run_cross_subject(samples, config, synthetic);
    else if (protocol == "cross-view-1")
        report = vscnn::run_cross_view_1(samples, config, synthetic);
    else if (protocol == "cross-view-2")
        report = vscnn::run_cross_view_2(samples, config, direction.at(0));
    else if (protocol == "arbitrary-1")
        report = vscnn::run_arbitrary(samples, config, 1, sections);
    else if (protocol == "arbitrary-2")
        report = vscnn::run_arbitrary(samples, config, 2, sections);
    else
        throw std::invalid_argument("unknown protocol: " + protocol);

    fs::create_directories(out);
    vscnn::write_metrics_json(fs::path(out) / "metrics.json", report);
    vscnn::write_confusion_csv(fs::path(out) / "confusion.csv", report.confusion);
    vscnn::render_report(out, report);

    std::cout << report.protocol << " overall accuracy: " << report.overall_accuracy << "\n";
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int run_report(const std::string& metrics, const std::string& out) {
    const auto report = vscnn::read_metrics_json(metrics);
    vscnn::render_report(out, report);
    std::cout << "rendered " << report.protocol << " figures into " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VS-CNN skeleton action recognition toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic multi-view dataset");
    int classes = 5, subjects = 8;
    std::string synth_out;
    std::uint64_t seed = 1;
    double noise = 0.0, occlusion = 0.0;
    std::size_t frames_fixed = 200, frames_orbit = 2000;
    synth->add_option("--classes", classes, "number of action classes (<= 40)")->required();
    synth->add_option("--subjects", subjects, "subjects per class")->required();
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", seed, "generator seed");
    synth->add_option("--noise", noise, "Gaussian joint noise stddev (m)");
    synth->add_option("--occlusion", occlusion, "peak joint dropout probability");
    synth->add_option("--frames-fixed", frames_fixed, "frames per fixed-view sequence");
    synth->add_option("--frames-orbit", frames_orbit, "frames per orbit sequence");

    // encode
    auto* encode = app.add_subcommand("encode", "encode sequences into the binary sample cache");
    std::string enc_manifest, enc_out;
    int enc_frames = vscnn::kDefaultSampleFrames, enc_sections = 10;
    encode->add_option("--manifest", enc_manifest, "manifest.jsonl path")->required();
    encode->add_option("--out", enc_out, "output directory")->required();
    encode->add_option("--frames", enc_frames, "sample length T");
    encode->add_option("--sections", enc_sections, "clips per varying-view sequence");

    // train
    auto* train = app.add_subcommand("train", "train a VS-CNN model");
    std::string tr_manifest, tr_config, tr_out, tr_stage = "all";
    train->add_option("--manifest", tr_manifest, "manifest.jsonl path")->required();
    train->add_option("--config", tr_config, "train config JSON");
    train->add_option("--out", tr_out, "checkpoint output path")->required();
    train->add_option("--stage", tr_stage, "predictor|channels|e2e|all|single-channel")
        ->check(CLI::IsMember({"predictor", "channels", "e2e", "all", "single-channel"}));

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "run an evaluation protocol");
    std::string ev_protocol, ev_manifest, ev_config, ev_out, ev_direction = "a";
    int ev_sections = 10;
    evaluate->add_option("--protocol", ev_protocol, "protocol name")
        ->required()
        ->check(CLI::IsMember({"cross-subject", "cross-view-1", "cross-view-2", "arbitrary-1",
                               "arbitrary-2"}));
    evaluate->add_option("--manifest", ev_manifest, "manifest.jsonl path")->required();
    evaluate->add_option("--config", ev_config, "train config JSON");
    evaluate->add_option("--out", ev_out, "report output directory")->required();
    evaluate->add_option("--sections", ev_sections, "sections per orbit (10 or 15 typical)");
    evaluate->add_option("--direction", ev_direction, "cross-view-2 direction: a|b")
        ->check(CLI::IsMember({"a", "b"}));

    // report
    auto* report = app.add_subcommand("report", "re-render figures from metrics.json");
    std::string rp_metrics, rp_out;
    report->add_option("--metrics", rp_metrics, "metrics.json path")->required();
    report->add_option("--out", rp_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed())
            return run_synth(classes, subjects, synth_out, seed, noise, occlusion, frames_fixed,
                             frames_orbit);
        if (encode->parsed()) return run_encode(enc_manifest, enc_out, enc_frames, enc_sections);
        if (train->parsed()) return run_train(tr_manifest, tr_config, tr_out, tr_stage);
        if (evaluate->parsed())
            return run_evaluate(ev_protocol, ev_manifest, ev_config, ev_out, ev_sections, ev_direction);
        if (report->parsed()) return run_report(rp_metrics, rp_out);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
