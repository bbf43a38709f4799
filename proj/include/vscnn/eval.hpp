#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vscnn/trainer.hpp"

namespace vscnn {

/// The 51 training subject IDs of the cross-subject protocol (real-dataset mode).
inline const std::vector<int>& cross_subject_train_ids() {
    static const std::vector<int> ids = {
        1, 2, 6, 12, 13, 16, 21, 24, 28, 29, 30, 31, 33, 35, 39, 41, 42, 45, 47, 50, 52,
        54, 55, 57, 59, 61, 63, 64, 67, 69, 70, 71, 73, 77, 81, 84, 86, 87, 88, 90, 91,
        93, 96, 99, 102, 103, 104, 107, 108, 112, 113};
    return ids;
}

/// Subjects used for training: the fixed 51-ID list for real captures,
/// the first half of the sorted subject IDs for synthetic data.
inline std::set<int> train_subjects_of(const std::vector<int>& subject_ids, bool synthetic) {
    std::set<int> unique(subject_ids.begin(), subject_ids.end());
    std::set<int> train;
    if (synthetic) {
        const std::size_t half = unique.size() / 2;
        std::size_t i = 0;
        for (int id : unique) {
            if (i++ >= half) break;
            train.insert(id);
        }
    } else {
        const auto& ids = cross_subject_train_ids();
        for (int id : unique)
            if (std::find(ids.begin(), ids.end(), id) != ids.end()) train.insert(id);
    }
    return train;
}

/// Cross-subject split of manifest entries. Synthetic mode is detected from
/// the capture-setting tag.
inline std::pair<std::vector<ManifestEntry>, std::vector<ManifestEntry>> split_cross_subject(
    const std::vector<ManifestEntry>& entries) {
    if (entries.empty()) throw std::invalid_argument("split_cross_subject: empty manifest");
    const bool synthetic = std::all_of(entries.begin(), entries.end(),
                                       [](const ManifestEntry& e) { return e.setting == "synthetic"; });
    std::vector<int> subjects;
    for (const auto& e : entries) subjects.push_back(e.subject_id);
    const auto train_ids = train_subjects_of(subjects, synthetic);

    std::vector<ManifestEntry> train, test;
    for (const auto& e : entries)
        (train_ids.count(e.subject_id) ? train : test).push_back(e);
    if (train.empty() || test.empty())
        throw std::invalid_argument("split_cross_subject: one side of the split is empty");
    return {train, test};
}

/// Half-open angle range of a 1-based section index: [(i-1)*360/n, i*360/n).
inline std::pair<double, double> section_angle_range(int index, int n_sections) {
    if (n_sections < 1 || index < 1 || index > n_sections)
        throw std::invalid_argument("section_angle_range: index out of range");
    const double step = 360.0 / static_cast<double>(n_sections);
    return {(index - 1) * step, index * step};
}

/// Confusion counts M[true][pred].
inline std::vector<std::vector<int>> confusion_matrix(const std::vector<int>& predictions,
                                                      const std::vector<int>& labels,
                                                      int n_classes = kActionClassCount) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("confusion_matrix: length mismatch");
    std::vector<std::vector<int>> m(n_classes, std::vector<int>(n_classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= n_classes || predictions[i] < 0 || predictions[i] >= n_classes)
            throw std::invalid_argument("confusion_matrix: label out of range");
        ++m[labels[i]][predictions[i]];
    }
    return m;
}

inline double accuracy_from_confusion(const std::vector<std::vector<int>>& m) {
    long trace = 0, total = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            total += m[i][j];
            if (i == j) trace += m[i][j];
        }
    return total == 0 ? 0.0 : static_cast<double>(trace) / static_cast<double>(total);
}

struct EvalReport {
    std::string protocol;
    double overall_accuracy = 0.0;
    std::vector<std::string> view_labels;
    std::vector<double> per_view_accuracy;
    std::vector<double> per_section_accuracy;  // [0] = section 1
    std::vector<std::vector<double>> view_matrix;  // cross-view I: train x test
    double view_matrix_mean_with_diag = 0.0;
    double view_matrix_mean_without_diag = 0.0;
    std::vector<std::vector<int>> confusion;
    int n_classes = 0;
    int train_count = 0;
    int test_count = 0;
    std::vector<std::string> warnings;
};

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j;
    j["protocol"] = r.protocol;
    j["overall_accuracy"] = r.overall_accuracy;
    j["per_view"] = {{"labels", r.view_labels}, {"accuracy", r.per_view_accuracy}};
    j["per_section_accuracy"] = r.per_section_accuracy;
    j["view_matrix"] = r.view_matrix;
    j["view_matrix_means"] = {{"with_diagonal", r.view_matrix_mean_with_diag},
                              {"without_diagonal", r.view_matrix_mean_without_diag}};
    j["confusion"] = r.confusion;
    j["n_classes"] = r.n_classes;
    j["train_count"] = r.train_count;
    j["test_count"] = r.test_count;
    j["warnings"] = r.warnings;
    return j;
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.protocol = j.at("protocol").get<std::string>();
    r.overall_accuracy = j.at("overall_accuracy").get<double>();
    r.view_labels = j.at("per_view").at("labels").get<std::vector<std::string>>();
    r.per_view_accuracy = j.at("per_view").at("accuracy").get<std::vector<double>>();
    r.per_section_accuracy = j.at("per_section_accuracy").get<std::vector<double>>();
    r.view_matrix = j.at("view_matrix").get<std::vector<std::vector<double>>>();
    r.view_matrix_mean_with_diag = j.at("view_matrix_means").at("with_diagonal").get<double>();
    r.view_matrix_mean_without_diag = j.at("view_matrix_means").at("without_diagonal").get<double>();
    r.confusion = j.at("confusion").get<std::vector<std::vector<int>>>();
    r.n_classes = j.at("n_classes").get<int>();
    r.train_count = j.at("train_count").get<int>();
    r.test_count = j.at("test_count").get<int>();
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
}

inline std::string view_label(int index) { return index == 0 ? "FV" : "V" + std::to_string(index); }

namespace detail {

inline void assert_disjoint(const std::vector<const EncodedSample*>& train,
                            const std::vector<const EncodedSample*>& test) {
    std::set<std::string> train_ids;
    for (const auto* s : train) train_ids.insert(s->source);
    for (const auto* s : test)
        if (train_ids.count(s->source))
            throw std::logic_error("protocol split leaks sample: " + s->source);
}

inline std::vector<const EncodedSample*> filter(const std::vector<EncodedSample>& samples,
                                                auto&& pred) {
    std::vector<const EncodedSample*> out;
    for (const auto& s : samples)
        if (pred(s)) out.push_back(&s);
    return out;
}

inline std::vector<EncodedSample> deref(const std::vector<const EncodedSample*>& ptrs) {
    std::vector<EncodedSample> out;
    out.reserve(ptrs.size());
    for (const auto* p : ptrs) out.push_back(*p);
    return out;
}

struct TestOutcome {
    std::vector<int> predictions;
    std::vector<int> labels;
};

inline TestOutcome test_model(ModelState& model, const std::vector<const EncodedSample*>& test,
                              FusionWeightSign sign) {
    TestOutcome out;
    out.predictions.reserve(test.size());
    out.labels.reserve(test.size());
    for (const auto* s : test) {
        out.predictions.push_back(predict_action(model, *s, sign));
        out.labels.push_back(s->label);
    }
    return out;
}

inline double subset_accuracy(const TestOutcome& o, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i : idx)
        if (o.predictions[i] == o.labels[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(idx.size());
}

inline std::set<int> synthetic_train_half(const std::vector<EncodedSample>& samples) {
    std::vector<int> ids;
    for (const auto& s : samples) ids.push_back(s.subject_id);
    return train_subjects_of(ids, true);
}

}  // namespace detail

/// Cross-subject protocol over fixed-viewpoint samples: fixed 51-ID subject
/// split (real data) or first-half subjects (synthetic), full three-step
/// training, per-view accuracy breakdown on the held-out subjects.
inline EvalReport run_cross_subject(const std::vector<EncodedSample>& samples,
                                    const TrainConfig& config, bool synthetic = true) {
    std::vector<int> subject_ids;
    for (const auto& s : samples) subject_ids.push_back(s.subject_id);
    const auto train_ids = train_subjects_of(subject_ids, synthetic);

    const auto train = detail::filter(samples, [&](const EncodedSample& s) {
        return s.fixed && train_ids.count(s.subject_id) > 0;
    });
    const auto test = detail::filter(samples, [&](const EncodedSample& s) {
        return s.fixed && train_ids.count(s.subject_id) == 0;
    });
    if (train.empty() || test.empty())
        throw std::invalid_argument("run_cross_subject: empty train or test side");
    detail::assert_disjoint(train, test);

    auto trained = train_three_steps(detail::deref(train), config);
    const auto outcome = detail::test_model(trained.model, test, config.fusion_weight_sign);

    EvalReport r;
    r.protocol = "cross-subject";
    r.n_classes = config.n_classes;
    r.train_count = static_cast<int>(train.size());
    r.test_count = static_cast<int>(test.size());
    r.confusion = confusion_matrix(outcome.predictions, outcome.labels, config.n_classes);
    r.overall_accuracy = accuracy_from_confusion(r.confusion);
    for (int v = 0; v < kFixedViewCount; ++v) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < test.size(); ++i)
            if (test[i]->view_index == v) idx.push_back(i);
        r.view_labels.push_back(view_label(v));
        r.per_view_accuracy.push_back(detail::subset_accuracy(outcome, idx));
    }
    r.warnings = trained.metrics.warnings;
    return r;
}

/// Cross-view I: train on a single fixed viewpoint (single-channel mode),
/// test on every viewpoint. Subjects are split as in cross-subject so that
/// diagonal cells stay sample-disjoint. Returns the 8x8 accuracy matrix.
inline EvalReport run_cross_view_1(const std::vector<EncodedSample>& samples,
                                   const TrainConfig& config, bool synthetic = true) {
    for (int v = 0; v < kFixedViewCount; ++v) {
        const bool present = std::any_of(samples.begin(), samples.end(), [&](const EncodedSample& s) {
            return s.fixed && s.view_index == v;
        });
        if (!present)
            throw std::invalid_argument("run_cross_view_1: missing fixed view " + view_label(v));
    }

    std::vector<int> subject_ids;
    for (const auto& s : samples) subject_ids.push_back(s.subject_id);
    const auto train_ids = train_subjects_of(subject_ids, synthetic);

    TrainConfig cfg = config;
    cfg.single_channel_mode = true;

    EvalReport r;
    r.protocol = "cross-view-1";
    r.n_classes = config.n_classes;
    r.view_matrix.assign(kFixedViewCount, std::vector<double>(kFixedViewCount, 0.0));
    std::vector<int> all_preds, all_labels;

    for (int v = 0; v < kFixedViewCount; ++v) {
        const auto train = detail::filter(samples, [&](const EncodedSample& s) {
            return s.fixed && s.view_index == v && train_ids.count(s.subject_id) > 0;
        });
        if (train.empty())
            throw std::invalid_argument("run_cross_view_1: no training samples for " + view_label(v));
        auto trained = train_single_channel(detail::deref(train), cfg);
        r.train_count += static_cast<int>(train.size());

        for (int w = 0; w < kFixedViewCount; ++w) {
            const auto test = detail::filter(samples, [&](const EncodedSample& s) {
                return s.fixed && s.view_index == w && train_ids.count(s.subject_id) == 0;
            });
            if (test.empty())
                throw std::invalid_argument("run_cross_view_1: no test samples for " + view_label(w));
            detail::assert_disjoint(train, test);
            const auto outcome = detail::test_model(trained.model, test, cfg.fusion_weight_sign);
            const auto cm = confusion_matrix(outcome.predictions, outcome.labels, cfg.n_classes);
            r.view_matrix[v][w] = accuracy_from_confusion(cm);
            all_preds.insert(all_preds.end(), outcome.predictions.begin(), outcome.predictions.end());
            all_labels.insert(all_labels.end(), outcome.labels.begin(), outcome.labels.end());
            if (v == 0) r.test_count += static_cast<int>(test.size());
        }
    }

    double sum_all = 0.0, sum_off = 0.0;
    for (int v = 0; v < kFixedViewCount; ++v)
        for (int w = 0; w < kFixedViewCount; ++w) {
            sum_all += r.view_matrix[v][w];
            if (v != w) sum_off += r.view_matrix[v][w];
        }
    r.view_matrix_mean_with_diag = sum_all / 64.0;
    r.view_matrix_mean_without_diag = sum_off / 56.0;
    for (int v = 0; v < kFixedViewCount; ++v) r.view_labels.push_back(view_label(v));
    r.confusion = confusion_matrix(all_preds, all_labels, cfg.n_classes);
    r.overall_accuracy = accuracy_from_confusion(r.confusion);
    return r;
}

/// Cross-view II: direction 'a' trains on {FV,V2,V4,V6} and tests on
/// {V1,V3,V5,V7}; direction 'b' is the converse. Full three-step training;
/// per held-out-view accuracies plus their mean.
inline EvalReport run_cross_view_2(const std::vector<EncodedSample>& samples,
                                   const TrainConfig& config, char direction = 'a') {
    if (direction != 'a' && direction != 'b')
        throw std::invalid_argument("run_cross_view_2: direction must be 'a' or 'b'");
    const std::set<int> train_views = direction == 'a' ? std::set<int>{0, 2, 4, 6}
                                                       : std::set<int>{1, 3, 5, 7};
    for (int v = 0; v < kFixedViewCount; ++v) {
        const bool present = std::any_of(samples.begin(), samples.end(), [&](const EncodedSample& s) {
            return s.fixed && s.view_index == v;
        });
        if (!present)
            throw std::invalid_argument("run_cross_view_2: missing fixed view " + view_label(v));
    }

    const auto train = detail::filter(samples, [&](const EncodedSample& s) {
        return s.fixed && train_views.count(s.view_index) > 0;
    });
    const auto test = detail::filter(samples, [&](const EncodedSample& s) {
        return s.fixed && train_views.count(s.view_index) == 0;
    });
    detail::assert_disjoint(train, test);

    auto trained = train_three_steps(detail::deref(train), config);
    const auto outcome = detail::test_model(trained.model, test, config.fusion_weight_sign);

    EvalReport r;
    r.protocol = "cross-view-2";
    r.n_classes = config.n_classes;
    r.train_count = static_cast<int>(train.size());
    r.test_count = static_cast<int>(test.size());
    r.confusion = confusion_matrix(outcome.predictions, outcome.labels, config.n_classes);
    r.overall_accuracy = accuracy_from_confusion(r.confusion);
    for (int v = 0; v < kFixedViewCount; ++v) {
        if (train_views.count(v)) continue;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < test.size(); ++i)
            if (test[i]->view_index == v) idx.push_back(i);
        r.view_labels.push_back(view_label(v));
        r.per_view_accuracy.push_back(detail::subset_accuracy(outcome, idx));
    }
    r.warnings = trained.metrics.warnings;
    return r;
}

/// Arbitrary-view protocols over orbit sections. Variant I trains on all
/// fixed-view samples and tests on every section; variant II splits the
/// sections by subject halves. `samples` must have been loaded with the
/// requested n_sections.
inline EvalReport run_arbitrary(const std::vector<EncodedSample>& samples,
                                const TrainConfig& config, int variant, int n_sections = 10) {
    if (variant != 1 && variant != 2) throw std::invalid_argument("run_arbitrary: variant must be 1 or 2");
    if (n_sections < 1) throw std::invalid_argument("run_arbitrary: n_sections must be >= 1");

    const auto sections = detail::filter(samples, [](const EncodedSample& s) { return !s.fixed; });
    if (sections.empty()) throw std::invalid_argument("run_arbitrary: no varying-view sections present");
    for (const auto* s : sections)
        if (s->section_index < 1 || s->section_index > n_sections)
            throw std::invalid_argument("run_arbitrary: samples were not clipped into n_sections");

    std::vector<const EncodedSample*> train, test;
    if (variant == 1) {
        train = detail::filter(samples, [](const EncodedSample& s) { return s.fixed; });
        test = sections;
        if (train.empty()) throw std::invalid_argument("run_arbitrary: variant I needs fixed-view samples");
    } else {
        const auto train_ids = detail::synthetic_train_half(samples);
        for (const auto* s : sections)
            (train_ids.count(s->subject_id) ? train : test).push_back(s);
        if (train.empty() || test.empty())
            throw std::invalid_argument("run_arbitrary: variant II subject split is empty on one side");
    }
    detail::assert_disjoint(train, test);

    auto trained = train_three_steps(detail::deref(train), config);
    const auto outcome = detail::test_model(trained.model, test, config.fusion_weight_sign);

    EvalReport r;
    r.protocol = variant == 1 ? "arbitrary-1" : "arbitrary-2";
    r.n_classes = config.n_classes;
    r.train_count = static_cast<int>(train.size());
    r.test_count = static_cast<int>(test.size());
    r.confusion = confusion_matrix(outcome.predictions, outcome.labels, config.n_classes);
    r.overall_accuracy = accuracy_from_confusion(r.confusion);
    for (int k = 1; k <= n_sections; ++k) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < test.size(); ++i)
            if (test[i]->section_index == k) idx.push_back(i);
        r.per_section_accuracy.push_back(detail::subset_accuracy(outcome, idx));
    }
    r.warnings = trained.metrics.warnings;
    return r;
}

}  // namespace vscnn
