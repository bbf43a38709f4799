#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vscnn/eval.hpp"

namespace vscnn {

namespace detail {

inline std::string fmt(double v, const char* spec = "%.3f") {
    char buf[32];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// white at 0, saturated red at 1
inline std::string heat_color(double v) {
    v = std::clamp(v, 0.0, 1.0);
    const int g = static_cast<int>(255.0 * (1.0 - v));
    return "rgb(255," + std::to_string(g) + "," + std::to_string(g) + ")";
}

}  // namespace detail

/// Heatmap of values in [0,1], white-to-red, with optional axis labels.
inline void write_svg_heatmap(const std::filesystem::path& path,
                              const std::vector<std::vector<double>>& values,
                              const std::vector<std::string>& row_labels,
                              const std::vector<std::string>& col_labels,
                              const std::string& title) {
    const int rows = static_cast<int>(values.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(values[0].size());
    const int cell = std::max(12, 360 / std::max(rows, cols <= 0 ? 1 : cols));
    const int margin_left = 60, margin_top = 50;
    const int width = margin_left + cols * cell + 20;
    const int height = margin_top + rows * cell + 30;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << margin_left << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double v = values[r][c];
            out << "<rect x=\"" << margin_left + c * cell << "\" y=\"" << margin_top + r * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
                << detail::heat_color(v) << "\" stroke=\"#ccc\" stroke-width=\"0.5\"/>\n";
            if (cell >= 28)
                out << "<text x=\"" << margin_left + c * cell + cell / 2 << "\" y=\""
                    << margin_top + r * cell + cell / 2 + 4 << "\" text-anchor=\"middle\">"
                    << detail::fmt(v, "%.2f") << "</text>\n";
        }
    }
    for (int r = 0; r < rows && r < static_cast<int>(row_labels.size()); ++r)
        out << "<text x=\"" << margin_left - 6 << "\" y=\"" << margin_top + r * cell + cell / 2 + 4
            << "\" text-anchor=\"end\">" << row_labels[r] << "</text>\n";
    for (int c = 0; c < cols && c < static_cast<int>(col_labels.size()); ++c)
        out << "<text x=\"" << margin_left + c * cell + cell / 2 << "\" y=\"" << margin_top - 8
            << "\" text-anchor=\"middle\">" << col_labels[c] << "</text>\n";
    out << "</svg>\n";
}

/// Accuracy-per-index line plot with y fixed to [0,1].
inline void write_svg_line_plot(const std::filesystem::path& path, const std::vector<double>& ys,
                                const std::string& x_label, const std::string& title) {
    const int width = 480, height = 320;
    const int ml = 50, mr = 20, mt = 40, mb = 45;
    const int pw = width - ml - mr, ph = height - mt - mb;
    const int n = static_cast<int>(ys.size());

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write svg: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<text x=\"" << ml << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int g = 0; g <= 4; ++g) {
        const double v = g / 4.0;
        const int y = mt + static_cast<int>((1.0 - v) * ph);
        out << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
            << detail::fmt(v, "%.2f") << "</text>\n";
    }

    if (n > 0) {
        std::string points;
        for (int i = 0; i < n; ++i) {
            const double fx = n == 1 ? 0.5 : static_cast<double>(i) / (n - 1);
            const int x = ml + static_cast<int>(fx * pw);
            const int y = mt + static_cast<int>((1.0 - std::clamp(ys[i], 0.0, 1.0)) * ph);
            points += std::to_string(x) + "," + std::to_string(y) + " ";
            out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"#c0392b\"/>\n";
            out << "<text x=\"" << x << "\" y=\"" << mt + ph + 16 << "\" text-anchor=\"middle\">"
                << i + 1 << "</text>\n";
        }
        out << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">"
        << x_label << "</text>\n";
    out << "</svg>\n";
}

inline void write_confusion_csv(const std::filesystem::path& path,
                                const std::vector<std::vector<int>>& confusion) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path.string());
    for (const auto& row : confusion) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << row[j];
        }
        out << '\n';
    }
}

inline void write_metrics_json(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write metrics: " + path.string());
    out << to_json(report).dump(2) << "\n";
}

inline EvalReport read_metrics_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read metrics: " + path.string());
    nlohmann::json j;
    in >> j;
    return eval_report_from_json(j);
}

/// Renders every applicable figure for a report into out_dir.
inline void render_report(const std::filesystem::path& out_dir, const EvalReport& report) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);

    if (!report.confusion.empty()) {
        std::vector<std::vector<double>> norm(report.confusion.size());
        for (std::size_t i = 0; i < report.confusion.size(); ++i) {
            long row_total = 0;
            for (int v : report.confusion[i]) row_total += v;
            for (int v : report.confusion[i])
                norm[i].push_back(row_total == 0 ? 0.0 : static_cast<double>(v) / row_total);
        }
        write_svg_heatmap(out_dir / "confusion.svg", norm, {}, {},
                          report.protocol + " confusion (row-normalized)");
    }
    if (!report.view_matrix.empty())
        write_svg_heatmap(out_dir / "view_matrix.svg", report.view_matrix, report.view_labels,
                          report.view_labels, report.protocol + " train-view x test-view accuracy");
    if (!report.per_section_accuracy.empty())
        write_svg_line_plot(out_dir / "per_section_accuracy.svg", report.per_section_accuracy,
                            "section", report.protocol + " accuracy per section");
    if (!report.per_view_accuracy.empty()) {
        std::vector<std::vector<double>> row = {report.per_view_accuracy};
        write_svg_heatmap(out_dir / "per_view_accuracy.svg", row, {"acc"}, report.view_labels,
                          report.protocol + " accuracy per view");
    }
}

}  // namespace vscnn
