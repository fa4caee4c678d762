#include "cmguide/app/output.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <system_error>

#include "cmguide/errors.hpp"

namespace cmguide::app {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Csv::Csv(const std::vector<std::string>& header) {
    for (const std::string& h : header) cell(h);
    end_row();
}

Csv& Csv::cell(const std::string& v) {
    if (!row_start_) text_ += ',';
    text_ += v;
    row_start_ = false;
    return *this;
}

Csv& Csv::cell(double v) { return cell(format_double(v)); }
Csv& Csv::cell(int v) { return cell(std::to_string(v)); }

void Csv::end_row() {
    text_ += '\n';
    row_start_ = true;
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
}

namespace {

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series) {
    constexpr double kWidth = 720, kHeight = 560, kMargin = 60;
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const PlotSeries& s : series)
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    if (!(x_lo <= x_hi)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
    if (x_hi - x_lo < 1e-9) x_lo -= 0.5, x_hi += 0.5;
    if (y_hi - y_lo < 1e-9) y_lo -= 0.5, y_hi += 0.5;
    const double pad_x = 0.05 * (x_hi - x_lo), pad_y = 0.05 * (y_hi - y_lo);
    x_lo -= pad_x, x_hi += pad_x, y_lo -= pad_y, y_hi += pad_y;

    const double plot_w = kWidth - 2 * kMargin, plot_h = kHeight - 2 * kMargin;
    auto px = [&](double x) { return kMargin + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double y) { return kHeight - kMargin - (y - y_lo) / (y_hi - y_lo) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(kWidth) + "\" height=\"" + fixed(kHeight) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fixed(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
           "</text>\n";
    svg += "<rect x=\"" + fixed(kMargin) + "\" y=\"" + fixed(kMargin) + "\" width=\"" + fixed(plot_w) +
           "\" height=\"" + fixed(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x_lo + (x_hi - x_lo) * t / 4, fy = y_lo + (y_hi - y_lo) * t / 4;
        svg += "<text x=\"" + fixed(px(fx)) + "\" y=\"" + fixed(kHeight - kMargin + 16) +
               "\" text-anchor=\"middle\">" + fixed(fx) + "</text>\n";
        svg += "<text x=\"" + fixed(kMargin - 6) + "\" y=\"" + fixed(py(fy) + 4) + "\" text-anchor=\"end\">" +
               fixed(fy) + "</text>\n";
    }
    svg += "<text x=\"" + fixed(kWidth / 2) + "\" y=\"" + fixed(kHeight - 14) + "\" text-anchor=\"middle\">" +
           escape(x_label) + "</text>\n";
    svg += "<text x=\"16\" y=\"" + fixed(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fixed(kHeight / 2) + ")\">" + escape(y_label) + "</text>\n";

    int legend_row = 0;
    for (const PlotSeries& s : series) {
        if (s.points.empty()) continue;
        svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            if (i) svg += ' ';
            svg += fixed(px(s.points[i].first)) + ',' + fixed(py(s.points[i].second));
        }
        svg += "\"/>\n";
        const auto& [x0, y0] = s.points.front();
        const auto& [x1, y1] = s.points.back();
        svg += "<circle cx=\"" + fixed(px(x0)) + "\" cy=\"" + fixed(py(y0)) + "\" r=\"4\" fill=\"" + s.color + "\"/>\n";
        svg += "<rect x=\"" + fixed(px(x1) - 4) + "\" y=\"" + fixed(py(y1) - 4) +
               "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\"" + s.color + "\"/>\n";
        const double ly = kMargin + 16 + 16 * legend_row++;
        svg += "<line x1=\"" + fixed(kWidth - kMargin - 130) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" +
               fixed(kWidth - kMargin - 110) + "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" + s.color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fixed(kWidth - kMargin - 104) + "\" y=\"" + fixed(ly) + "\">" + escape(s.label) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace cmguide::app
