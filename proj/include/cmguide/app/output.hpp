#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cmguide::app {

/// Round-trip decimal form of a double (%.17g), independent of locale and stream state.
std::string format_double(double v);

/// Builds CSV text row by row; numbers are written with format_double.
class Csv {
public:
    explicit Csv(const std::vector<std::string>& header);

    Csv& cell(double v);
    Csv& cell(int v);
    Csv& cell(const std::string& v);
    void end_row();

    const std::string& str() const { return text_; }

private:
    std::string text_;
    bool row_start_ = true;
};

/// Creates the directory if needed. Throws IoError.
void ensure_directory(const std::filesystem::path& dir);

/// Writes the file in binary mode. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<std::pair<double, double>> points;
};

/// Line plot of the series with start (circle) and end (square) markers, a legend and a frame.
std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series);

}  // namespace cmguide::app
