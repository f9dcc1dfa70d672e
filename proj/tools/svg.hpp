#pragma once
#include <array>
#include <string>
#include <vector>

namespace hhri::svg {

struct Style {
    std::string stroke = "black";
    double stroke_width = 1.2;
    std::string fill = "none";
    std::string dash;  ///< e.g. "6,4" for dashed
    double opacity = 1.0;
};

/// Minimal static plot: a framed data box with linear axes, polylines,
/// markers, filled cells and text, written as a standalone .svg file.
class Plot {
public:
    Plot(double x_min, double x_max, double y_min, double y_max, int width = 720,
         int height = 600);

    void polyline(const std::vector<std::array<double, 2>>& pts, const Style& style);
    void circle(double x, double y, double radius_px, const std::string& fill,
                double opacity = 1.0);
    /// Axis-aligned filled rectangle in data coordinates.
    void cell(double x0, double y0, double x1, double y1, const std::string& fill);
    void text(double x, double y, const std::string& s, int font_px = 12,
              const std::string& anchor = "middle", const std::string& color = "black");
    void labels(const std::string& x_label, const std::string& y_label,
                const std::string& title);

    void write(const std::string& path) const;

private:
    double sx(double x) const;
    double sy(double y) const;

    double x_min_, x_max_, y_min_, y_max_;
    int width_, height_;
    int margin_ = 56;
    std::vector<std::string> body_;
};

/// Sequential colormap for t in [0, 1], dark blue to yellow.
std::string colormap(double t);

} // namespace hhri::svg
