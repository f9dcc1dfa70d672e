#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace hhri::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string data_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

Plot::Plot(double x_min, double x_max, double y_min, double y_max, int width, int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width),
      height_(height) {
    if (!(x_max_ > x_min_) || !(y_max_ > y_min_)) {
        throw std::invalid_argument("svg::Plot: degenerate data range");
    }
}

double Plot::sx(double x) const {
    return margin_ + (x - x_min_) / (x_max_ - x_min_) * (width_ - 2 * margin_);
}

double Plot::sy(double y) const {
    return height_ - margin_ - (y - y_min_) / (y_max_ - y_min_) * (height_ - 2 * margin_);
}

void Plot::polyline(const std::vector<std::array<double, 2>>& pts, const Style& style) {
    if (pts.size() < 2) return;
    std::string d = "M";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        d += " " + num(sx(pts[i][0])) + " " + num(sy(pts[i][1]));
        if (i == 0) d += " L";
    }
    std::string s = "<path d=\"" + d + "\" fill=\"" + style.fill + "\" stroke=\"" +
                    style.stroke + "\" stroke-width=\"" + num(style.stroke_width) + "\"";
    if (!style.dash.empty()) s += " stroke-dasharray=\"" + style.dash + "\"";
    if (style.opacity < 1.0) s += " stroke-opacity=\"" + num(style.opacity) + "\"";
    s += "/>";
    body_.push_back(s);
}

void Plot::circle(double x, double y, double radius_px, const std::string& fill,
                  double opacity) {
    std::string s = "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) + "\" r=\"" +
                    num(radius_px) + "\" fill=\"" + fill + "\"";
    if (opacity < 1.0) s += " fill-opacity=\"" + num(opacity) + "\"";
    s += "/>";
    body_.push_back(s);
}

void Plot::cell(double x0, double y0, double x1, double y1, const std::string& fill) {
    const double px0 = sx(std::min(x0, x1)), px1 = sx(std::max(x0, x1));
    const double py0 = sy(std::max(y0, y1)), py1 = sy(std::min(y0, y1));
    body_.push_back("<rect x=\"" + num(px0) + "\" y=\"" + num(py0) + "\" width=\"" +
                    num(px1 - px0) + "\" height=\"" + num(py1 - py0) + "\" fill=\"" + fill +
                    "\"/>");
}

void Plot::text(double x, double y, const std::string& s, int font_px,
                const std::string& anchor, const std::string& color) {
    body_.push_back("<text x=\"" + num(sx(x)) + "\" y=\"" + num(sy(y)) +
                    "\" font-size=\"" + std::to_string(font_px) + "\" text-anchor=\"" + anchor +
                    "\" fill=\"" + color + "\" font-family=\"sans-serif\">" + s + "</text>");
}

void Plot::labels(const std::string& x_label, const std::string& y_label,
                  const std::string& title) {
    const double cx = 0.5 * (width_);
    body_.push_back("<text x=\"" + num(cx) + "\" y=\"" + num(height_ - 14.0) +
                    "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\">" +
                    x_label + "</text>");
    body_.push_back("<text x=\"16\" y=\"" + num(0.5 * height_) +
                    "\" font-size=\"14\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                    "transform=\"rotate(-90 16 " +
                    num(0.5 * height_) + ")\">" + y_label + "</text>");
    body_.push_back("<text x=\"" + num(cx) + "\" y=\"22\" font-size=\"15\" "
                    "text-anchor=\"middle\" font-family=\"sans-serif\">" +
                    title + "</text>");
}

void Plot::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
    out << "<rect width=\"" << width_ << "\" height=\"" << height_ << "\" fill=\"white\"/>\n";
    for (const auto& s : body_) out << s << "\n";
    // frame and corner tick labels
    out << "<rect x=\"" << margin_ << "\" y=\"" << margin_ << "\" width=\""
        << width_ - 2 * margin_ << "\" height=\"" << height_ - 2 * margin_
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << margin_ << "\" y=\"" << height_ - margin_ + 16
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << data_num(x_min_) << "</text>\n";
    out << "<text x=\"" << width_ - margin_ << "\" y=\"" << height_ - margin_ + 16
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
        << data_num(x_max_) << "</text>\n";
    out << "<text x=\"" << margin_ - 4 << "\" y=\"" << height_ - margin_
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
        << data_num(y_min_) << "</text>\n";
    out << "<text x=\"" << margin_ - 4 << "\" y=\"" << margin_ + 4
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
        << data_num(y_max_) << "</text>\n";
    out << "</svg>\n";
}

std::string colormap(double t) {
    t = std::clamp(t, 0.0, 1.0);
    // compact viridis-like ramp through fixed anchors
    static const int anchors[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    const double pos = t * 4.0;
    const int k = std::min(3, static_cast<int>(pos));
    const double f = pos - k;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(anchors[k][0] + f * (anchors[k + 1][0] - anchors[k][0])),
                  static_cast<int>(anchors[k][1] + f * (anchors[k + 1][1] - anchors[k][1])),
                  static_cast<int>(anchors[k][2] + f * (anchors[k + 1][2] - anchors[k][2])));
    return buf;
}

} // namespace hhri::svg
