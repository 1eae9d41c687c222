#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "availsim/util.hpp"

namespace availsim {

// Minimal SVG builder. Coordinates are emitted with shortest round-trip
// formatting, so equal inputs give byte-identical documents.
class SvgCanvas {
  public:
    SvgCanvas(double width, double height) : width_(width), height_(height) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0, const std::string& dash = "") {
        body_ += "  <line x1=\"" + fmt_double(x1) + "\" y1=\"" + fmt_double(y1) + "\" x2=\"" +
                 fmt_double(x2) + "\" y2=\"" + fmt_double(y2) + "\" stroke=\"" + stroke +
                 "\" stroke-width=\"" + fmt_double(stroke_width) + "\"";
        if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
        body_ += " />\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                  double stroke_width = 1.5) {
        body_ += "  <polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
                 fmt_double(stroke_width) + "\" points=\"";
        for (size_t i = 0; i < points.size(); ++i) {
            if (i) body_ += " ";
            body_ += fmt_double(points[i].first) + "," + fmt_double(points[i].second);
        }
        body_ += "\" />\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill) {
        body_ += "  <circle cx=\"" + fmt_double(cx) + "\" cy=\"" + fmt_double(cy) + "\" r=\"" +
                 fmt_double(r) + "\" fill=\"" + fill + "\" />\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "", double stroke_width = 1.0) {
        body_ += "  <rect x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(y) + "\" width=\"" +
                 fmt_double(w) + "\" height=\"" + fmt_double(h) + "\" fill=\"" + fill + "\"";
        if (!stroke.empty()) {
            body_ += " stroke=\"" + stroke + "\" stroke-width=\"" + fmt_double(stroke_width) + "\"";
        }
        body_ += " />\n";
    }

    void text(double x, double y, const std::string& content, double size = 12.0,
              const std::string& anchor = "start", const std::string& fill = "#333333") {
        body_ += "  <text x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(y) + "\" font-size=\"" +
                 fmt_double(size) +
                 "\" font-family=\"Helvetica, Arial, sans-serif\" text-anchor=\"" + anchor +
                 "\" fill=\"" + fill + "\">" + escape(content) + "</text>\n";
    }

    std::string finish() const {
        std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(width_) +
                          "\" height=\"" + fmt_double(height_) + "\" viewBox=\"0 0 " +
                          fmt_double(width_) + " " + fmt_double(height_) + "\">\n";
        out += "  <rect x=\"0\" y=\"0\" width=\"" + fmt_double(width_) + "\" height=\"" +
               fmt_double(height_) + "\" fill=\"#ffffff\" />\n";
        out += body_;
        out += "</svg>\n";
        return out;
    }

    double width() const { return width_; }
    double height() const { return height_; }

  private:
    static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                default: out += c;
            }
        }
        return out;
    }

    double width_;
    double height_;
    std::string body_;
};

// Linear data-to-pixel mapping for one axis.
struct AxisScale {
    double data_min = 0.0;
    double data_max = 1.0;
    double pix_min = 0.0;
    double pix_max = 1.0;

    double operator()(double v) const {
        if (data_max == data_min) return (pix_min + pix_max) / 2.0;
        return pix_min + (v - data_min) / (data_max - data_min) * (pix_max - pix_min);
    }
};

namespace palette {
inline constexpr const char* all_blocking = "#1f77b4";
inline constexpr const char* async_sem = "#ff7f0e";
inline constexpr const char* live = "#2f2f2f";
inline constexpr const char* grid = "#dddddd";
inline constexpr const char* axis = "#555555";
} // namespace palette

// Fixed three-decimal labels for tick marks and table-style annotations.
inline std::string fmt_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s = buf;
    if (s == "-0.000") s = "0.000";
    return s;
}

} // namespace availsim
