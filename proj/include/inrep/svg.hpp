#pragma once

#include <string>
#include <vector>

namespace inrep {

// Minimal static-SVG writer with deterministic number formatting.
class SvgCanvas {
public:
  SvgCanvas(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            double opacity = 1.0);
  void circle(double cx, double cy, double r, const std::string& fill,
              double opacity = 1.0);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, double width = 1.0);
  void text(double x, double y, const std::string& content, double size = 12.0,
            const std::string& fill = "#333333");

  std::string finish() const;
  void save(const std::string& path) const;

private:
  double width_, height_;
  std::string body_;
};

// Maps data coordinates into a pixel viewport.
struct AxisMap {
  double x_min, x_max, y_min, y_max;        // data range
  double px, py, pw, ph;                    // pixel viewport
  double x(double v) const { return px + (v - x_min) / (x_max - x_min) * pw; }
  double y(double v) const { return py + ph - (v - y_min) / (y_max - y_min) * ph; }
};

// Shared class palette for scatter plots.
const std::vector<std::string>& class_palette();

// Monotone colormap (light to dark) for contour cells, t in [0,1].
std::string heat_color(double t);

std::string format_num(double v);

}  // namespace inrep
