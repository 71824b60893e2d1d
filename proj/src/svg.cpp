#include "inrep/svg.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "inrep/errors.hpp"

namespace inrep {

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill,
                     double opacity) {
  body_ += "<rect x=\"" + format_num(x) + "\" y=\"" + format_num(y) + "\" width=\"" +
           format_num(w) + "\" height=\"" + format_num(h) + "\" fill=\"" + fill +
           "\" fill-opacity=\"" + format_num(opacity) + "\"/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill,
                       double opacity) {
  body_ += "<circle cx=\"" + format_num(cx) + "\" cy=\"" + format_num(cy) + "\" r=\"" +
           format_num(r) + "\" fill=\"" + fill + "\" fill-opacity=\"" +
           format_num(opacity) + "\"/>\n";
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double width) {
  body_ += "<line x1=\"" + format_num(x1) + "\" y1=\"" + format_num(y1) + "\" x2=\"" +
           format_num(x2) + "\" y2=\"" + format_num(y2) + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + format_num(width) + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& stroke, double width) {
  body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
           format_num(width) + "\" points=\"";
  for (const auto& [x, y] : pts) body_ += format_num(x) + "," + format_num(y) + " ";
  body_ += "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& content, double size,
                     const std::string& fill) {
  body_ += "<text x=\"" + format_num(x) + "\" y=\"" + format_num(y) + "\" font-size=\"" +
           format_num(size) + "\" font-family=\"sans-serif\" fill=\"" + fill + "\">" +
           content + "</text>\n";
}

std::string SvgCanvas::finish() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_num(width_) +
         "\" height=\"" + format_num(height_) + "\" viewBox=\"0 0 " + format_num(width_) +
         " " + format_num(height_) + "\">\n" + body_ + "</svg>\n";
}

void SvgCanvas::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw usage_error("SvgCanvas: cannot open " + path);
  out << finish();
}

const std::vector<std::string>& class_palette() {
  static const std::vector<std::string> palette = {
      "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return palette;
}

std::string heat_color(double t) {
  t = std::min(1.0, std::max(0.0, t));
  // Light yellow to dark red.
  const int r = static_cast<int>(255 - 100 * t);
  const int g = static_cast<int>(240 - 200 * t);
  const int b = static_cast<int>(200 - 180 * t);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace inrep
