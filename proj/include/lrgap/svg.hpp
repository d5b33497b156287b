#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lrgap::svg {

/// Deterministic SVG assembly: fixed-precision coordinates, no timestamps,
/// elements appear in insertion order.
class Document {
 public:
  Document(int width, int height);

  void rect(double x, double y, double w, double h, const std::string& fill);
  void ellipse(double cx, double cy, double rx, double ry, const std::string& stroke,
               double stroke_width, const std::string& dash = "");
  void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                double stroke_width);
  void circle(double cx, double cy, double r, const std::string& fill);
  void text(double x, double y, const std::string& content, int font_size);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width);

  /// Starts a group clipped to the given box; pair with close_group().
  void open_clip_group(const std::string& id, double x, double y, double w, double h);
  void close_group();

  std::string str() const;

 private:
  int width_;
  int height_;
  std::string body_;
};

}  // namespace lrgap::svg
