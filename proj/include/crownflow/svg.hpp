#pragma once

#include <string>
#include <vector>

#include "crownflow/common.hpp"

namespace crownflow::svg {

// Minimal SVG writer for trajectory and disk figures.  Coordinates are given
// in math convention (y up); the writer flips into screen space.
class Canvas {
public:
  Canvas(double xmin, double xmax, double ymin, double ymax, int pixels = 800);

  void polyline(const std::vector<cxd>& pts, const std::string& color,
                double width = 1.0);
  void circle(cxd center, double radius, const std::string& color,
              double width = 1.0, bool fill = false);
  void dot(cxd center, double radius, const std::string& color);
  void comment(const std::string& text);

  std::string str() const;
  void write(const std::string& path) const;

private:
  double map_x(double x) const;
  double map_y(double y) const;
  double scale_;
  double xmin_, xmax_, ymin_, ymax_;
  int width_px_, height_px_;
  std::string body_;
};

}  // namespace crownflow::svg
