#include "crownflow/svg.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace crownflow::svg {

Canvas::Canvas(double xmin, double xmax, double ymin, double ymax, int pixels)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {
  double span = std::max(xmax - xmin, ymax - ymin);
  scale_ = pixels / span;
  width_px_ = int(std::lround((xmax - xmin) * scale_));
  height_px_ = int(std::lround((ymax - ymin) * scale_));
}

double Canvas::map_x(double x) const { return (x - xmin_) * scale_; }
double Canvas::map_y(double y) const { return (ymax_ - y) * scale_; }

void Canvas::polyline(const std::vector<cxd>& pts, const std::string& color,
                      double width) {
  if (pts.size() < 2) return;
  std::ostringstream os;
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
     << width << "\" points=\"";
  for (const cxd& p : pts)
    os << map_x(p.real()) << "," << map_y(p.imag()) << " ";
  os << "\"/>\n";
  body_ += os.str();
}

void Canvas::circle(cxd center, double radius, const std::string& color,
                    double width, bool fill) {
  std::ostringstream os;
  os << "<circle cx=\"" << map_x(center.real()) << "\" cy=\""
     << map_y(center.imag()) << "\" r=\"" << radius * scale_ << "\" stroke=\""
     << color << "\" stroke-width=\"" << width << "\" fill=\""
     << (fill ? color : std::string("none")) << "\"/>\n";
  body_ += os.str();
}

void Canvas::dot(cxd center, double radius, const std::string& color) {
  std::ostringstream os;
  os << "<circle cx=\"" << map_x(center.real()) << "\" cy=\""
     << map_y(center.imag()) << "\" r=\"" << radius << "\" fill=\"" << color
     << "\"/>\n";
  body_ += os.str();
}

void Canvas::comment(const std::string& text) {
  body_ += "<!-- " + text + " -->\n";
}

std::string Canvas::str() const {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_px_
     << "\" height=\"" << height_px_ << "\" viewBox=\"0 0 " << width_px_ << " "
     << height_px_ << "\">\n"
     << body_ << "</svg>\n";
  return os.str();
}

void Canvas::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("svg: cannot write " + path);
  out << str();
}

}  // namespace crownflow::svg
