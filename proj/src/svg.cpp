#include "hiersim/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "hiersim/errors.hpp"

namespace hiersim {

namespace {

struct Mapper {
  double scale = 60.0;  // px per world unit
  double pad = 20.0;
  Rect world;

  double x(double wx) const { return pad + (wx - world.xmin) * scale; }
  double y(double wy) const { return pad + (world.ymax - wy) * scale; }
  double len(double w) const { return w * scale; }
  double width() const { return 2 * pad + (world.xmax - world.xmin) * scale; }
  double height() const { return 2 * pad + (world.ymax - world.ymin) * scale; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void polyline(std::ofstream& out, const Mapper& map,
              const std::vector<Vector>& pts, const std::string& style,
              std::size_t stride) {
  out << "  <polyline fill=\"none\" " << style << " points=\"";
  for (std::size_t k = 0; k < pts.size(); k += stride) {
    out << fmt(map.x(pts[k](0))) << ',' << fmt(map.y(pts[k](1))) << ' ';
  }
  if (!pts.empty() && (pts.size() - 1) % stride != 0) {
    const Vector& last = pts.back();
    out << fmt(map.x(last(0))) << ',' << fmt(map.y(last(1)));
  }
  out << "\"/>\n";
}

Rect trajectory_extent(const Trace& trace, double eps) {
  Rect r{1e300, 1e300, -1e300, -1e300};
  auto grow = [&r](const Vector& p, double margin) {
    r.xmin = std::min(r.xmin, p(0) - margin);
    r.ymin = std::min(r.ymin, p(1) - margin);
    r.xmax = std::max(r.xmax, p(0) + margin);
    r.ymax = std::max(r.ymax, p(1) + margin);
  };
  for (const Vector& p : trace.y1) grow(p, 0.0);
  for (const Vector& p : trace.y2) grow(p, eps);
  return r;
}

}  // namespace

void write_scene_svg(const std::string& path,
                     const std::optional<Workspace>& workspace,
                     const Trace& trace, double eps) {
  if (trace.size() == 0 || trace.y1[0].size() != 2) {
    throw Error("write_scene_svg: needs a 2D output trace");
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);

  Mapper map;
  map.world = workspace ? workspace->bounds : trajectory_extent(trace, eps);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << fmt(map.width()) << "\" height=\"" << fmt(map.height())
      << "\" viewBox=\"0 0 " << fmt(map.width()) << ' ' << fmt(map.height())
      << "\">\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << fmt(map.width())
      << "\" height=\"" << fmt(map.height()) << "\" fill=\"white\"/>\n";
  out << "  <rect x=\"" << fmt(map.x(map.world.xmin)) << "\" y=\""
      << fmt(map.y(map.world.ymax)) << "\" width=\""
      << fmt(map.len(map.world.width())) << "\" height=\""
      << fmt(map.len(map.world.height()))
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

  if (workspace) {
    for (const Rect& o : workspace->obstacles) {
      out << "  <rect x=\"" << fmt(map.x(o.xmin)) << "\" y=\""
          << fmt(map.y(o.ymax)) << "\" width=\"" << fmt(map.len(o.width()))
          << "\" height=\"" << fmt(map.len(o.height()))
          << "\" fill=\"#808080\"/>\n";
    }
    out << "  <circle cx=\"" << fmt(map.x(workspace->goal.x())) << "\" cy=\""
        << fmt(map.y(workspace->goal.y())) << "\" r=\""
        << fmt(map.len(workspace->goal_radius))
        << "\" fill=\"#f5d76e\" stroke=\"#b8960c\"/>\n";
  }

  // Certified tube: the abstract output stroked with width 2*eps (round
  // caps/joins make the stroke the exact Minkowski disc sweep).
  const std::size_t stride = std::max<std::size_t>(1, trace.size() / 4000);
  if (eps > 0.0) {
    polyline(out, map, trace.y2,
             "stroke=\"#b5e7b5\" stroke-opacity=\"0.9\" stroke-width=\"" +
                 fmt(map.len(2.0 * eps)) +
                 "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"",
             stride);
  }
  polyline(out, map, trace.y2,
           "stroke=\"#1f4fbf\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"",
           stride);
  polyline(out, map, trace.y1, "stroke=\"#c62828\" stroke-width=\"1.5\"",
           stride);

  for (const auto& ev : trace.events) {
    const auto k = static_cast<std::size_t>(ev.step);
    if (k < trace.size()) {
      out << "  <circle cx=\"" << fmt(map.x(trace.y1[k](0))) << "\" cy=\""
          << fmt(map.y(trace.y1[k](1)))
          << "\" r=\"3\" fill=\"#c62828\" stroke=\"none\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace hiersim
