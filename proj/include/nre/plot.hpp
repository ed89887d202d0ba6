#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nre/dataset.hpp"
#include "nre/ensemble.hpp"
#include "nre/error.hpp"

// Two-dimensional decision-region rendering.
namespace nre::plot {

struct Bounds {
  double x_min = -1.0, x_max = 1.0;
  double y_min = -1.0, y_max = 1.0;
};

// Bounding box of the data padded by `pad` of its extent on every side.
inline Bounds data_bounds(const Dataset& d, double pad = 0.05) {
  if (d.cols() != 2) throw DataError(fmt::format("plotting needs exactly 2 features, dataset has {}", d.cols()));
  Bounds b{d.at(0, 0), d.at(0, 0), d.at(0, 1), d.at(0, 1)};
  for (std::size_t i = 0; i < d.rows(); ++i) {
    b.x_min = std::min(b.x_min, d.at(i, 0));
    b.x_max = std::max(b.x_max, d.at(i, 0));
    b.y_min = std::min(b.y_min, d.at(i, 1));
    b.y_max = std::max(b.y_max, d.at(i, 1));
  }
  const double dx = std::max(b.x_max - b.x_min, 1e-9) * pad;
  const double dy = std::max(b.y_max - b.y_min, 1e-9) * pad;
  return {b.x_min - dx, b.x_max + dx, b.y_min - dy, b.y_max + dy};
}

// Sign of the model score (or of one rule's output) at every cell centre:
// +1, -1, or 0 where the value is exactly zero (outside every support).
struct Grid {
  Bounds bounds;
  std::size_t resolution = 0;
  std::vector<std::int8_t> cells;  // row-major, row 0 at y_min

  double cell_width() const { return (bounds.x_max - bounds.x_min) / static_cast<double>(resolution); }
  double cell_height() const { return (bounds.y_max - bounds.y_min) / static_cast<double>(resolution); }
  std::array<double, 2> center(std::size_t ix, std::size_t iy) const {
    return {bounds.x_min + (static_cast<double>(ix) + 0.5) * cell_width(),
            bounds.y_min + (static_cast<double>(iy) + 0.5) * cell_height()};
  }
  std::int8_t at(std::size_t ix, std::size_t iy) const { return cells[iy * resolution + ix]; }
  std::size_t count(std::int8_t v) const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), v)); }
};

inline Grid classify_grid(const NREModel& m, const Bounds& bounds, std::size_t resolution,
                          std::optional<std::size_t> rule_index = std::nullopt) {
  if (m.input_dim() != 2) throw DataError(fmt::format("plotting needs a 2-feature model, got {}", m.input_dim()));
  if (resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");
  if (rule_index && *rule_index >= m.rules.size()) {
    throw std::out_of_range(fmt::format("rule index {} out of range (model has {} rules)", *rule_index, m.rules.size()));
  }
  Grid g{bounds, resolution, std::vector<std::int8_t>(resolution * resolution, 0)};
  std::vector<double> z(2);
  for (std::size_t iy = 0; iy < resolution; ++iy) {
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      const auto p = g.center(ix, iy);
      double v = 0.0;
      if (rule_index) {
        m.standardization.apply(p, z);
        v = rule_output(m.rules[*rule_index], z);
      } else {
        v = nre_score(m, p);
      }
      g.cells[iy * resolution + ix] = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    }
  }
  return g;
}

namespace detail {

using Point = std::array<double, 2>;

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; counter-clockwise, no collinear points.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Strictly inside a counter-clockwise hull, at least `margin` (in cross
// product units) away from every edge line.
inline bool strictly_inside(const std::vector<Point>& hull, const Point& p, double margin) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (!(cross(hull[i], hull[(i + 1) % hull.size()], p) > margin)) return false;
  }
  return true;
}

}  // namespace detail

// A grid region is accepted as convex when every cell centre lying strictly
// inside the convex hull of the region's cell centres belongs to the region.
// For a truly convex support this holds exactly: the hull of points in a
// convex set stays inside the set. `region` 0 selects all non-zero cells,
// +1/-1 selects cells of that sign.
inline bool is_grid_convex(const Grid& g, std::int8_t region = 0) {
  auto member = [&](std::int8_t v) { return region == 0 ? v != 0 : v == region; };
  std::vector<detail::Point> pts;
  for (std::size_t iy = 0; iy < g.resolution; ++iy) {
    for (std::size_t ix = 0; ix < g.resolution; ++ix) {
      if (member(g.at(ix, iy))) pts.push_back(g.center(ix, iy));
    }
  }
  const auto hull = detail::convex_hull(pts);
  if (hull.size() < 3) return true;
  const double tol = 1e-9 * g.cell_width() * g.cell_height();
  for (std::size_t iy = 0; iy < g.resolution; ++iy) {
    for (std::size_t ix = 0; ix < g.resolution; ++ix) {
      if (!member(g.at(ix, iy)) && detail::strictly_inside(hull, g.center(ix, iy), tol)) return false;
    }
  }
  return true;
}

struct SvgOptions {
  std::size_t width = 480;
  std::size_t height = 480;
  double point_radius = 2.0;
  std::string title;
};

// Regions first (one rect per non-zero cell), then the data points on top.
inline std::string render_svg(const Grid& g, const Dataset& d, const SvgOptions& opt = {}) {
  if (d.cols() != 2) throw DataError("plotting needs exactly 2 features");
  const auto& b = g.bounds;
  const double sx = static_cast<double>(opt.width) / (b.x_max - b.x_min);
  const double sy = static_cast<double>(opt.height) / (b.y_max - b.y_min);
  auto px = [&](double x) { return (x - b.x_min) * sx; };
  auto py = [&](double y) { return static_cast<double>(opt.height) - (y - b.y_min) * sy; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", opt.width,
      opt.height, opt.width, opt.height);
  if (!opt.title.empty()) out += fmt::format("<title>{}</title>\n", opt.title);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", opt.width, opt.height);

  out += "<g id=\"regions\" shape-rendering=\"crispEdges\">\n";
  const double cw = g.cell_width() * sx;
  const double ch = g.cell_height() * sy;
  for (std::size_t iy = 0; iy < g.resolution; ++iy) {
    for (std::size_t ix = 0; ix < g.resolution; ++ix) {
      const auto v = g.at(ix, iy);
      if (v == 0) continue;
      const double x0 = b.x_min + static_cast<double>(ix) * g.cell_width();
      const double y1 = b.y_min + static_cast<double>(iy + 1) * g.cell_height();
      out += fmt::format("<rect class=\"{}\" x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"{}\"/>\n",
                         v > 0 ? "pos" : "neg", px(x0), py(y1), cw, ch, v > 0 ? "#c6dbef" : "#fcbba1");
    }
  }
  out += "</g>\n<g id=\"points\">\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const bool pos = d.label(i) == 1;
    out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"{}\" fill=\"{}\"/>\n", px(d.at(i, 0)), py(d.at(i, 1)),
                       opt.point_radius, pos ? "#2166ac" : "#b2182b");
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace nre::plot
