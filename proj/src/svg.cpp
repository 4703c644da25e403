#include "geodep/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geodep/errors.hpp"

namespace geodep {
namespace {

constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Five-stop approximation of viridis.
std::string colormap(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops{{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(k);
  char buf[16];
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[k][c] + f * (stops[k + 1][c] - stops[k][c])));
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::abs(lo) > 0.0 ? 0.5 * std::abs(lo) : 0.5;
    lo -= pad;
    hi += pad;
  }
}

void require_raster(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& values) {
  if (values.rows() != y.size() || values.cols() != x.size())
    throw ValidationError("raster shape does not match its axes");
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::set_range(double x_min, double x_max, double y_min, double y_max) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) || !std::isfinite(y_max))
    throw ValidationError("plot range must be finite");
  widen(x_min, x_max);
  widen(y_min, y_max);
  x_min_ = x_min;
  x_max_ = x_max;
  y_min_ = y_min;
  y_max_ = y_max;
}

double SvgPlot::px(double x) const { return kLeft + (x - x_min_) / (x_max_ - x_min_) * (kWidth - kLeft - kRight); }
double SvgPlot::py(double y) const { return kHeight - kBottom - (y - y_min_) / (y_max_ - y_min_) * (kHeight - kTop - kBottom); }

void SvgPlot::scatter(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color, double radius) {
  std::ostringstream g;
  g << "<g class=\"points\" fill=\"" << color << "\" fill-opacity=\"0.7\">\n";
  for (Eigen::Index i = 0; i < x.size(); ++i)
    g << "<circle cx=\"" << num(px(x(i))) << "\" cy=\"" << num(py(y(i))) << "\" r=\"" << num(radius) << "\"/>\n";
  g << "</g>\n";
  layers_.push_back(g.str());
}

void SvgPlot::value_points(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& values,
                           double radius) {
  if (values.size() != x.size() || y.size() != x.size()) throw ValidationError("point arrays differ in length");
  if (values.size() == 0) return;
  const double lo = values.minCoeff();
  const double span = values.maxCoeff() - lo;
  std::ostringstream g;
  g << "<g class=\"value-points\" stroke=\"black\" stroke-width=\"0.5\">\n";
  for (Eigen::Index i = 0; i < x.size(); ++i)
    g << "<circle cx=\"" << num(px(x(i))) << "\" cy=\"" << num(py(y(i))) << "\" r=\"" << num(radius) << "\" fill=\""
      << colormap(span > 0.0 ? (values(i) - lo) / span : 0.5) << "\"/>\n";
  g << "</g>\n";
  layers_.push_back(g.str());
}

void SvgPlot::line(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color, double width) {
  std::ostringstream g;
  g << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width)
    << "\" points=\"";
  for (Eigen::Index i = 0; i < x.size(); ++i) g << (i ? " " : "") << num(px(x(i))) << ',' << num(py(y(i)));
  g << "\"/>\n";
  layers_.push_back(g.str());
}

void SvgPlot::heatmap(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& values) {
  require_raster(x, y, values);
  if (values.size() == 0) return;
  const double lo = values.minCoeff();
  const double span = values.maxCoeff() - lo;
  // Cell edges sit halfway between neighbouring centres.
  auto edges = [](const Eigen::VectorXd& c) {
    Eigen::VectorXd e(c.size() + 1);
    const double half = c.size() > 1 ? 0.5 * (c(1) - c(0)) : 0.5;
    e(0) = c(0) - half;
    for (Eigen::Index i = 1; i < c.size(); ++i) e(i) = 0.5 * (c(i - 1) + c(i));
    e(c.size()) = c(c.size() - 1) + (c.size() > 1 ? 0.5 * (c(c.size() - 1) - c(c.size() - 2)) : 0.5);
    return e;
  };
  const Eigen::VectorXd ex = edges(x);
  const Eigen::VectorXd ey = edges(y);
  std::ostringstream g;
  g << "<g class=\"heatmap\" shape-rendering=\"crispEdges\">\n";
  for (Eigen::Index iy = 0; iy < values.rows(); ++iy)
    for (Eigen::Index ix = 0; ix < values.cols(); ++ix) {
      const double x0 = px(ex(ix)), x1 = px(ex(ix + 1));
      const double y0 = py(ey(iy + 1)), y1 = py(ey(iy));
      const double t = span > 0.0 ? (values(iy, ix) - lo) / span : 0.5;
      g << "<rect x=\"" << num(std::min(x0, x1)) << "\" y=\"" << num(std::min(y0, y1)) << "\" width=\""
        << num(std::abs(x1 - x0)) << "\" height=\"" << num(std::abs(y1 - y0)) << "\" fill=\"" << colormap(t)
        << "\"/>\n";
    }
  g << "</g>\n";
  layers_.push_back(g.str());
}

void SvgPlot::contours(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& values,
                       const std::vector<double>& levels, const std::string& color) {
  require_raster(x, y, values);
  std::ostringstream g;
  g << "<g class=\"contours\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\">\n";
  for (double level : levels) {
    std::ostringstream d;
    // Corners in order: (0,0) (1,0) (1,1) (0,1) in (ix, iy) offsets.
    for (Eigen::Index iy = 0; iy + 1 < values.rows(); ++iy)
      for (Eigen::Index ix = 0; ix + 1 < values.cols(); ++ix) {
        const std::array<double, 4> v{values(iy, ix), values(iy, ix + 1), values(iy + 1, ix + 1), values(iy + 1, ix)};
        const std::array<double, 4> cx{x(ix), x(ix + 1), x(ix + 1), x(ix)};
        const std::array<double, 4> cy{y(iy), y(iy), y(iy + 1), y(iy + 1)};
        int mask = 0;
        for (int k = 0; k < 4; ++k)
          if (v[k] >= level) mask |= 1 << k;
        if (mask == 0 || mask == 15) continue;
        // Crossing point on edge k (between corner k and k+1).
        auto cross = [&](int k) {
          const int a = k, b = (k + 1) % 4;
          const double t = (level - v[a]) / (v[b] - v[a]);
          return std::array<double, 2>{px(cx[a] + t * (cx[b] - cx[a])), py(cy[a] + t * (cy[b] - cy[a]))};
        };
        std::vector<int> crossed;
        for (int k = 0; k < 4; ++k)
          if (((mask >> k) & 1) != ((mask >> ((k + 1) % 4)) & 1)) crossed.push_back(k);
        std::vector<std::pair<int, int>> segments;
        if (crossed.size() == 2) {
          segments.emplace_back(crossed[0], crossed[1]);
        } else {
          // Saddle: the cell-centre average decides which corners connect.
          const bool centre_high = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= level;
          const bool corner0_high = mask & 1;
          if (centre_high == corner0_high) {
            segments.emplace_back(0, 1);
            segments.emplace_back(2, 3);
          } else {
            segments.emplace_back(3, 0);
            segments.emplace_back(1, 2);
          }
        }
        for (const auto& [a, b] : segments) {
          const auto p = cross(a);
          const auto q = cross(b);
          d << "M" << num(p[0]) << ' ' << num(p[1]) << "L" << num(q[0]) << ' ' << num(q[1]);
        }
      }
    const std::string path = d.str();
    if (!path.empty()) g << "<path data-level=\"" << tick_label(level) << "\" d=\"" << path << "\"/>\n";
  }
  g << "</g>\n";
  layers_.push_back(g.str());
}

std::string SvgPlot::str() const {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  s << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  s << "<text x=\"400\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">"
    << escape(title_) << "</text>\n";
  for (const auto& layer : layers_) s << layer;

  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  s << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y0) << "\"/>\n";
  s << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y1) << "\"/>\n";
  s << "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"12\">\n";
  constexpr int kTicks = 5;
  for (int k = 0; k <= kTicks; ++k) {
    const double xv = x_min_ + (x_max_ - x_min_) * k / kTicks;
    const double yv = y_min_ + (y_max_ - y_min_) * k / kTicks;
    s << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(y0 + 20) << "\" text-anchor=\"middle\">" << tick_label(xv)
      << "</text>\n";
    s << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick_label(yv)
      << "</text>\n";
  }
  s << "</g>\n";
  s << "<text x=\"" << num(0.5 * (x0 + x1)) << "\" y=\"590\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">"
    << escape(x_label_) << "</text>\n";
  s << "<text x=\"20\" y=\"" << num(0.5 * (y0 + y1)) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\" transform=\"rotate(-90 20 "
    << num(0.5 * (y0 + y1)) << ")\">" << escape(y_label_) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

void SvgPlot::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << str();
}

std::vector<double> contour_levels(const Eigen::MatrixXd& values, int count) {
  std::vector<double> levels;
  if (values.size() == 0 || count < 1) return levels;
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (!(hi > lo)) return levels;
  for (int k = 1; k <= count; ++k) levels.push_back(lo + (hi - lo) * k / (count + 1));
  return levels;
}

}  // namespace geodep
