#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geodep {

/// Plot canvas with a fixed 800x600 viewBox. Data coordinates are mapped
/// into the plotting area once the axis ranges are set.
class SvgPlot {
 public:
  static constexpr double kWidth = 800.0;
  static constexpr double kHeight = 600.0;

  SvgPlot(std::string title, std::string x_label, std::string y_label);

  /// Sets the data ranges; degenerate ranges are widened around their value.
  void set_range(double x_min, double x_max, double y_min, double y_max);

  void scatter(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color, double radius = 2.5);
  /// Points coloured by `values` on the heat-map colour scale.
  void value_points(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& values,
                    double radius = 5.0);
  void line(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const std::string& color, double width = 2.0);

  /// Row-major raster: values(iy, ix) covers cell centred at (x(ix), y(iy)).
  void heatmap(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& values);

  /// Iso-lines of a raster (same layout as heatmap) by marching squares.
  void contours(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& values,
                const std::vector<double>& levels, const std::string& color);

  std::string str() const;
  void save(const std::string& path) const;

 private:
  double px(double x) const;
  double py(double y) const;

  std::string title_;
  std::string x_label_;
  std::string y_label_;
  double x_min_ = 0.0, x_max_ = 1.0, y_min_ = 0.0, y_max_ = 1.0;
  std::vector<std::string> layers_;
};

/// Evenly spaced interior levels between the raster minimum and maximum.
std::vector<double> contour_levels(const Eigen::MatrixXd& values, int count);

}  // namespace geodep
