#pragma once

#include <string>
#include <vector>

namespace rbfgen {

// Minimal line-plot builder emitting a self-contained SVG document.
// Elements are layered in insertion order (bands first keeps them under
// the curves); coordinates are data-space and mapped to a fixed 720x480
// viewport with margins, axes, and tick labels at render time.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel);

  // Shaded region between two curves sharing the x grid (confidence band).
  void add_band(const std::vector<double>& xs, const std::vector<double>& lo,
                const std::vector<double>& hi, const std::string& color,
                double opacity);
  void add_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::string& color, double width,
                    const std::string& dash = "");
  void add_points(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& color, double radius);
  // Legend entry; drawn as a swatch + label in the top-right corner.
  void add_legend(const std::string& label, const std::string& color);

  std::string render() const;

 private:
  struct Series {
    enum class Kind { Band, Line, Points } kind;
    std::vector<double> xs, ys, ys2;
    std::string color;
    double width = 1.0;
    double opacity = 1.0;
    std::string dash;
  };

  void absorb(const std::vector<double>& xs, const std::vector<double>& ys);

  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<std::pair<std::string, std::string>> legend_;
  double xmin_ = 0.0, xmax_ = 0.0, ymin_ = 0.0, ymax_ = 0.0;
  bool has_data_ = false;
};

}  // namespace rbfgen
