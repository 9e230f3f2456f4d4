#include "rbfgen/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rbfgen/errors.hpp"

namespace rbfgen {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 48.0;

// Fixed-precision pixel coordinates keep the output byte-stable while
// staying far below visible resolution.
std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Tick labels want the short human form, not the full round-trip digits.
std::string tick_label(double v) {
  if (std::fabs(v) < 1e-12) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::absorb(const std::vector<double>& xs, const std::vector<double>& ys) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw DomainError("svg plot: non-finite coordinate");
    }
    if (!has_data_) {
      xmin_ = xmax_ = xs[i];
      ymin_ = ymax_ = ys[i];
      has_data_ = true;
    } else {
      xmin_ = std::min(xmin_, xs[i]);
      xmax_ = std::max(xmax_, xs[i]);
      ymin_ = std::min(ymin_, ys[i]);
      ymax_ = std::max(ymax_, ys[i]);
    }
  }
}

void SvgPlot::add_band(const std::vector<double>& xs, const std::vector<double>& lo,
                       const std::vector<double>& hi, const std::string& color,
                       double opacity) {
  if (xs.size() != lo.size() || xs.size() != hi.size()) {
    throw ShapeError("svg band: grid and bounds must have equal length");
  }
  if (xs.empty()) return;
  absorb(xs, lo);
  absorb(xs, hi);
  Series s;
  s.kind = Series::Kind::Band;
  s.xs = xs;
  s.ys = lo;
  s.ys2 = hi;
  s.color = color;
  s.opacity = opacity;
  series_.push_back(std::move(s));
}

void SvgPlot::add_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                           const std::string& color, double width,
                           const std::string& dash) {
  if (xs.size() != ys.size()) {
    throw ShapeError("svg polyline: xs and ys must have equal length");
  }
  if (xs.empty()) return;
  absorb(xs, ys);
  Series s;
  s.kind = Series::Kind::Line;
  s.xs = xs;
  s.ys = ys;
  s.color = color;
  s.width = width;
  s.dash = dash;
  series_.push_back(std::move(s));
}

void SvgPlot::add_points(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::string& color, double radius) {
  if (xs.size() != ys.size()) {
    throw ShapeError("svg points: xs and ys must have equal length");
  }
  if (xs.empty()) return;
  absorb(xs, ys);
  Series s;
  s.kind = Series::Kind::Points;
  s.xs = xs;
  s.ys = ys;
  s.color = color;
  s.width = radius;
  series_.push_back(std::move(s));
}

void SvgPlot::add_legend(const std::string& label, const std::string& color) {
  legend_.emplace_back(label, color);
}

std::string SvgPlot::render() const {
  double xmin = xmin_, xmax = xmax_, ymin = ymin_, ymax = ymax_;
  if (!has_data_) {
    xmin = ymin = 0.0;
    xmax = ymax = 1.0;
  }
  // Pad degenerate ranges so the mapping below stays finite.
  if (xmax - xmin <= 0.0) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin <= 0.0) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  const auto sx = [&](double x) {
    return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w;
  };
  const auto sy = [&](double y) {
    return kMarginTop + (ymax - y) / (ymax - ymin) * plot_h;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) +
         "\" height=\"" + px(kHeight) + "\" viewBox=\"0 0 " + px(kWidth) + " " +
         px(kHeight) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + px(kWidth) + "\" height=\"" +
         px(kHeight) + "\" fill=\"white\"/>\n";

  // Gridlines and tick labels, five per axis.
  constexpr int kTicks = 5;
  for (int t = 0; t < kTicks; ++t) {
    const double fx = static_cast<double>(t) / (kTicks - 1);
    const double xv = xmin + fx * (xmax - xmin);
    const double yv = ymin + fx * (ymax - ymin);
    out += "<line x1=\"" + px(sx(xv)) + "\" y1=\"" + px(kMarginTop) + "\" x2=\"" +
           px(sx(xv)) + "\" y2=\"" + px(kMarginTop + plot_h) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + px(kMarginLeft) + "\" y1=\"" + px(sy(yv)) + "\" x2=\"" +
           px(kMarginLeft + plot_w) + "\" y2=\"" + px(sy(yv)) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + px(sx(xv)) + "\" y=\"" + px(kMarginTop + plot_h + 18.0) +
           "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#444444\">" +
           tick_label(xv) + "</text>\n";
    out += "<text x=\"" + px(kMarginLeft - 8.0) + "\" y=\"" + px(sy(yv) + 4.0) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"#444444\">" +
           tick_label(yv) + "</text>\n";
  }

  for (const auto& s : series_) {
    if (s.kind == Series::Kind::Band) {
      std::string pts;
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        pts += px(sx(s.xs[i])) + "," + px(sy(s.ys2[i])) + " ";
      }
      for (std::size_t i = s.xs.size(); i-- > 0;) {
        pts += px(sx(s.xs[i])) + "," + px(sy(s.ys[i])) + " ";
      }
      pts.pop_back();
      out += "<polygon points=\"" + pts + "\" fill=\"" + s.color +
             "\" fill-opacity=\"" + px(s.opacity) + "\" stroke=\"none\"/>\n";
    } else if (s.kind == Series::Kind::Line) {
      std::string pts;
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        pts += px(sx(s.xs[i])) + "," + px(sy(s.ys[i])) + " ";
      }
      pts.pop_back();
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"" + px(s.width) + "\"";
      if (!s.dash.empty()) out += " stroke-dasharray=\"" + s.dash + "\"";
      out += "/>\n";
    } else {
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        out += "<circle cx=\"" + px(sx(s.xs[i])) + "\" cy=\"" + px(sy(s.ys[i])) +
               "\" r=\"" + px(s.width) + "\" fill=\"" + s.color + "\"/>\n";
      }
    }
  }

  // Frame on top of the data so curves never overdraw the axes.
  out += "<rect x=\"" + px(kMarginLeft) + "\" y=\"" + px(kMarginTop) +
         "\" width=\"" + px(plot_w) + "\" height=\"" + px(plot_h) +
         "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";

  if (!title_.empty()) {
    out += "<text x=\"" + px(kWidth / 2.0) + "\" y=\"" + px(kMarginTop - 14.0) +
           "\" font-size=\"15\" text-anchor=\"middle\" fill=\"#111111\">" +
           escape_text(title_) + "</text>\n";
  }
  if (!xlabel_.empty()) {
    out += "<text x=\"" + px(kMarginLeft + plot_w / 2.0) + "\" y=\"" +
           px(kHeight - 10.0) + "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111111\">" +
           escape_text(xlabel_) + "</text>\n";
  }
  if (!ylabel_.empty()) {
    out += "<text x=\"16\" y=\"" + px(kMarginTop + plot_h / 2.0) +
           "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#111111\" transform=\"rotate(-90 16 " +
           px(kMarginTop + plot_h / 2.0) + ")\">" + escape_text(ylabel_) + "</text>\n";
  }

  double ly = kMarginTop + 14.0;
  for (const auto& [label, color] : legend_) {
    const double lx = kMarginLeft + plot_w - 150.0;
    out += "<rect x=\"" + px(lx) + "\" y=\"" + px(ly - 9.0) +
           "\" width=\"18\" height=\"9\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + px(lx + 24.0) + "\" y=\"" + px(ly) +
           "\" font-size=\"11\" fill=\"#111111\">" + escape_text(label) + "</text>\n";
    ly += 16.0;
  }

  out += "</svg>\n";
  return out;
}

}  // namespace rbfgen
