#include "svg_plot.hpp"

#include <augwm/csv.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace augwm::app {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 60.0;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string px(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" + px(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + px(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle") {
  return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

// Dark blue (low) to yellow (high).
std::string color(double t) {
  static constexpr std::array<std::array<double, 3>, 3> stops = {{{49, 54, 149}, {116, 173, 209}, {254, 224, 144}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  const double pos = t * 2.0;
  const auto i = static_cast<std::size_t>(std::min(pos, 1.0 - 1e-12) + (pos >= 1.0 ? 1.0 : 0.0));
  const std::size_t lo = std::min<std::size_t>(i, 1);
  const double f = pos - static_cast<double>(lo);
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[lo][0] + f * (stops[lo + 1][0] - stops[lo][0])),
                static_cast<int>(stops[lo][1] + f * (stops[lo + 1][1] - stops[lo][1])),
                static_cast<int>(stops[lo][2] + f * (stops[lo + 1][2] - stops[lo][2])));
  return buf;
}

std::pair<double, double> range_of(const std::vector<double>& v) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi - lo < 1e-12) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

}  // namespace

std::string svg_heatmap(const std::string& title, const std::vector<double>& row_labels,
                        const std::vector<double>& col_labels, const std::vector<std::vector<double>>& values,
                        const std::string& row_name, const std::string& col_name) {
  std::vector<double> flat;
  for (const auto& row : values) flat.insert(flat.end(), row.begin(), row.end());
  const auto [lo, hi] = range_of(flat);
  const double w = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(col_labels.size(), 1));
  const double h = (kHeight - kTop - kBottom) / static_cast<double>(std::max<std::size_t>(row_labels.size(), 1));
  std::string s = header(title);
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < values[i].size(); ++j) {
      const double v = values[i][j];
      const double x = kLeft + w * static_cast<double>(j);
      const double y = kTop + h * static_cast<double>(i);
      s += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(w) + "\" height=\"" + px(h) + "\" fill=\"" +
           color((v - lo) / (hi - lo)) + "\" stroke=\"white\"/>\n";
      s += text(x + w / 2, y + h / 2 + 4, num(v));
    }
    s += text(kLeft - 8, kTop + h * (static_cast<double>(i) + 0.5) + 4, num(row_labels[i]), "end");
  }
  for (std::size_t j = 0; j < col_labels.size(); ++j)
    s += text(kLeft + w * (static_cast<double>(j) + 0.5), kHeight - kBottom + 18, num(col_labels[j]));
  s += text(kLeft + (kWidth - kLeft - kRight) / 2, kHeight - 14, col_name);
  s += "<text x=\"18\" y=\"" + px(kTop + (kHeight - kTop - kBottom) / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + px(kTop + (kHeight - kTop - kBottom) / 2) + ")\">" +
       escape(row_name) + "</text>\n";
  return s + "</svg>\n";
}

std::string svg_bars(const std::string& title, const std::vector<std::string>& labels, const std::vector<double>& values) {
  auto [lo, hi] = range_of(values);
  lo = std::min(lo, 0.0);
  hi = std::max(hi, 0.0);
  const double plot_h = kHeight - kTop - kBottom;
  const auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(values.size(), 1));
  std::string s = header(title);
  const double zero = y_of(0.0);
  s += "<line x1=\"" + px(kLeft) + "\" x2=\"" + px(kWidth - kRight) + "\" y1=\"" + px(zero) + "\" y2=\"" + px(zero) +
       "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? values[i] : 0.0;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double top = std::min(y_of(v), zero);
    s += "<rect x=\"" + px(x) + "\" y=\"" + px(top) + "\" width=\"" + px(slot * 0.7) + "\" height=\"" +
         px(std::abs(y_of(v) - zero)) + "\" fill=\"#4575b4\"/>\n";
    s += text(x + slot * 0.35, kHeight - kBottom + 18, labels[i]);
    s += text(x + slot * 0.35, (v < 0 ? top + std::abs(y_of(v) - zero) + 14 : top - 4), num(values[i]));
  }
  s += text(kLeft - 8, kTop + 4, num(hi), "end");
  s += text(kLeft - 8, kTop + plot_h + 4, num(lo), "end");
  return s + "</svg>\n";
}

std::string svg_lines(const std::string& title, const std::vector<Series>& series, double marker_x) {
  static constexpr std::array<const char*, 4> palette = {"#d73027", "#4575b4", "#1a9850", "#984ea3"};
  std::vector<double> all;
  std::size_t n = 1;
  for (const auto& sr : series) {
    all.insert(all.end(), sr.y.begin(), sr.y.end());
    n = std::max(n, sr.y.size());
  }
  const auto [lo, hi] = range_of(all);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto x_of = [&](double x) { return kLeft + plot_w * (x - 1.0) / std::max(1.0, static_cast<double>(n) - 1.0); };
  const auto y_of = [&](double y) { return kTop + plot_h * (hi - y) / (hi - lo); };
  std::string s = header(title);
  s += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" + px(plot_w) + "\" height=\"" + px(plot_h) +
       "\" fill=\"none\" stroke=\"#888\"/>\n";
  if (marker_x > 0.0)
    s += "<line x1=\"" + px(x_of(marker_x)) + "\" x2=\"" + px(x_of(marker_x)) + "\" y1=\"" + px(kTop) + "\" y2=\"" +
         px(kTop + plot_h) + "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* col = palette[k % palette.size()];
    std::string pts;
    for (std::size_t i = 0; i < series[k].y.size(); ++i) {
      if (!std::isfinite(series[k].y[i])) continue;
      pts += px(x_of(static_cast<double>(i + 1))) + "," + px(y_of(series[k].y[i])) + " ";
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    s += "<text x=\"" + px(kLeft + 10) + "\" y=\"" + px(kTop + 16 + 16 * static_cast<double>(k)) + "\" fill=\"" + col +
         "\">" + escape(series[k].name) + "</text>\n";
  }
  s += text(kLeft - 8, kTop + 4, num(hi), "end");
  s += text(kLeft - 8, kTop + plot_h + 4, num(lo), "end");
  s += text(kLeft, kHeight - kBottom + 18, "1");
  s += text(kLeft + plot_w, kHeight - kBottom + 18, std::to_string(n));
  s += text(kLeft + plot_w / 2, kHeight - 14, "step");
  return s + "</svg>\n";
}

}  // namespace augwm::app
