#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace geneft::svg {
namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Scale {
  double lo, hi;
  bool log;
  double a, b;  // pixel range

  double operator()(double v) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
};

void frame(std::ostringstream& out, const Axes& axes) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(axes.title) << "</text>\n";
  out << "<text x=\"" << num(kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\"" << num(kHeight - 15)
      << "\" text-anchor=\"middle\">" << escape(axes.x_label) << "</text>\n";
  out << "<text x=\"15\" y=\"" << num(kTop + (kHeight - kTop - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << num(kTop + (kHeight - kTop - kBottom) / 2) << ")\">" << escape(axes.y_label) << "</text>\n";
}

void legend_entry(std::ostringstream& out, int k, const std::string& color, const std::string& label, bool box) {
  const double x = kWidth - kRight + 12, y = kTop + 10 + 18 * k;
  if (box) {
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 9) << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
  } else {
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - 3) << "\" x2=\"" << num(x + 14) << "\" y2=\"" << num(y - 3)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
  }
  out << "<text x=\"" << num(x + 18) << "\" y=\"" << num(y + 1) << "\">" << escape(label) << "</text>\n";
}

}  // namespace

std::string line_chart(const Axes& axes, const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      if ((axes.log_x && s.x[k] <= 0) || (axes.log_y && s.y[k] <= 0)) continue;
      xlo = std::min(xlo, s.x[k]);
      xhi = std::max(xhi, s.x[k]);
      ylo = std::min(ylo, s.y[k]);
      yhi = std::max(yhi, s.y[k]);
    }
  }
  if (!(xlo <= xhi)) xlo = axes.log_x ? 1 : 0, xhi = axes.log_x ? 10 : 1;
  if (!(ylo <= yhi)) ylo = axes.log_y ? 1 : 0, yhi = axes.log_y ? 10 : 1;
  if (xlo == xhi) xhi = axes.log_x ? xlo * 10 : xlo + 1;
  if (ylo == yhi) yhi = axes.log_y ? ylo * 10 : ylo + 1;
  const Scale sx{xlo, xhi, axes.log_x, kLeft, kWidth - kRight};
  const Scale sy{ylo, yhi, axes.log_y, kHeight - kBottom, kTop};

  std::ostringstream out;
  frame(out, axes);
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(kWidth - kLeft - kRight) << "\" height=\""
      << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = t / 4.0;
    const double vx = axes.log_x ? std::pow(10.0, std::log10(xlo) + fx * (std::log10(xhi) - std::log10(xlo)))
                                 : xlo + fx * (xhi - xlo);
    const double vy = axes.log_y ? std::pow(10.0, std::log10(ylo) + fx * (std::log10(yhi) - std::log10(ylo)))
                                 : ylo + fx * (yhi - ylo);
    out << "<text x=\"" << num(sx(vx)) << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
        << tick_label(vx) << "</text>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(vy) + 4) << "\" text-anchor=\"end\">" << tick_label(vy)
        << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if ((axes.log_x && s.x[i] <= 0) || (axes.log_y && s.y[i] <= 0)) continue;
      out << num(sx(s.x[i])) << ',' << num(sy(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    legend_entry(out, static_cast<int>(k), color, s.label, false);
  }
  out << "</svg>\n";
  return out.str();
}

std::string heatmap(const Axes& axes, const std::vector<std::string>& x_ticks, const std::vector<std::string>& y_ticks,
                    const std::vector<std::vector<int>>& cells, const std::vector<Category>& categories) {
  std::ostringstream out;
  frame(out, axes);
  const double w = (kWidth - kLeft - kRight) / std::max<std::size_t>(1, x_ticks.size());
  const double h = (kHeight - kTop - kBottom) / std::max<std::size_t>(1, y_ticks.size());
  for (std::size_t r = 0; r < cells.size() && r < y_ticks.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size() && c < x_ticks.size(); ++c) {
      const int cat = cells[r][c];
      if (cat < 0 || cat >= static_cast<int>(categories.size())) continue;
      const double y = kHeight - kBottom - (r + 1) * h;
      out << "<rect x=\"" << num(kLeft + c * w) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\""
          << num(h) << "\" fill=\"" << categories[cat].color << "\" stroke=\"white\"/>\n";
    }
  }
  for (std::size_t c = 0; c < x_ticks.size(); ++c) {
    out << "<text x=\"" << num(kLeft + (c + 0.5) * w) << "\" y=\"" << num(kHeight - kBottom + 16)
        << "\" text-anchor=\"middle\">" << escape(x_ticks[c]) << "</text>\n";
  }
  for (std::size_t r = 0; r < y_ticks.size(); ++r) {
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(kHeight - kBottom - (r + 0.5) * h + 4)
        << "\" text-anchor=\"end\">" << escape(y_ticks[r]) << "</text>\n";
  }
  for (std::size_t k = 0; k < categories.size(); ++k) {
    legend_entry(out, static_cast<int>(k), categories[k].color, categories[k].name, true);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace geneft::svg
