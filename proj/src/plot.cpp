#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "nashbo/errors.hpp"
#include "nashbo/summary.hpp"

namespace nashbo {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

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

struct Frame {
  double left = 70, right, top = 40, bottom;
  double x0, x1, y0, y1;
  bool log;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
  double py(double y) const {
    const double t = log ? (std::log10(y) - std::log10(y0)) / (std::log10(y1) - std::log10(y0)) : (y - y0) / (y1 - y0);
    return bottom - t * (bottom - top);
  }
};

}  // namespace

std::string render_plot(const Summary& summary, const PlotOptions& opt) {
  if (summary.empty()) throw LogicError("nothing to plot: the summary is empty");

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  double min_positive = std::numeric_limits<double>::infinity();
  for (const auto& s : summary.algorithms) {
    const auto& m = opt.best_so_far ? s.best_mean : s.mean;
    const auto& e = opt.best_so_far ? s.best_stderr : s.stderr_mean;
    for (std::size_t k = 0; k < s.iters.size(); ++k) {
      const double x = static_cast<double>(summary.init_count + s.iters[k]);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, m[k] - e[k]);
      ymax = std::max(ymax, m[k] + e[k]);
      if (m[k] > 0) min_positive = std::min(min_positive, m[k]);
      if (m[k] - e[k] > 0) min_positive = std::min(min_positive, m[k] - e[k]);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;

  Frame fr;
  fr.right = opt.width - 180;
  fr.bottom = opt.height - 50;
  fr.x0 = xmin;
  fr.x1 = xmax;
  fr.log = opt.log_scale;
  double floor_value = 0.0;
  if (fr.log) {
    if (!std::isfinite(min_positive)) min_positive = 1e-12;
    floor_value = min_positive;
    fr.y0 = std::pow(10.0, std::floor(std::log10(min_positive)));
    fr.y1 = std::pow(10.0, std::ceil(std::log10(std::max(ymax, min_positive * 10))));
    if (fr.y1 <= fr.y0) fr.y1 = fr.y0 * 10;
  } else {
    fr.y0 = std::min(0.0, ymin);
    fr.y1 = ymax > fr.y0 ? ymax * 1.05 : fr.y0 + 1;
  }
  auto clampy = [&](double y) { return fr.log ? std::max(y, floor_value) : y; };

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      opt.width, opt.height);
  if (!opt.title.empty()) {
    svg += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       (fr.left + fr.right) / 2, escape(opt.title));
  }

  // Axes and ticks.
  svg += fmt::format("<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
                     "<line x1=\"{0:.1f}\" y1=\"{2:.1f}\" x2=\"{1:.1f}\" y2=\"{2:.1f}\"/>\n"
                     "<line x1=\"{0:.1f}\" y1=\"{3:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\"/>\n</g>\n",
                     fr.left, fr.right, fr.bottom, fr.top);
  svg += "<g class=\"ticks\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double x = fr.x0 + (fr.x1 - fr.x0) * k / 5.0;
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.0f}</text>\n", fr.px(x),
                       fr.bottom + 16, x);
  }
  if (fr.log) {
    for (double y = fr.y0; y <= fr.y1 * 1.0001; y *= 10) {
      svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.0e}</text>\n", fr.left - 6,
                         fr.py(y) + 4, y);
    }
  } else {
    for (int k = 0; k <= 5; ++k) {
      const double y = fr.y0 + (fr.y1 - fr.y0) * k / 5.0;
      svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", fr.left - 6,
                         fr.py(y) + 4, y);
    }
  }
  svg += "</g>\n";
  svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">function evaluations</text>\n",
                     (fr.left + fr.right) / 2, opt.height - 12);
  svg += fmt::format(
      "<text x=\"16\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.1f})\">{1}</text>\n",
      (fr.top + fr.bottom) / 2, opt.best_so_far ? "best exact loss so far" : "exact loss f(x^t)");

  for (std::size_t a = 0; a < summary.algorithms.size(); ++a) {
    const auto& s = summary.algorithms[a];
    const auto& m = opt.best_so_far ? s.best_mean : s.mean;
    const auto& e = opt.best_so_far ? s.best_stderr : s.stderr_mean;
    const char* color = kPalette[a % std::size(kPalette)];
    std::string band, line;
    for (std::size_t k = 0; k < s.iters.size(); ++k) {
      const double x = fr.px(static_cast<double>(summary.init_count + s.iters[k]));
      band += fmt::format("{}{:.2f},{:.2f} ", k ? "L" : "M", x, fr.py(clampy(m[k] + e[k])));
      line += fmt::format("{}{:.2f},{:.2f} ", k ? "L" : "M", x, fr.py(clampy(m[k])));
    }
    for (std::size_t k = s.iters.size(); k-- > 0;) {
      const double x = fr.px(static_cast<double>(summary.init_count + s.iters[k]));
      band += fmt::format("L{:.2f},{:.2f} ", x, fr.py(clampy(m[k] - e[k])));
    }
    band += "Z";
    line.pop_back();
    svg += fmt::format("<path class=\"band\" data-algo=\"{0}\" d=\"{1}\" fill=\"{2}\" fill-opacity=\"0.2\" "
                       "stroke=\"none\"/>\n",
                       escape(s.algo), band, color);
    svg += fmt::format("<path class=\"series\" data-algo=\"{0}\" d=\"{1}\" fill=\"none\" stroke=\"{2}\" "
                       "stroke-width=\"1.8\"/>\n",
                       escape(s.algo), line, color);
  }

  svg += "<g class=\"legend\">\n";
  for (std::size_t a = 0; a < summary.algorithms.size(); ++a) {
    const double y = fr.top + 10 + 20.0 * a;
    const char* color = kPalette[a % std::size(kPalette)];
    svg += fmt::format("<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
                       "stroke-width=\"3\"/>\n<text x=\"{4:.1f}\" y=\"{5:.1f}\">{6}</text>\n",
                       fr.right + 16, y, fr.right + 40, color, fr.right + 46, y + 4,
                       escape(summary.algorithms[a].algo));
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

void emit_plot(const Summary& summary, const std::filesystem::path& path, const PlotOptions& options) {
  const std::string svg = render_plot(summary, options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << svg;
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace nashbo
