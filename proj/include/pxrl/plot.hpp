#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pxrl/errors.hpp"
#include "pxrl/harness.hpp"

namespace pxrl {

// Trailing moving average over the window (window 1 returns the input).
inline std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window < 1) throw UsageError("moving_average: window must be positive");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

// Piecewise-constant resampling: the value at grid point g is the last y
// whose x does not exceed g (the first y before any data).
inline std::vector<double> resample_step_function(const std::vector<double>& xs,
                                                  const std::vector<double>& ys,
                                                  const std::vector<double>& grid) {
  if (xs.size() != ys.size() || xs.empty())
    throw UsageError("resample_step_function: need matching nonempty xs/ys");
  std::vector<double> out(grid.size());
  std::size_t j = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (j + 1 < xs.size() && xs[j + 1] <= grid[g]) ++j;
    out[g] = (xs[j] <= grid[g] || j > 0) ? ys[j] : ys[0];
  }
  return out;
}

// One variant's aggregated learning curve on a common step grid.
struct PlotSeries {
  std::string label;
  std::vector<double> grid;  // global steps
  std::vector<double> mean;  // cross-seed mean of smoothed extrinsic return
  std::vector<double> lo;    // per-point min across seeds
  std::vector<double> hi;    // per-point max across seeds
};

inline PlotSeries build_series(const RunData& run, int window, int grid_points = 200) {
  PlotSeries series;
  series.label = run.variant;
  double max_step = 1.0;
  for (const auto& records : run.per_seed_records)
    for (const auto& r : records) max_step = std::max(max_step, static_cast<double>(r.step));
  series.grid.resize(grid_points);
  for (int g = 0; g < grid_points; ++g)
    series.grid[g] = max_step * static_cast<double>(g + 1) / grid_points;

  std::vector<std::vector<double>> per_seed_curves;
  for (const auto& records : run.per_seed_records) {
    if (records.empty()) continue;
    std::vector<double> xs, ys;
    xs.reserve(records.size());
    ys.reserve(records.size());
    for (const auto& r : records) {
      xs.push_back(static_cast<double>(r.step));
      ys.push_back(r.return_ext);
    }
    per_seed_curves.push_back(resample_step_function(xs, moving_average(ys, window), series.grid));
  }
  if (per_seed_curves.empty()) throw UsageError("build_series: no episodes in run " + run.variant);

  const std::size_t n = series.grid.size();
  series.mean.assign(n, 0.0);
  series.lo.assign(n, std::numeric_limits<double>::infinity());
  series.hi.assign(n, -std::numeric_limits<double>::infinity());
  for (const auto& curve : per_seed_curves) {
    for (std::size_t g = 0; g < n; ++g) {
      series.mean[g] += curve[g];
      series.lo[g] = std::min(series.lo[g], curve[g]);
      series.hi[g] = std::max(series.hi[g], curve[g]);
    }
  }
  for (double& m : series.mean) m /= static_cast<double>(per_seed_curves.size());
  return series;
}

namespace detail {

inline std::string fmt_tick(double v) {
  std::ostringstream s;
  if (std::fabs(v) >= 10000.0) {
    s << v / 1000.0 << "k";
  } else {
    s << v;
  }
  return s.str();
}

}  // namespace detail

// Self-contained SVG: one mean curve per variant, shaded cross-seed min/max
// band, axes with ticks, legend. x is global steps, y smoothed extrinsic
// return.
inline void render_svg(const std::vector<PlotSeries>& series, const std::string& path,
                       const std::string& title = "") {
  if (series.empty()) throw UsageError("render_svg: nothing to plot");
  const double width = 860, height = 560;
  const double ml = 80, mr = 180, mt = 48, mb = 64;  // margins; legend on the right
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;

  double x_max = 1.0, y_min = 0.0, y_max = 1e-9;
  for (const auto& s : series) {
    x_max = std::max(x_max, s.grid.back());
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
      y_min = std::min(y_min, s.lo[g]);
      y_max = std::max(y_max, s.hi[g]);
    }
  }
  const double y_pad = 0.05 * (y_max - y_min + 1e-12);
  y_min -= y_pad;
  y_max += y_pad;

  auto px = [&](double x) { return ml + plot_w * x / x_max; };
  auto py = [&](double y) { return mt + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };

  static const char* palette[] = {"#2e7d32", "#ef6c00", "#1565c0", "#8e24aa",
                                  "#c62828", "#00838f", "#6d4c41", "#37474f"};

  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open plot output: " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    f << "<text x=\"" << ml + plot_w / 2 << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

  // axes
  f << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\"" << ml + plot_w << "\" y2=\""
    << mt + plot_h << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + plot_h
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double x = x_max * t / 5.0;
    f << "<line x1=\"" << px(x) << "\" y1=\"" << mt + plot_h << "\" x2=\"" << px(x) << "\" y2=\""
      << mt + plot_h + 5 << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << px(x) << "\" y=\"" << mt + plot_h + 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << detail::fmt_tick(x) << "</text>\n";
    const double y = y_min + (y_max - y_min) * t / 5.0;
    f << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << ml << "\" y2=\"" << py(y)
      << "\" stroke=\"black\"/>\n";
    std::ostringstream ylab;
    ylab.precision(3);
    ylab << y;
    f << "<text x=\"" << ml - 8 << "\" y=\"" << py(y) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << ylab.str()
      << "</text>\n";
  }
  f << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 16
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">global steps</text>\n";
  f << "<text x=\"20\" y=\"" << mt + plot_h / 2
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
    << "transform=\"rotate(-90 20 " << mt + plot_h / 2 << ")\">extrinsic return</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = palette[k % (sizeof palette / sizeof palette[0])];
    // min/max band
    f << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
    for (std::size_t g = 0; g < s.grid.size(); ++g) f << px(s.grid[g]) << "," << py(s.hi[g]) << " ";
    for (std::size_t g = s.grid.size(); g-- > 0;) f << px(s.grid[g]) << "," << py(s.lo[g]) << " ";
    f << "\"/>\n";
    // mean curve
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t g = 0; g < s.grid.size(); ++g)
      f << px(s.grid[g]) << "," << py(s.mean[g]) << " ";
    f << "\"/>\n";
    // legend entry
    const double ly = mt + 16 + 22 * static_cast<double>(k);
    f << "<line x1=\"" << ml + plot_w + 14 << "\" y1=\"" << ly << "\" x2=\"" << ml + plot_w + 40
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    f << "<text x=\"" << ml + plot_w + 46 << "\" y=\"" << ly + 4
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
  }
  f << "</svg>\n";
}

inline void plot_learning_curves(const std::vector<RunData>& runs, int window,
                                 const std::string& path, const std::string& title = "") {
  std::vector<PlotSeries> series;
  for (const auto& run : runs) series.push_back(build_series(run, window));
  render_svg(series, path, title);
}

}  // namespace pxrl
