#include "eigmala/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace eigmala {

namespace {

std::string num(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

struct BoxStats {
  double lo, q1, median, q3, hi;
};

// Quartiles by linear interpolation on the sorted sample.
BoxStats box_stats(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  return BoxStats{values.front(), quantile(0.25), quantile(0.5), quantile(0.75),
                  values.back()};
}

const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                          "#956cb4", "#8c613c", "#dc7ec0", "#797979"};

}  // namespace

std::string boxplot_svg(const std::vector<std::string>& labels,
                        const std::vector<double>& values, const std::string& title,
                        const std::string& y_label) {
  if (labels.size() != values.size() || labels.empty()) {
    throw std::invalid_argument("boxplot_svg: labels/values mismatch or empty");
  }
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    if (!groups.count(labels[i])) order.push_back(labels[i]);
    groups[labels[i]].push_back(values[i]);
  }
  if (order.empty()) throw std::invalid_argument("boxplot_svg: no finite values");

  double vmin = 1e300, vmax = -1e300;
  for (const auto& label : order) {
    for (const double v : groups[label]) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  if (vmax <= vmin) vmax = vmin + 1.0;
  const double pad = 0.08 * (vmax - vmin);
  vmin -= pad;
  vmax += pad;

  const double width = 160.0 + 90.0 * static_cast<double>(order.size());
  const double height = 420.0;
  const double left = 90.0, right = width - 30.0, top = 60.0, bottom = height - 70.0;
  auto ymap = [&](double v) {
    return bottom - (v - vmin) / (vmax - vmin) * (bottom - top);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
      << num(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(width / 2) << "\" y=\"30\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";
  svg << "<text x=\"20\" y=\"" << num((top + bottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 20 "
      << num((top + bottom) / 2) << ")\">" << y_label << "</text>\n";

  // Axis and ticks.
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(bottom) << "\" x2=\""
      << num(right) << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 5; ++tick) {
    const double v = vmin + (vmax - vmin) * tick / 5.0;
    const double y = ymap(v);
    svg << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(v)
        << "</text>\n";
  }

  const double slot = (right - left) / static_cast<double>(order.size());
  for (std::size_t g = 0; g < order.size(); ++g) {
    const auto& vals = groups[order[g]];
    const double cx = left + slot * (static_cast<double>(g) + 0.5);
    const char* color = kPalette[g % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (vals.size() == 1) {
      svg << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(ymap(vals[0]))
          << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    } else {
      const BoxStats s = box_stats(vals);
      const double half = std::min(28.0, slot * 0.3);
      svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ymap(s.lo)) << "\" x2=\""
          << num(cx) << "\" y2=\"" << num(ymap(s.q1)) << "\" stroke=\"black\"/>\n";
      svg << "<line x1=\"" << num(cx) << "\" y1=\"" << num(ymap(s.q3)) << "\" x2=\""
          << num(cx) << "\" y2=\"" << num(ymap(s.hi)) << "\" stroke=\"black\"/>\n";
      svg << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(ymap(s.q3)) << "\" width=\""
          << num(2 * half) << "\" height=\"" << num(ymap(s.q1) - ymap(s.q3))
          << "\" fill=\"" << color << "\" fill-opacity=\"0.6\" stroke=\"black\"/>\n";
      svg << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(ymap(s.median))
          << "\" x2=\"" << num(cx + half) << "\" y2=\"" << num(ymap(s.median))
          << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    svg << "<text x=\"" << num(cx) << "\" y=\"" << num(bottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << order[g] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string sin2_trace_svg(const std::vector<RecoveryTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("sin2_trace_svg: no traces");
  constexpr double kFloor = 1e-16;
  bool floored = false;
  long max_iter = 1;
  double log_min = 0.0;
  for (const auto& trace : traces) {
    for (std::size_t i = 0; i < trace.sin2.size(); ++i) {
      max_iter = std::max(max_iter, trace.iterations[i]);
      double v = trace.sin2[i];
      if (v < kFloor) {
        v = kFloor;
        floored = true;
      }
      log_min = std::min(log_min, std::log10(v));
    }
  }
  const double log_max = 0.0;  // sin^2 <= 1
  const double span = std::max(1.0, log_max - log_min);

  const double width = 720.0, height = 440.0;
  const double left = 80.0, right = width - 160.0, top = 50.0, bottom = height - 60.0;
  auto xmap = [&](double it) { return left + it / static_cast<double>(max_iter) * (right - left); };
  auto ymap = [&](double logv) { return top + (log_max - logv) / span * (bottom - top); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(width) << " "
      << num(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(width / 2)
      << "\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
         "leading-eigenvector recovery</text>\n";
  svg << "<text x=\"24\" y=\"" << num((top + bottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 24 "
      << num((top + bottom) / 2) << ")\">log10 sin^2 distance</text>\n";
  svg << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(height - 22)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         "iteration</text>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(right)
      << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double logv = log_max - span * tick / 4.0;
    svg << "<text x=\"" << num(left - 8) << "\" y=\"" << num(ymap(logv) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(logv)
        << "</text>\n";
  }

  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& trace = traces[i];
    const std::string label =
        trace.scheme + " d=" + std::to_string(trace.d) + " rep=" + std::to_string(trace.repetition);
    std::size_t color_index;
    if (auto it = seen.find(trace.scheme); it != seen.end()) {
      color_index = it->second;
    } else {
      color_index = seen.size();
      seen.emplace(trace.scheme, color_index);
      svg << "<text x=\"" << num(right + 12) << "\" y=\""
          << num(top + 16 * static_cast<double>(color_index))
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
          << kPalette[color_index % 8] << "\">" << trace.scheme << "</text>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << kPalette[color_index % 8]
        << "\" stroke-width=\"1.2\" opacity=\"0.8\" points=\"";
    for (std::size_t p = 0; p < trace.sin2.size(); ++p) {
      const double v = std::max(trace.sin2[p], kFloor);
      svg << num(xmap(static_cast<double>(trace.iterations[p]))) << ','
          << num(ymap(std::log10(v))) << ' ';
    }
    svg << "\"><title>" << label << "</title></polyline>\n";
  }
  if (floored) {
    svg << "<text x=\"" << num(left) << "\" y=\"" << num(height - 6)
        << "\" font-family=\"sans-serif\" font-size=\"10\">* values below 1e-16 are "
           "floored at 1e-16</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plots(const std::vector<RunRecord>& records,
                const std::vector<RecoveryTrace>& traces, const std::string& outdir) {
  if (records.empty()) throw std::invalid_argument("emit_plots: no records");
  std::filesystem::create_directories(outdir);

  std::vector<std::string> labels;
  std::vector<double> ess_values;
  std::vector<double> rate_values;
  for (const RunRecord& r : records) {
    if (r.status != "ok") continue;
    labels.push_back(r.scheme + "@d=" + std::to_string(r.d));
    ess_values.push_back(r.median_ess);
    rate_values.push_back(r.ess_per_second);
  }
  if (labels.empty()) throw std::invalid_argument("emit_plots: no successful records");

  auto write_file = [&](const std::string& name, const std::string& content) {
    const std::string path = outdir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_plots: cannot open '" + path + "'");
    out << content;
  };
  write_file("ess_boxplot.svg",
             boxplot_svg(labels, ess_values, "median ESS by scheme and dimension", "median ESS"));
  write_file("ess_per_second_boxplot.svg",
             boxplot_svg(labels, rate_values, "time-normalised ESS by scheme and dimension",
                         "median ESS / second"));
  if (!traces.empty()) write_file("sin2_trace.svg", sin2_trace_svg(traces));
}

}  // namespace eigmala
