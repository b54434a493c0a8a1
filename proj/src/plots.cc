// Copyright 2026 The SCAPE-Lite Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal SVG line charts for metrics files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scape/harness.h"

namespace scape {
namespace {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

constexpr int kPanelW = 420;
constexpr int kPanelH = 260;
constexpr int kMargin = 45;

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool HasData(const Series& s) {
  return std::any_of(s.y.begin(), s.y.end(),
                     [](double v) { return std::isfinite(v); });
}

// One panel at (ox, oy). Fixed y range when lo < hi, else fitted.
void Panel(std::ostream& out, int ox, int oy, const std::string& title,
           const std::vector<Series>& series, double lo, double hi) {
  double x_max = 1.0;
  double y_lo = lo, y_hi = hi;
  const bool fit = !(lo < hi);
  if (fit) {
    y_lo = 1e300;
    y_hi = -1e300;
  }
  for (const Series& s : series) {
    for (double x : s.x) x_max = std::max(x_max, x);
    if (fit) {
      for (double y : s.y) {
        if (!std::isfinite(y)) continue;
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
    }
  }
  if (!(y_lo < y_hi)) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double w = kPanelW - 2 * kMargin;
  const double h = kPanelH - 2 * kMargin;
  auto px = [&](double x) { return ox + kMargin + w * x / x_max; };
  auto py = [&](double y) {
    return oy + kMargin + h * (1.0 - (y - y_lo) / (y_hi - y_lo));
  };
  out << "<g class=\"panel\" data-title=\"" << title << "\">\n";
  out << "<rect x=\"" << ox + kMargin << "\" y=\"" << oy + kMargin
      << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << ox + kPanelW / 2 << "\" y=\"" << oy + 20
      << "\" text-anchor=\"middle\" font-size=\"13\">" << title << "</text>\n";
  out << "<text x=\"" << ox + kMargin - 4 << "\" y=\"" << py(y_hi) + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << Fmt(y_hi) << "</text>\n";
  out << "<text x=\"" << ox + kMargin - 4 << "\" y=\"" << py(y_lo) + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << Fmt(y_lo) << "</text>\n";
  out << "<text x=\"" << px(x_max) << "\" y=\"" << oy + kPanelH - kMargin + 14
      << "\" text-anchor=\"end\" font-size=\"10\">epoch " << Fmt(x_max)
      << "</text>\n";
  int legend = 0;
  for (const Series& s : series) {
    if (!HasData(s)) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\" data-label=\"" << s.label
        << "\" data-last=\"" << Fmt(s.y.back()) << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      out << Fmt(px(s.x[i])) << ',' << Fmt(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << ox + kMargin + 6 << "\" y=\""
        << oy + kMargin + 12 + 12 * legend++ << "\" font-size=\"10\" fill=\""
        << s.color << "\">" << s.label << "</text>\n";
  }
  out << "</g>\n";
}

void Document(const std::filesystem::path& path, int panels,
              const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << kPanelW * panels << "\" height=\"" << kPanelH << "\">\n";
  body(out);
  out << "</svg>\n";
}

Series Column(const std::vector<MetricsRow>& rows, const std::string& label,
              const std::string& color, double MetricsRow::*field) {
  Series s{label, color, {}, {}};
  for (const MetricsRow& r : rows) {
    if (r.kind != "epoch") continue;
    s.x.push_back(r.epoch + 1);
    s.y.push_back(r.*field);
  }
  return s;
}

std::string Stem(const std::filesystem::path& file) {
  const std::string parent = file.parent_path().filename().string();
  return parent.empty() ? file.stem().string() : parent;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::vector<std::string> FindMetricsFiles(const std::string& root) {
  std::vector<std::string> out;
  const std::filesystem::path path(root);
  if (std::filesystem::is_regular_file(path)) return {root};
  if (!std::filesystem::is_directory(path)) {
    throw InvalidInput("no such file or directory: " + root);
  }
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") {
      out.push_back(entry.path().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PlotReport EmitPlots(const std::vector<std::string>& metrics_files,
                     const std::string& out_dir) {
  if (metrics_files.empty()) throw InvalidInput("no metrics files to plot");
  PlotReport report;
  const std::filesystem::path root(out_dir);
  std::filesystem::create_directories(root);
  std::vector<Series> comparison;
  for (const std::string& file : metrics_files) {
    MetricsFile metrics;
    try {
      metrics = LoadMetrics(file);
    } catch (const Error& e) {
      report.skipped.push_back(file + ": " + e.what());
      continue;
    }
    const std::vector<MetricsRow>& rows = metrics.rows;
    const std::string stem = Stem(file);
    const std::filesystem::path success = root / (stem + "_success.svg");
    std::vector<Series> rates = {
        Column(rows, "task", kPalette[0], &MetricsRow::task),
        Column(rows, "safety", kPalette[1], &MetricsRow::safety),
        Column(rows, "overall", kPalette[2], &MetricsRow::overall),
        Column(rows, "explore safety", kPalette[7],
               &MetricsRow::explore_safety)};
    Document(success, 1, [&](std::ostream& out) {
      Panel(out, 0, 0, stem + " success", rates, 0.0, 1.0);
    });
    report.written.push_back(success.string());

    std::vector<std::vector<Series>> panels;
    std::vector<std::string> titles;
    for (auto [title, field] :
         {std::pair{"mean Q", &MetricsRow::mean_q},
          std::pair{"mean |F|", &MetricsRow::mean_force},
          std::pair{"mean k", &MetricsRow::mean_k}}) {
      Series s = Column(rows, title, kPalette[3], field);
      if (!HasData(s)) continue;
      panels.push_back({s});
      titles.push_back(title);
    }
    if (!panels.empty()) {
      const std::filesystem::path dynamics = root / (stem + "_dynamics.svg");
      Document(dynamics, static_cast<int>(panels.size()),
               [&](std::ostream& out) {
                 for (std::size_t i = 0; i < panels.size(); ++i) {
                   Panel(out, static_cast<int>(i) * kPanelW, 0, titles[i],
                         panels[i], 0.0, 0.0);
                 }
               });
      report.written.push_back(dynamics.string());
    }
    Series overall = rates[2];
    overall.label = stem;
    overall.color = kPalette[comparison.size() % 8];
    comparison.push_back(std::move(overall));
  }
  if (comparison.size() > 1) {
    const std::filesystem::path path = root / "comparison.svg";
    Document(path, 1, [&](std::ostream& out) {
      Panel(out, 0, 0, "overall success", comparison, 0.0, 1.0);
    });
    report.written.push_back(path.string());
  }
  return report;
}

}  // namespace scape
