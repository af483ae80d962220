// Copyright 2026 The Recon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "recon/evaluation.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "recon/error.h"
#include "recon/ingest.h"

namespace recon {

MatchRateCurve ComputeMatchRateCurve(const ConfidenceRanking& ranking,
                                     const Dataset& target,
                                     std::optional<std::size_t> u_override,
                                     std::string method,
                                     std::string dataset_id) {
  if (!ranking.domain || !(*ranking.domain == target.domain())) {
    throw ConfigError("ranking and target dataset have different domains");
  }
  MatchRateCurve curve;
  curve.method = std::move(method);
  curve.dataset_id = std::move(dataset_id);
  const std::set<Row> present(target.rows().begin(), target.rows().end());
  curve.u = u_override.value_or(present.size());
  if (curve.u == 0) throw ConfigError("u must be positive");
  const std::size_t k_max = std::min(ranking.size(), curve.u);
  curve.points.reserve(k_max);
  std::size_t hits = 0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    hits += present.count(ranking.row(k - 1));
    curve.points.push_back({k, hits,
                            static_cast<double>(k) / static_cast<double>(curve.u),
                            static_cast<double>(hits) / static_cast<double>(k)});
  }
  return curve;
}

std::size_t HoldoutAdjustedU(const Dataset& target, const Dataset& holdout) {
  return std::min(target.NumUnique(), holdout.NumUnique());
}

double ValueAtFraction(const MatchRateCurve& curve, double g) {
  if (curve.points.empty()) throw ConfigError("empty match-rate curve");
  const double raw = std::ceil(g * static_cast<double>(curve.u));
  const std::size_t k_max = curve.points.size();
  const std::size_t k =
      raw < 1.0 ? 1 : std::min(k_max, static_cast<std::size_t>(raw));
  return curve.points[k - 1].match_rate;
}

std::vector<double> DefaultGrid(std::size_t n) {
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i + 1) / static_cast<double>(n);
  }
  return grid;
}

AveragedCurve AverageCurves(std::span<const MatchRateCurve> curves,
                            std::span<const double> grid) {
  if (curves.empty()) throw ConfigError("no curves to average");
  for (double g : grid) {
    if (!(g > 0.0 && g <= 1.0)) {
      throw ConfigError("grid point " + std::to_string(g) + " outside (0, 1]");
    }
  }
  AveragedCurve out;
  out.method = curves.front().method;
  out.grid.assign(grid.begin(), grid.end());
  out.match_rate.assign(grid.size(), 0.0);
  out.num_curves = curves.size();
  for (const MatchRateCurve& curve : curves) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.match_rate[i] += ValueAtFraction(curve, grid[i]);
    }
  }
  for (double& v : out.match_rate) v /= static_cast<double>(curves.size());
  return out;
}

std::string FormatReal(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

namespace {

struct Series {
  std::string name;
  std::vector<std::size_t> k;
  std::vector<double> x;
  std::vector<double> y;
};

std::string SafeName(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "curve" : out;
}

std::string SeriesCsv(const Series& s) {
  std::string out = "k,k_over_u,match_rate\n";
  for (std::size_t i = 0; i < s.k.size(); ++i) {
    out += std::to_string(s.k[i]) + "," + FormatReal(s.x[i]) + "," +
           FormatReal(s.y[i]) + "\n";
  }
  return out;
}

std::string Svg(const std::vector<Series>& series) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22", "#17becf"};
  constexpr double kLeft = 60, kTop = 20, kWidth = 480, kHeight = 320;
  double x_max = 1.0;
  for (const Series& s : series) {
    for (double x : s.x) x_max = std::max(x_max, x);
  }
  auto px = [&](double x) { return FormatReal(kLeft + kWidth * x / x_max); };
  auto py = [&](double y) { return FormatReal(kTop + kHeight * (1.0 - y)); };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" "
         "height=\"400\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth
      << "\" height=\"" << kHeight
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double frac = t / 4.0;
    out << "<text x=\"" << px(frac * x_max) << "\" y=\""
        << FormatReal(kTop + kHeight + 16) << "\" text-anchor=\"middle\">"
        << FormatReal(frac * x_max) << "</text>\n";
    out << "<text x=\"" << FormatReal(kLeft - 6) << "\" y=\"" << py(frac)
        << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
        << FormatReal(frac) << "</text>\n";
  }
  out << "<text x=\"" << FormatReal(kLeft + kWidth / 2) << "\" y=\""
      << FormatReal(kTop + kHeight + 34)
      << "\" text-anchor=\"middle\">k / u</text>\n";
  out << "<text x=\"16\" y=\"" << FormatReal(kTop + kHeight / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << FormatReal(kTop + kHeight / 2) << ")\">match rate</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t p = 0; p < s.x.size(); ++p) {
      out << (p ? " " : "") << px(s.x[p]) << "," << py(s.y[p]);
    }
    out << "\"/>\n";
    const double ly = kTop + 12 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"" << FormatReal(kLeft + kWidth + 16) << "\" y1=\""
        << FormatReal(ly) << "\" x2=\"" << FormatReal(kLeft + kWidth + 40)
        << "\" y2=\"" << FormatReal(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    std::string label;
    for (char c : s.name) {
      if (c == '<') label += "&lt;";
      else if (c == '>') label += "&gt;";
      else if (c == '&') label += "&amp;";
      else label += c;
    }
    out << "<text x=\"" << FormatReal(kLeft + kWidth + 46) << "\" y=\""
        << FormatReal(ly) << "\" dominant-baseline=\"middle\">" << label
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<std::string> WriteSeries(const std::vector<Series>& series,
                                     const std::string& out_dir) {
  if (series.empty()) throw ConfigError("no curves to report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw ConfigError("cannot write to directory " + out_dir);
  }
  std::vector<std::pair<std::string, std::string>> files;
  std::set<std::string> used;
  std::string combined = "method,k,k_over_u,match_rate\n";
  for (const Series& s : series) {
    std::string base = SafeName(s.name);
    std::string name = base;
    for (int i = 2; used.count(name); ++i) name = base + "_" + std::to_string(i);
    used.insert(name);
    files.emplace_back(name + ".csv", SeriesCsv(s));
    for (std::size_t i = 0; i < s.k.size(); ++i) {
      combined += QuoteCsv(s.name) + "," + std::to_string(s.k[i]) + "," +
                  FormatReal(s.x[i]) + "," + FormatReal(s.y[i]) + "\n";
    }
  }
  files.emplace_back("curves.csv", combined);
  files.emplace_back("match_rate.svg", Svg(series));
  std::vector<std::string> written;
  for (const auto& [name, contents] : files) {
    const std::string path = (fs::path(out_dir) / name).string();
    WriteFileAtomic(path, contents);
    written.push_back(path);
  }
  return written;
}

}  // namespace

std::vector<std::string> EmitReport(std::span<const MatchRateCurve> curves,
                                    const std::string& out_dir) {
  std::vector<Series> series;
  for (const MatchRateCurve& c : curves) {
    Series s;
    s.name = c.dataset_id.empty() ? c.method : c.method + "@" + c.dataset_id;
    if (s.name.empty()) s.name = "curve";
    for (const CurvePoint& p : c.points) {
      s.k.push_back(p.k);
      s.x.push_back(p.k_over_u);
      s.y.push_back(p.match_rate);
    }
    series.push_back(std::move(s));
  }
  return WriteSeries(series, out_dir);
}

std::vector<std::string> EmitReport(std::span<const AveragedCurve> curves,
                                    const std::string& out_dir) {
  std::vector<Series> series;
  for (const AveragedCurve& c : curves) {
    Series s;
    s.name = c.method.empty() ? "curve" : c.method;
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
      s.k.push_back(i + 1);
      s.x.push_back(c.grid[i]);
      s.y.push_back(c.match_rate[i]);
    }
    series.push_back(std::move(s));
  }
  return WriteSeries(series, out_dir);
}

}  // namespace recon
