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

#include "recon/ingest.h"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "recon/error.h"

namespace recon {

std::vector<double> EqualFrequencyEdges(std::span<const double> values,
                                        std::size_t n_bins) {
  if (n_bins == 0) throw ConfigError("number of bins must be positive");
  if (values.empty()) throw ConfigError("cannot bin an empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> edges;
  edges.reserve(n_bins - 1);
  for (std::size_t b = 1; b < n_bins; ++b) {
    std::size_t pos = (b * n + n_bins - 1) / n_bins;
    edges.push_back(sorted[std::min(pos, n - 1)]);
  }
  return edges;
}

std::uint32_t BinOf(double value, std::span<const double> edges) {
  return static_cast<std::uint32_t>(
      std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

namespace {

std::optional<double> ParseNumber(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t");
  std::size_t end = text.find_last_not_of(" \t");
  if (begin == std::string::npos) return std::nullopt;
  const char* first = text.data() + begin;
  const char* last = text.data() + end + 1;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

IngestResult IngestCsv(std::istream& in, const DomainPtr& domain,
                       const BinEdges& edges) {
  const Domain& dom = *domain;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("CSV input has no header row");
  const auto header = SplitCsvLine(line);
  std::vector<std::size_t> column_of(dom.num_attributes());
  for (std::size_t a = 0; a < dom.num_attributes(); ++a) {
    auto it = std::find(header.begin(), header.end(), dom.attribute(a).name);
    if (it == header.end()) {
      throw ConfigError("CSV is missing column " + dom.attribute(a).name);
    }
    column_of[a] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<std::string>> records;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    records.push_back(SplitCsvLine(line));
    if (records.back().size() != header.size()) {
      throw ConfigError("CSV row " + std::to_string(records.size()) + " has " +
                        std::to_string(records.back().size()) +
                        " fields, header has " + std::to_string(header.size()));
    }
  }

  IngestResult result;
  std::vector<Row> rows(records.size(), Row(std::vector<std::uint32_t>(
                                            dom.num_attributes())));
  for (std::size_t a = 0; a < dom.num_attributes(); ++a) {
    const Attribute& attr = dom.attribute(a);
    const std::size_t col = column_of[a];
    std::vector<std::optional<double>> numeric(records.size());
    std::vector<double> sample;
    for (std::size_t r = 0; r < records.size(); ++r) {
      const std::string& value = records[r][col];
      if (auto label = dom.FindLabel(a, value)) {
        rows[r][a] = *label;
        continue;
      }
      if (!attr.bins) {
        throw ConfigError("row " + std::to_string(r + 1) + ", column " +
                          attr.name + ": unknown label \"" + value + "\"");
      }
      numeric[r] = ParseNumber(value);
      if (!numeric[r]) {
        throw ConfigError("row " + std::to_string(r + 1) + ", column " +
                          attr.name + ": non-numeric value \"" + value +
                          "\" in a binned column");
      }
      sample.push_back(*numeric[r]);
    }
    if (!attr.bins) continue;
    std::vector<double> column_edges;
    if (auto it = edges.find(attr.name); it != edges.end()) {
      column_edges = it->second;
      if (column_edges.size() + 1 != *attr.bins) {
        throw ConfigError("bin edges for " + attr.name + " imply " +
                          std::to_string(column_edges.size() + 1) +
                          " bins, schema declares " +
                          std::to_string(*attr.bins));
      }
    } else if (!sample.empty()) {
      column_edges = EqualFrequencyEdges(sample, *attr.bins);
    } else {
      continue;  // column given entirely as labels
    }
    for (std::size_t r = 0; r < records.size(); ++r) {
      if (numeric[r]) rows[r][a] = BinOf(*numeric[r], column_edges);
    }
    result.edges[attr.name] = std::move(column_edges);
  }
  result.data = Dataset(domain, std::move(rows));
  return result;
}

IngestResult IngestCsvFile(const std::string& path, const DomainPtr& domain,
                           const BinEdges& edges) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);
  return IngestCsv(in, domain, edges);
}

BinEdges LoadBinEdges(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bin-edge file: " + path);
  try {
    nlohmann::json doc;
    in >> doc;
    return doc.at("columns").get<BinEdges>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed bin-edge file " + path + ": " + e.what());
  }
}

void SaveBinEdges(const BinEdges& edges, const std::string& path) {
  nlohmann::json doc;
  doc["columns"] = edges;
  WriteFileAtomic(path, doc.dump(2) + "\n");
}

std::string QuoteCsv(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void WriteDatasetCsv(const Dataset& data, std::ostream& out) {
  const Domain& dom = data.domain();
  for (std::size_t a = 0; a < dom.num_attributes(); ++a) {
    out << (a ? "," : "") << QuoteCsv(dom.attribute(a).name);
  }
  out << "\n";
  for (const Row& row : data.rows()) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      out << (a ? "," : "") << QuoteCsv(dom.attribute(a).labels[row[a]]);
    }
    out << "\n";
  }
}

void WriteFileAtomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) {
      throw ConfigError("cannot create directory " +
                        target.parent_path().string() + ": " + ec.message());
    }
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << contents;
    if (!out.flush()) throw ConfigError("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw ConfigError("cannot rename " + tmp + ": " + ec.message());
}

}  // namespace recon
