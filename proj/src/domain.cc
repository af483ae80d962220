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

#include "recon/domain.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "recon/error.h"

namespace recon {

Domain::Domain(std::vector<Attribute> attributes)
    : attributes_(std::move(attributes)) {
  std::set<std::string> names;
  offsets_.reserve(attributes_.size() + 1);
  offsets_.push_back(0);
  for (const Attribute& attr : attributes_) {
    if (attr.name.empty()) throw ConfigError("attribute with empty name");
    if (!names.insert(attr.name).second) {
      throw ConfigError("duplicate attribute name: " + attr.name);
    }
    if (attr.labels.empty()) {
      throw ConfigError("attribute " + attr.name + " has no categories");
    }
    std::set<std::string> labels(attr.labels.begin(), attr.labels.end());
    if (labels.size() != attr.labels.size()) {
      throw ConfigError("attribute " + attr.name + " has duplicate labels");
    }
    offsets_.push_back(offsets_.back() + attr.labels.size());
  }
}

std::optional<std::size_t> Domain::FindAttribute(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Domain::AttributeIndex(std::string_view name) const {
  auto idx = FindAttribute(name);
  if (!idx) throw ConfigError("unknown attribute: " + std::string(name));
  return *idx;
}

std::optional<std::uint32_t> Domain::FindLabel(std::size_t attr,
                                               std::string_view label) const {
  const auto& labels = attributes_[attr].labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<std::uint32_t>(i);
  }
  return std::nullopt;
}

std::uint64_t Domain::RowSpaceSize() const {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t size = 1;
  for (const Attribute& attr : attributes_) {
    if (size > kMax / attr.cardinality()) return kMax;
    size *= attr.cardinality();
  }
  return size;
}

namespace {

std::vector<std::string> NumberedLabels(std::size_t n, const char* prefix) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return labels;
}

Attribute ParseAttribute(const nlohmann::json& entry, std::size_t position) {
  if (!entry.is_object() || !entry.contains("name") ||
      !entry["name"].is_string()) {
    throw ConfigError("attribute #" + std::to_string(position) +
                      " must be an object with a string \"name\"");
  }
  Attribute attr;
  attr.name = entry["name"].get<std::string>();
  const bool has_labels = entry.contains("labels");
  const bool has_card = entry.contains("cardinality");
  const bool has_bins = entry.contains("bins");
  if (int(has_labels) + int(has_card) + int(has_bins) != 1) {
    throw ConfigError("attribute " + attr.name +
                      ": exactly one of labels, cardinality, bins is required");
  }
  try {
    if (has_labels) {
      for (const auto& label : entry["labels"]) {
        attr.labels.push_back(label.is_string() ? label.get<std::string>()
                                                : label.dump());
      }
    } else if (has_card) {
      const auto card = entry["cardinality"].get<std::int64_t>();
      if (card < 1) {
        throw ConfigError("attribute " + attr.name +
                          ": cardinality must be positive");
      }
      attr.labels = NumberedLabels(static_cast<std::size_t>(card), "");
    } else {
      const auto bins = entry["bins"].get<std::int64_t>();
      if (bins < 1) {
        throw ConfigError("attribute " + attr.name + ": bins must be positive");
      }
      attr.bins = static_cast<std::size_t>(bins);
      attr.labels = NumberedLabels(*attr.bins, "bin_");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("attribute " + attr.name + ": " + e.what());
  }
  if (attr.labels.empty()) {
    throw ConfigError("attribute " + attr.name + " has an empty category list");
  }
  return attr;
}

}  // namespace

Schema ParseSchema(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("attributes") ||
      !config["attributes"].is_array()) {
    throw ConfigError("schema must contain an \"attributes\" array");
  }
  std::vector<Attribute> attributes;
  std::size_t position = 0;
  for (const auto& entry : config["attributes"]) {
    attributes.push_back(ParseAttribute(entry, position++));
  }
  Schema schema;
  schema.domain = std::make_shared<const Domain>(std::move(attributes));
  if (config.contains("hierarchy")) {
    for (const auto& col : config["hierarchy"]) {
      auto name = col.get<std::string>();
      schema.domain->AttributeIndex(name);
      schema.hierarchy.push_back(std::move(name));
    }
  }
  return schema;
}

DomainPtr BuildDomain(const nlohmann::json& config) {
  return ParseSchema(config).domain;
}

Schema LoadSchema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schema file: " + path);
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed schema " + path + ": " + e.what());
  }
  return ParseSchema(config);
}

bool IsValidRow(const Row& row, const Domain& domain) {
  if (row.size() != domain.num_attributes()) return false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] >= domain.cardinality(i)) return false;
  }
  return true;
}

Dataset::Dataset(DomainPtr domain, std::vector<Row> rows)
    : domain_(std::move(domain)), rows_(std::move(rows)) {
  if (!domain_) throw ConfigError("dataset without a domain");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!IsValidRow(rows_[i], *domain_)) {
      throw ConfigError("row " + std::to_string(i) +
                        " is not valid for the domain");
    }
  }
}

std::map<Row, std::size_t> Dataset::Histogram() const {
  std::map<Row, std::size_t> hist;
  for (const Row& row : rows_) ++hist[row];
  return hist;
}

std::size_t Dataset::NumUnique() const { return Histogram().size(); }

bool Dataset::Contains(const Row& row) const {
  return std::find(rows_.begin(), rows_.end(), row) != rows_.end();
}

bool SameMultiset(const Dataset& a, const Dataset& b) {
  return a.domain() == b.domain() && a.Histogram() == b.Histogram();
}

std::vector<double> EncodeOneHot(const Row& row, const Domain& domain) {
  if (!IsValidRow(row, domain)) throw ConfigError("row invalid for domain");
  std::vector<double> out(domain.onehot_width(), 0.0);
  for (std::size_t i = 0; i < row.size(); ++i) {
    out[domain.offset(i) + row[i]] = 1.0;
  }
  return out;
}

Row DecodeOneHot(std::span<const double> onehot, const Domain& domain) {
  if (onehot.size() != domain.onehot_width()) {
    throw ConfigError("one-hot vector has width " +
                      std::to_string(onehot.size()) + ", expected " +
                      std::to_string(domain.onehot_width()));
  }
  Row row;
  row.values.reserve(domain.num_attributes());
  for (std::size_t i = 0; i < domain.num_attributes(); ++i) {
    std::optional<std::uint32_t> hot;
    for (std::size_t c = 0; c < domain.cardinality(i); ++c) {
      const double v = onehot[domain.offset(i) + c];
      if (v == 1.0) {
        if (hot) {
          throw ConfigError("block " + std::to_string(i) + " (" +
                            domain.attribute(i).name +
                            ") has more than one hot bit");
        }
        hot = static_cast<std::uint32_t>(c);
      } else if (v != 0.0) {
        throw ConfigError("block " + std::to_string(i) +
                          " has a non-binary entry");
      }
    }
    if (!hot) {
      throw ConfigError("block " + std::to_string(i) + " (" +
                        domain.attribute(i).name + ") has no hot bit");
    }
    row.values.push_back(*hot);
  }
  return row;
}

std::pair<Dataset, Dataset> SplitHoldout(const Dataset& data, Rng& rng) {
  const std::size_t n = data.size();
  if (n < 2) {
    throw ConfigError("holdout split needs at least 2 rows, got " +
                      std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates.
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[UniformIndex(rng, i + 1)]);
  }
  const std::size_t first = (n + 1) / 2;
  std::vector<Row> a;
  std::vector<Row> b;
  a.reserve(first);
  b.reserve(n - first);
  for (std::size_t i = 0; i < n; ++i) {
    (i < first ? a : b).push_back(data.rows()[order[i]]);
  }
  return {Dataset(data.domain_ptr(), std::move(a)),
          Dataset(data.domain_ptr(), std::move(b))};
}

std::string FormatRow(const Row& row, const Domain& domain) {
  std::string out = "(";
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ",";
    out += i < domain.num_attributes() && row[i] < domain.cardinality(i)
               ? domain.attribute(i).labels[row[i]]
               : std::to_string(row[i]);
  }
  return out + ")";
}

}  // namespace recon
