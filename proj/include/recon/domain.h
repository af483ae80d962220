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

#ifndef RECON_DOMAIN_H_
#define RECON_DOMAIN_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "recon/rng.h"

namespace recon {

// One categorical column. `bins` is set when the raw column is numeric and
// gets discretized into equal-frequency bins at ingestion time.
struct Attribute {
  std::string name;
  std::vector<std::string> labels;
  std::optional<std::size_t> bins;

  std::size_t cardinality() const { return labels.size(); }
  bool operator==(const Attribute&) const = default;
};

// Ordered list of categorical attributes. The one-hot layout concatenates the
// per-attribute blocks in attribute order.
class Domain {
 public:
  // Throws ConfigError on duplicate names, empty or duplicate labels.
  explicit Domain(std::vector<Attribute> attributes);

  std::size_t num_attributes() const { return attributes_.size(); }
  std::size_t onehot_width() const { return offsets_.back(); }
  const Attribute& attribute(std::size_t i) const { return attributes_[i]; }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t cardinality(std::size_t i) const {
    return attributes_[i].cardinality();
  }
  // Start of attribute i's block; offset(d) == onehot_width().
  std::size_t offset(std::size_t i) const { return offsets_[i]; }

  std::optional<std::size_t> FindAttribute(std::string_view name) const;
  // Throws ConfigError naming the attribute if absent.
  std::size_t AttributeIndex(std::string_view name) const;
  std::optional<std::uint32_t> FindLabel(std::size_t attr,
                                         std::string_view label) const;

  // Number of distinct rows; saturates at UINT64_MAX.
  std::uint64_t RowSpaceSize() const;

  bool operator==(const Domain& other) const {
    return attributes_ == other.attributes_;
  }

 private:
  std::vector<Attribute> attributes_;
  std::vector<std::size_t> offsets_;
};

using DomainPtr = std::shared_ptr<const Domain>;

// Hierarchy columns (coarse to fine) travel with the schema.
struct Schema {
  DomainPtr domain;
  std::vector<std::string> hierarchy;
};

// Parses `{"attributes": [{name, labels | cardinality | bins}], "hierarchy"}`.
Schema ParseSchema(const nlohmann::json& config);
Schema LoadSchema(const std::string& path);
DomainPtr BuildDomain(const nlohmann::json& config);

// A row is a vector of category indices, one per attribute.
struct Row {
  std::vector<std::uint32_t> values;

  Row() = default;
  explicit Row(std::vector<std::uint32_t> v) : values(std::move(v)) {}
  Row(std::initializer_list<std::uint32_t> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  std::uint32_t operator[](std::size_t i) const { return values[i]; }
  std::uint32_t& operator[](std::size_t i) { return values[i]; }

  auto operator<=>(const Row&) const = default;
  bool operator==(const Row&) const = default;
};

bool IsValidRow(const Row& row, const Domain& domain);

// Multiset of rows over a domain; row order is kept as ingested.
class Dataset {
 public:
  Dataset() = default;
  // Throws ConfigError if any row is invalid for the domain.
  Dataset(DomainPtr domain, std::vector<Row> rows);

  const DomainPtr& domain_ptr() const { return domain_; }
  const Domain& domain() const { return *domain_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  // Row -> multiplicity, ordered lexicographically.
  std::map<Row, std::size_t> Histogram() const;
  std::size_t NumUnique() const;
  bool Contains(const Row& row) const;

 private:
  DomainPtr domain_;
  std::vector<Row> rows_;
};

// Same domain and same multiset of rows.
bool SameMultiset(const Dataset& a, const Dataset& b);

std::vector<double> EncodeOneHot(const Row& row, const Domain& domain);
// Throws ConfigError unless every block holds exactly one 1 and zeros elsewhere.
Row DecodeOneHot(std::span<const double> onehot, const Domain& domain);

// Uniform random partition into sizes ceil(n/2) and floor(n/2).
// Throws ConfigError when n < 2.
std::pair<Dataset, Dataset> SplitHoldout(const Dataset& data, Rng& rng);

std::string FormatRow(const Row& row, const Domain& domain);

}  // namespace recon

#endif  // RECON_DOMAIN_H_
