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

#include "recon/baselines.h"

#include <algorithm>

#include "recon/error.h"

namespace recon {

ConfidenceRanking BaselineRanking(const Dataset& aux, const std::string& label) {
  ConfidenceRanking ranking = RankByFrequency(aux);
  ranking.provenance = {{"method", label}, {"rows", aux.size()}};
  return ranking;
}

HierarchyBaselines BuildHierarchyBaselines(
    const Dataset& full, const std::vector<std::string>& hierarchy,
    const std::string& target_column, const std::string& target_label,
    Rng& rng) {
  const Domain& domain = full.domain();
  auto target_pos = std::find(hierarchy.begin(), hierarchy.end(), target_column);
  if (target_pos == hierarchy.end()) {
    throw ConfigError("target level " + target_column +
                      " is not a hierarchy column");
  }
  const auto depth = static_cast<std::size_t>(target_pos - hierarchy.begin());
  std::vector<std::size_t> columns;
  for (const auto& name : hierarchy) columns.push_back(domain.AttributeIndex(name));
  auto label = domain.FindLabel(columns[depth], target_label);
  if (!label) {
    throw ConfigError("level " + target_column + ": unknown label \"" +
                      target_label + "\"");
  }

  std::vector<Row> unit_rows;
  for (const Row& row : full.rows()) {
    if (row[columns[depth]] == *label) unit_rows.push_back(row);
  }
  if (unit_rows.empty()) {
    throw ConfigError("empty selection at level " + target_column + " (" +
                      target_label + ")");
  }
  for (std::size_t i = 0; i < depth; ++i) {
    for (const Row& row : unit_rows) {
      if (row[columns[i]] != unit_rows.front()[columns[i]]) {
        throw ConfigError("target unit spans several values of " +
                          hierarchy[i]);
      }
    }
  }
  const Row& prefix = unit_rows.front();

  HierarchyBaselines out;
  out.levels.push_back({"national", full});
  for (std::size_t level = 0; level < depth; ++level) {
    std::vector<Row> rows;
    for (const Row& row : full.rows()) {
      bool match = true;
      for (std::size_t i = 0; i <= level && match; ++i) {
        match = row[columns[i]] == prefix[columns[i]];
      }
      if (match) rows.push_back(row);
    }
    if (rows.empty()) {
      throw ConfigError("empty selection at level " + hierarchy[level]);
    }
    out.levels.push_back({hierarchy[level], Dataset(full.domain_ptr(), rows)});
  }
  out.target_unit = Dataset(full.domain_ptr(), std::move(unit_rows));
  auto [target, holdout] = SplitHoldout(out.target_unit, rng);
  out.target = std::move(target);
  out.levels.push_back({"holdout", std::move(holdout)});
  return out;
}

Dataset AugmentAttribute(const Dataset& aux, const Dataset& target,
                         const std::string& attribute, Rng& rng) {
  if (target.empty()) throw ConfigError("target dataset is empty");
  const std::size_t aux_attr = aux.domain().AttributeIndex(attribute);
  const std::size_t target_attr = target.domain().AttributeIndex(attribute);
  if (aux.domain().attribute(aux_attr).labels !=
      target.domain().attribute(target_attr).labels) {
    throw ConfigError("attribute " + attribute +
                      " has different categories in the two datasets");
  }
  std::vector<Row> rows = aux.rows();
  for (Row& row : rows) {
    row[aux_attr] = target.rows()[UniformIndex(rng, target.size())][target_attr];
  }
  return Dataset(aux.domain_ptr(), std::move(rows));
}

Dataset DropAttribute(const Dataset& data, const std::string& attribute) {
  const Domain& domain = data.domain();
  const std::size_t drop = domain.AttributeIndex(attribute);
  if (domain.num_attributes() < 2) {
    throw ConfigError("cannot drop " + attribute + ": it is the only attribute");
  }
  std::vector<Attribute> kept;
  for (std::size_t a = 0; a < domain.num_attributes(); ++a) {
    if (a != drop) kept.push_back(domain.attribute(a));
  }
  auto reduced = std::make_shared<const Domain>(std::move(kept));
  std::vector<Row> rows;
  rows.reserve(data.size());
  for (const Row& row : data.rows()) {
    Row projected = row;
    projected.values.erase(projected.values.begin() +
                           static_cast<std::ptrdiff_t>(drop));
    rows.push_back(std::move(projected));
  }
  return Dataset(std::move(reduced), std::move(rows));
}

}  // namespace recon
