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

#ifndef RECON_BASELINES_H_
#define RECON_BASELINES_H_

#include <string>
#include <utility>
#include <vector>

#include "recon/attack.h"
#include "recon/domain.h"
#include "recon/rng.h"

namespace recon {

// Ranks the rows of an auxiliary sample by their empirical frequency, with the
// same tie rule as the attack.
ConfidenceRanking BaselineRanking(const Dataset& aux,
                                  const std::string& label = "baseline");

struct HierarchyLevel {
  std::string name;
  Dataset data;
};

struct HierarchyBaselines {
  // Coarse to fine: "national", then every hierarchy column coarser than the
  // target's level, then "holdout".
  std::vector<HierarchyLevel> levels;
  Dataset target_unit;  // all rows of the selected unit
  Dataset target;       // the half attacked (holdout split of target_unit)
};

// The target unit is the set of rows with `target_column == target_label`;
// `target_column` must be one of `hierarchy` (coarse to fine). Each coarser
// level keeps every row sharing the unit's prefix of hierarchy values, the
// unit's own rows included. Throws ConfigError naming the level on an empty
// selection, and when the unit's rows disagree on a coarser column.
HierarchyBaselines BuildHierarchyBaselines(
    const Dataset& full, const std::vector<std::string>& hierarchy,
    const std::string& target_column, const std::string& target_label,
    Rng& rng);

// Copy of `aux` with `attribute` redrawn i.i.d. from its empirical
// distribution in `target`.
Dataset AugmentAttribute(const Dataset& aux, const Dataset& target,
                         const std::string& attribute, Rng& rng);

// Projects every row onto the remaining attributes.
Dataset DropAttribute(const Dataset& data, const std::string& attribute);

}  // namespace recon

#endif  // RECON_BASELINES_H_
