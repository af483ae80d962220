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

#ifndef RECON_EVALUATION_H_
#define RECON_EVALUATION_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recon/attack.h"
#include "recon/domain.h"

namespace recon {

struct CurvePoint {
  std::size_t k = 0;
  std::size_t hits = 0;  // ranked rows 1..k present in the target
  double k_over_u = 0.0;
  double match_rate = 0.0;  // hits / k
};

struct MatchRateCurve {
  std::string method;
  std::string dataset_id;
  std::size_t u = 0;
  std::vector<CurvePoint> points;  // k = 1 .. min(|R|, u)
};

// Top-k match rate: the fraction of the k highest-ranked rows that appear in
// `target` (multiplicity ignored). u is the target's unique-row count unless
// overridden. Throws ConfigError when the domains differ.
MatchRateCurve ComputeMatchRateCurve(const ConfidenceRanking& ranking,
                                     const Dataset& target,
                                     std::optional<std::size_t> u_override = {},
                                     std::string method = "",
                                     std::string dataset_id = "");

// min(unique rows of target, unique rows of holdout).
std::size_t HoldoutAdjustedU(const Dataset& target, const Dataset& holdout);

// Step interpolation: the value at fraction g is the match rate at
// k = ceil(g * u), clamped to the curve's k range.
double ValueAtFraction(const MatchRateCurve& curve, double g);

// n evenly spaced points 1/n, 2/n, ..., 1.
std::vector<double> DefaultGrid(std::size_t n = 100);

struct AveragedCurve {
  std::string method;
  std::vector<double> grid;
  std::vector<double> match_rate;
  std::size_t num_curves = 0;
};

// Pointwise mean of the step-interpolated curves. Throws ConfigError on an
// empty list, an empty curve, or a grid point outside (0, 1].
AveragedCurve AverageCurves(std::span<const MatchRateCurve> curves,
                            std::span<const double> grid);

// Writes <name>.csv per curve (`k,k_over_u,match_rate`), curves.csv keyed by
// method, and match_rate.svg. Throws ConfigError on an empty list or an
// unwritable directory; nothing is written in that case.
std::vector<std::string> EmitReport(std::span<const MatchRateCurve> curves,
                                    const std::string& out_dir);
// Same layout for averaged curves; the k column holds the grid index.
std::vector<std::string> EmitReport(std::span<const AveragedCurve> curves,
                                    const std::string& out_dir);

// Floats in report files: 10 significant digits.
std::string FormatReal(double value);

}  // namespace recon

#endif  // RECON_EVALUATION_H_
