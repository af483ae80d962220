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

#ifndef RECON_INGEST_H_
#define RECON_INGEST_H_

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "recon/domain.h"

namespace recon {

// Interior bin edges per binned column: edges.size() == n_bins - 1 and a value
// v falls into bin #{e in edges : e <= v}.
using BinEdges = std::map<std::string, std::vector<double>>;

// Equal-frequency edges from the sorted sample: edge b sits at sorted position
// ceil(b * n / n_bins). Equal values always land in the same bin.
std::vector<double> EqualFrequencyEdges(std::span<const double> values,
                                        std::size_t n_bins);
std::uint32_t BinOf(double value, std::span<const double> edges);

// Splits one CSV record on commas, honoring double-quoted fields.
std::vector<std::string> SplitCsvLine(const std::string& line);
// Quotes a field when it contains a comma, quote or newline.
std::string QuoteCsv(const std::string& field);

struct IngestResult {
  Dataset data;
  BinEdges edges;  // edges actually used (given or computed)
};

// Reads a headered CSV. Columns are matched to attributes by name; extra
// columns are ignored. Values are matched against labels first, and binned
// attributes accept numerics. Edges for binned columns come from `edges` when
// present, otherwise they are computed from this file.
IngestResult IngestCsv(std::istream& in, const DomainPtr& domain,
                       const BinEdges& edges = {});
IngestResult IngestCsvFile(const std::string& path, const DomainPtr& domain,
                           const BinEdges& edges = {});

BinEdges LoadBinEdges(const std::string& path);
void SaveBinEdges(const BinEdges& edges, const std::string& path);

// Header of attribute names, one line per row with labels.
void WriteDatasetCsv(const Dataset& data, std::ostream& out);

// Writes through a temporary file and renames it into place.
void WriteFileAtomic(const std::string& path, const std::string& contents);

}  // namespace recon

#endif  // RECON_INGEST_H_
