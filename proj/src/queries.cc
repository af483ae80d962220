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

#include "recon/queries.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "recon/error.h"
#include "recon/ingest.h"

namespace recon {

bool Clause::Accepts(const Row& row) const {
  return std::binary_search(values.begin(), values.end(), row[attribute]);
}

bool CnfQuery::Accepts(const Row& row) const {
  for (const Clause& clause : clauses) {
    if (!clause.Accepts(row)) return false;
  }
  return true;
}

void ValidateQuery(CnfQuery& query, const Domain& domain) {
  const std::string who = query.name.empty() ? "query" : "query " + query.name;
  std::set<std::uint32_t> seen;
  for (Clause& clause : query.clauses) {
    if (clause.attribute >= domain.num_attributes()) {
      throw ConfigError(who + ": attribute index " +
                        std::to_string(clause.attribute) + " out of range");
    }
    if (!seen.insert(clause.attribute).second) {
      throw ConfigError(who + ": attribute " +
                        domain.attribute(clause.attribute).name +
                        " constrained twice");
    }
    std::sort(clause.values.begin(), clause.values.end());
    clause.values.erase(std::unique(clause.values.begin(), clause.values.end()),
                        clause.values.end());
    if (clause.values.empty()) {
      throw ConfigError(who + ": empty value set for " +
                        domain.attribute(clause.attribute).name);
    }
    if (clause.values.back() >= domain.cardinality(clause.attribute)) {
      throw ConfigError(who + ": value out of range for " +
                        domain.attribute(clause.attribute).name);
    }
  }
}

QueryWorkload::QueryWorkload(DomainPtr domain, std::vector<CnfQuery> queries)
    : domain_(std::move(domain)), queries_(std::move(queries)) {
  if (!domain_) throw ConfigError("workload without a domain");
  for (CnfQuery& q : queries_) ValidateQuery(q, *domain_);
}

double EvalQuery(const CnfQuery& query, const Dataset& data) {
  if (data.empty()) throw ConfigError("cannot evaluate a query on no rows");
  std::uint64_t count = 0;
  for (const Row& row : data.rows()) count += query.Accepts(row);
  return static_cast<double>(count) / static_cast<double>(data.size());
}

std::vector<std::uint64_t> CountWorkload(const QueryWorkload& workload,
                                         const Dataset& data) {
  if (!(workload.domain() == data.domain())) {
    throw ConfigError("workload and dataset domains differ");
  }
  const auto& hist = data.Histogram();
  std::vector<std::uint64_t> counts(workload.size(), 0);
  const auto m = static_cast<std::ptrdiff_t>(workload.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    std::uint64_t c = 0;
    for (const auto& [row, mult] : hist) {
      if (workload[j].Accepts(row)) c += mult;
    }
    counts[j] = c;
  }
  return counts;
}

AnswerVector EvalWorkload(const QueryWorkload& workload, const Dataset& data) {
  if (data.empty()) throw ConfigError("cannot evaluate a workload on no rows");
  const auto counts = CountWorkload(workload, data);
  AnswerVector out;
  out.source = AnswerSource::kExact;
  out.values.reserve(counts.size());
  const double n = static_cast<double>(data.size());
  for (std::uint64_t c : counts) out.values.push_back(static_cast<double>(c) / n);
  return out;
}

namespace {

// Calls fn(subset) for each size-k subset of [0, d) in lexicographic order.
template <typename Fn>
void ForEachSubset(std::size_t d, std::size_t k, Fn&& fn) {
  std::vector<std::uint32_t> subset(k);
  for (std::size_t i = 0; i < k; ++i) subset[i] = static_cast<std::uint32_t>(i);
  while (true) {
    fn(subset);
    std::size_t i = k;
    while (i > 0 && subset[i - 1] == d - k + i - 1) --i;
    if (i == 0) return;
    ++subset[i - 1];
    for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }
}

}  // namespace

QueryWorkload AllKWayMarginals(const DomainPtr& domain, std::size_t k) {
  const std::size_t d = domain->num_attributes();
  if (k < 1 || k > d) {
    throw ConfigError("marginal order k=" + std::to_string(k) +
                      " outside [1, " + std::to_string(d) + "]");
  }
  std::vector<CnfQuery> queries;
  queries.reserve(static_cast<std::size_t>(CountKWayMarginals(*domain, k)));
  ForEachSubset(d, k, [&](const std::vector<std::uint32_t>& subset) {
    std::vector<std::uint32_t> value(k, 0);
    while (true) {
      CnfQuery q;
      q.clauses.reserve(k);
      for (std::size_t i = 0; i < k; ++i) q.clauses.push_back({subset[i], {value[i]}});
      queries.push_back(std::move(q));
      std::size_t i = k;
      while (i > 0) {
        --i;
        if (++value[i] < domain->cardinality(subset[i])) break;
        value[i] = 0;
        if (i == 0) return;
      }
    }
  });
  return QueryWorkload(domain, std::move(queries));
}

std::uint64_t CountKWayMarginals(const Domain& domain, std::size_t k) {
  const std::size_t d = domain.num_attributes();
  if (k < 1 || k > d) return 0;
  std::uint64_t total = 0;
  ForEachSubset(d, k, [&](const std::vector<std::uint32_t>& subset) {
    std::uint64_t prod = 1;
    for (auto a : subset) prod *= domain.cardinality(a);
    total += prod;
  });
  return total;
}

namespace {

std::optional<double> AsNumber(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Expands one `in` entry into label indices.
std::vector<std::uint32_t> ExpandEntry(const Domain& domain, std::size_t attr,
                                       const nlohmann::json& entry,
                                       const std::string& cell) {
  const std::string text =
      entry.is_string() ? entry.get<std::string>() : entry.dump();
  if (auto idx = domain.FindLabel(attr, text)) return {*idx};

  std::size_t split = text.find("..");
  std::size_t skip = 2;
  if (split == std::string::npos) {
    split = text.find('-', 1);
    skip = 1;
  }
  const std::string& col = domain.attribute(attr).name;
  if (split == std::string::npos) {
    throw ConfigError(cell + ": unknown label \"" + text + "\" for column " +
                      col);
  }
  const std::string lo = text.substr(0, split);
  const std::string hi = text.substr(split + skip);
  auto lo_idx = domain.FindLabel(attr, lo);
  auto hi_idx = domain.FindLabel(attr, hi);
  std::vector<std::uint32_t> out;
  if (lo_idx && hi_idx) {
    for (std::uint32_t i = std::min(*lo_idx, *hi_idx);
         i <= std::max(*lo_idx, *hi_idx); ++i) {
      out.push_back(i);
    }
    return out;
  }
  auto lo_num = AsNumber(lo);
  auto hi_num = AsNumber(hi);
  if (!lo_num || !hi_num) {
    throw ConfigError(cell + ": cannot resolve \"" + text + "\" for column " +
                      col);
  }
  const auto& labels = domain.attribute(attr).labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto v = AsNumber(labels[i]);
    if (v && *v >= *lo_num && *v <= *hi_num) {
      out.push_back(static_cast<std::uint32_t>(i));
    }
  }
  if (out.empty()) {
    throw ConfigError(cell + ": range \"" + text + "\" matches no label of " +
                      col);
  }
  return out;
}

CnfQuery ParseCell(const nlohmann::json& cell, const Domain& domain,
                   std::size_t index, std::optional<double>* count) {
  CnfQuery q;
  q.name = "cell " + std::to_string(index);
  const nlohmann::json* clauses = &cell;
  if (cell.is_object()) {
    if (cell.contains("name")) q.name = cell["name"].get<std::string>();
    if (cell.contains("count")) *count = cell["count"].get<double>();
    static const nlohmann::json kEmpty = nlohmann::json::array();
    clauses = cell.contains("clauses") ? &cell["clauses"] : &kEmpty;
  }
  if (!clauses->is_array()) {
    throw ConfigError(q.name + ": clauses must be an array");
  }
  for (const auto& clause : *clauses) {
    if (!clause.contains("col") || !clause.contains("in")) {
      throw ConfigError(q.name + ": clause needs \"col\" and \"in\"");
    }
    const auto col = clause["col"].get<std::string>();
    auto attr = domain.FindAttribute(col);
    if (!attr) throw ConfigError(q.name + ": unknown column " + col);
    Clause c;
    c.attribute = static_cast<std::uint32_t>(*attr);
    const auto& in = clause["in"];
    if (in.is_array()) {
      for (const auto& entry : in) {
        auto v = ExpandEntry(domain, *attr, entry, q.name);
        c.values.insert(c.values.end(), v.begin(), v.end());
      }
    } else {
      c.values = ExpandEntry(domain, *attr, in, q.name);
    }
    if (c.values.empty()) {
      throw ConfigError(q.name + ": empty value set for column " + col);
    }
    q.clauses.push_back(std::move(c));
  }
  ValidateQuery(q, domain);
  return q;
}

}  // namespace

LoadedWorkload LoadWorkload(const nlohmann::json& config,
                            const DomainPtr& domain) {
  try {
    if (config.contains("marginals")) {
      const auto k = config["marginals"].at("k").get<std::int64_t>();
      if (k < 1) throw ConfigError("marginal order must be positive");
      return {AllKWayMarginals(domain, static_cast<std::size_t>(k)),
              std::nullopt};
    }
    if (!config.contains("cells") || !config["cells"].is_array()) {
      throw ConfigError(
          "workload needs a \"marginals\" object or a \"cells\" array");
    }
    std::vector<CnfQuery> queries;
    std::vector<double> counts;
    bool all_counts = true;
    std::size_t index = 0;
    for (const auto& cell : config["cells"]) {
      std::optional<double> count;
      queries.push_back(ParseCell(cell, *domain, ++index, &count));
      if (count) {
        counts.push_back(*count);
      } else {
        all_counts = false;
      }
    }
    LoadedWorkload out{QueryWorkload(domain, std::move(queries)), std::nullopt};
    if (all_counts && !counts.empty()) out.counts = std::move(counts);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed workload: ") + e.what());
  }
}

LoadedWorkload LoadWorkloadFile(const std::string& path,
                                const DomainPtr& domain) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open workload file: " + path);
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed workload " + path + ": " + e.what());
  }
  return LoadWorkload(config, domain);
}

QueryWorkload LoadCnfWorkload(const nlohmann::json& config,
                              const DomainPtr& domain) {
  return LoadWorkload(config, domain).workload;
}

AnswerVector CountsToFractions(const std::vector<double>& counts,
                               const QueryWorkload& workload,
                               std::optional<double> total) {
  if (counts.size() != workload.size()) {
    throw ConfigError("got " + std::to_string(counts.size()) +
                      " counts for a workload of " +
                      std::to_string(workload.size()) + " queries");
  }
  if (!total) {
    for (std::size_t j = 0; j < workload.size(); ++j) {
      if (workload[j].k() == 0) {
        total = counts[j];
        break;
      }
    }
  }
  if (!total) {
    throw ConfigError(
        "counts need a total: add a total-population cell or pass the size");
  }
  if (!(*total > 0)) throw ConfigError("total population must be positive");
  AnswerVector out;
  out.source = AnswerSource::kExternal;
  for (double c : counts) {
    const double f = c / *total;
    if (f < 0.0 || f > 1.0) {
      throw ConfigError("count " + std::to_string(c) + " exceeds the total");
    }
    out.values.push_back(f);
  }
  return out;
}

std::string FormatAnswersCsv(const AnswerVector& answers) {
  std::string out = "query_id,value\n";
  char buf[64];
  for (std::size_t j = 0; j < answers.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", j, answers[j]);
    out += buf;
  }
  return out;
}

AnswerVector ParseAnswersCsv(const std::string& text, std::size_t m) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("answers CSV is empty");
  AnswerVector out;
  out.source = AnswerSource::kExternal;
  std::vector<std::optional<double>> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != 2) {
      throw ConfigError("answers CSV line " + std::to_string(line_no) +
                        ": expected query_id,value");
    }
    auto id = AsNumber(fields[0]);
    auto value = AsNumber(fields[1]);
    if (!id || !value || *id < 0 || std::floor(*id) != *id) {
      throw ConfigError("answers CSV line " + std::to_string(line_no) +
                        ": malformed entry");
    }
    if (*value < 0.0 || *value > 1.0) {
      throw ConfigError("answers CSV line " + std::to_string(line_no) +
                        ": value outside [0,1]");
    }
    const auto j = static_cast<std::size_t>(*id);
    if (j >= values.size()) values.resize(j + 1);
    if (values[j]) {
      throw ConfigError("answers CSV: duplicate query_id " + std::to_string(j));
    }
    values[j] = *value;
  }
  if (values.size() != m) {
    throw ConfigError("answers CSV has " + std::to_string(values.size()) +
                      " entries but the workload has m=" + std::to_string(m));
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!values[j]) {
      throw ConfigError("answers CSV is missing query_id " + std::to_string(j));
    }
    out.values.push_back(*values[j]);
  }
  return out;
}

AnswerVector LoadAnswersCsv(const std::string& path, std::size_t m) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open answers file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseAnswersCsv(buf.str(), m);
}

}  // namespace recon
