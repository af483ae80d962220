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

#include "commands.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "recon/attack.h"
#include "recon/baselines.h"
#include "recon/bayes_oracle.h"
#include "recon/domain.h"
#include "recon/error.h"
#include "recon/evaluation.h"
#include "recon/ingest.h"
#include "recon/kernels.h"
#include "recon/optimizer.h"
#include "recon/queries.h"

namespace recon::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int DefaultJobs() {
  if (const char* env = std::getenv("RECON_JOBS")) {
    try {
      const int jobs = std::stoi(env);
      if (jobs > 0) return jobs;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("RECON_JOBS must be a positive integer, got ") +
                      env);
  }
  return 1;
}

std::string Join(const fs::path& dir, const std::string& name) {
  return (dir / name).string();
}

// Binned columns reuse the sidecar when it exists; otherwise the edges computed
// from `path` are written to it.
Dataset LoadData(const std::string& path, const Schema& schema,
                 const std::string& bins_path) {
  BinEdges edges;
  const bool have_sidecar = !bins_path.empty() && fs::exists(bins_path);
  if (have_sidecar) edges = LoadBinEdges(bins_path);
  IngestResult ingested = IngestCsvFile(path, schema.domain, edges);
  if (!bins_path.empty() && !have_sidecar && !ingested.edges.empty()) {
    SaveBinEdges(ingested.edges, bins_path);
  }
  return std::move(ingested.data);
}

std::string DatasetCsv(const Dataset& data) {
  std::ostringstream out;
  WriteDatasetCsv(data, out);
  return out.str();
}

// ---------------------------------------------------------------- attack

struct AttackFlags {
  std::string schema, workload, data, answers, bins, init = "uniform", out;
  std::size_t runs = 100, rows = 1000, draws = 1, epochs = 1000;
  double lr = 0.1, tol = 1e-8, gap = 3.0, noise = 0.1;
  long long batch = -1;
  std::optional<double> total;
  std::uint64_t seed = 0;
  int jobs = 0;
};

void AddAttack(CLI::App& app, AttackFlags& f) {
  app.add_option("--schema", f.schema, "Schema JSON")->required();
  app.add_option("--workload", f.workload, "Workload JSON")->required();
  app.add_option("--data", f.data, "Private data CSV (to compute Q(D))");
  app.add_option("--answers", f.answers, "Released answers CSV");
  app.add_option("--total", f.total,
                 "Population used to turn published counts into fractions");
  app.add_option("--bins", f.bins, "Bin-edge sidecar JSON");
  app.add_option("--init", f.init, "uniform | dataset:<csv>")
      ->capture_default_str();
  app.add_option("--runs", f.runs, "Number of projection runs K")
      ->capture_default_str();
  app.add_option("--rows", f.rows, "Relaxed rows N' (uniform init)")
      ->capture_default_str();
  app.add_option("--draws", f.draws, "Rounding draws per run")
      ->capture_default_str();
  app.add_option("--epochs", f.epochs, "Max epochs")->capture_default_str();
  app.add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--batch", f.batch, "Queries per step (0 = full, -1 = auto)")
      ->capture_default_str();
  app.add_option("--tol", f.tol, "Stop tolerance")->capture_default_str();
  app.add_option("--gap", f.gap, "Score gap for dataset init")
      ->capture_default_str();
  app.add_option("--noise", f.noise, "Noise scale for dataset init")
      ->capture_default_str();
  app.add_option("--seed", f.seed, "Master seed")->capture_default_str();
  app.add_option("--jobs", f.jobs, "Concurrent runs (default $RECON_JOBS or 1)");
  app.add_option("--out", f.out, "Output directory")->required();
}

int RunAttack(const AttackFlags& f, std::ostream& out) {
  const Schema schema = LoadSchema(f.schema);
  LoadedWorkload loaded = LoadWorkloadFile(f.workload, schema.domain);
  const QueryWorkload& workload = loaded.workload;

  AnswerVector target;
  std::string source;
  if (!f.answers.empty()) {
    target = LoadAnswersCsv(f.answers, workload.size());
    source = "answers:" + f.answers;
  } else if (loaded.counts) {
    target = CountsToFractions(*loaded.counts, workload, f.total);
    source = "workload_counts";
  } else if (!f.data.empty()) {
    target = EvalWorkload(workload, LoadData(f.data, schema, f.bins));
    source = "data:" + f.data;
  } else {
    throw ConfigError("attack needs --answers, published counts, or --data");
  }

  AttackConfig cfg;
  cfg.runs = f.runs;
  cfg.draws = f.draws;
  cfg.num_rows = f.rows;
  cfg.master_seed = f.seed;
  cfg.jobs = f.jobs > 0 ? f.jobs : DefaultJobs();
  cfg.optimizer.learning_rate = f.lr;
  cfg.optimizer.max_epochs = f.epochs;
  cfg.optimizer.stop_tolerance = f.tol;
  if (f.batch >= 0) cfg.optimizer.batch_size = static_cast<std::size_t>(f.batch);
  cfg.seed_init.gap = f.gap;
  cfg.seed_init.noise_scale = f.noise;
  if (f.init.rfind("dataset:", 0) == 0) {
    cfg.seed_dataset = LoadData(f.init.substr(8), schema, f.bins);
  } else if (f.init != "uniform") {
    throw ConfigError("--init must be uniform or dataset:<path>, got " + f.init);
  }

  const AttackResult result = RapRank(workload, target, cfg);
  json manifest = result.Manifest();
  manifest["config"] = ToJson(cfg);
  manifest["workload"] = {{"path", f.workload}, {"m", workload.size()}};
  manifest["target_source"] = source;

  const fs::path dir(f.out);
  WriteFileAtomic(Join(dir, "ranking.csv"), FormatRankingCsv(result.ranking));
  WriteFileAtomic(Join(dir, "answers.csv"), FormatAnswersCsv(target));
  WriteFileAtomic(Join(dir, "manifest.json"), manifest.dump(2) + "\n");
  out << "ranked " << result.ranking.size() << " unique rows from "
      << result.k_effective << "/" << cfg.runs << " runs -> "
      << Join(dir, "ranking.csv") << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- baseline

struct BaselineFlags {
  std::string mode, schema, data, bins, out, attr, aux, target_level,
      target_label;
  std::vector<std::string> levels;
  std::uint64_t seed = 0;
};

void AddBaseline(CLI::App& app, BaselineFlags& f) {
  app.add_option("--mode", f.mode, "holdout | hierarchy | augment")
      ->required()
      ->check(CLI::IsMember({"holdout", "hierarchy", "augment"}));
  app.add_option("--schema", f.schema, "Schema JSON")->required();
  app.add_option("--data", f.data, "Data CSV")->required();
  app.add_option("--bins", f.bins, "Bin-edge sidecar JSON");
  app.add_option("--levels", f.levels, "Hierarchy levels to emit")
      ->delimiter(',');
  app.add_option("--target-level", f.target_level, "Hierarchy column of the unit");
  app.add_option("--target-label", f.target_label, "Label of the target unit");
  app.add_option("--attr", f.attr, "Attribute to resample (augment)");
  app.add_option("--aux", f.aux, "Auxiliary data CSV (augment)");
  app.add_option("--seed", f.seed, "Seed")->capture_default_str();
  app.add_option("--out", f.out, "Output directory")->required();
}

int RunBaseline(const BaselineFlags& f, std::ostream& out) {
  const Schema schema = LoadSchema(f.schema);
  const Dataset data = LoadData(f.data, schema, f.bins);
  Rng rng = MakeRng(f.seed, 0, "baseline");
  const fs::path dir(f.out);
  std::vector<std::pair<std::string, std::string>> files;

  if (f.mode == "holdout") {
    auto [target, holdout] = SplitHoldout(data, rng);
    files.emplace_back("ranking_holdout.csv",
                       FormatRankingCsv(BaselineRanking(holdout, "holdout")));
    files.emplace_back("target.csv", DatasetCsv(target));
    files.emplace_back("holdout.csv", DatasetCsv(holdout));
  } else if (f.mode == "hierarchy") {
    if (schema.hierarchy.empty()) {
      throw ConfigError("schema declares no hierarchy columns");
    }
    const std::string level =
        f.target_level.empty() ? schema.hierarchy.back() : f.target_level;
    if (f.target_label.empty()) throw ConfigError("--target-label is required");
    HierarchyBaselines built =
        BuildHierarchyBaselines(data, schema.hierarchy, level, f.target_label, rng);
    std::vector<std::string> wanted = f.levels;
    for (const auto& name : wanted) {
      const bool known = std::any_of(
          built.levels.begin(), built.levels.end(),
          [&](const HierarchyLevel& l) { return l.name == name; });
      if (!known) throw ConfigError("unknown level: " + name);
    }
    for (const HierarchyLevel& l : built.levels) {
      if (!wanted.empty() &&
          std::find(wanted.begin(), wanted.end(), l.name) == wanted.end()) {
        continue;
      }
      files.emplace_back("ranking_" + l.name + ".csv",
                         FormatRankingCsv(BaselineRanking(l.data, l.name)));
    }
    files.emplace_back("target.csv", DatasetCsv(built.target));
    files.emplace_back("holdout.csv", DatasetCsv(built.levels.back().data));
  } else {
    if (f.attr.empty()) throw ConfigError("augment mode needs --attr");
    schema.domain->AttributeIndex(f.attr);
    Dataset target = data;
    Dataset aux;
    if (!f.aux.empty()) {
      aux = LoadData(f.aux, schema, f.bins);
    } else {
      auto split = SplitHoldout(data, rng);
      target = std::move(split.first);
      aux = std::move(split.second);
      files.emplace_back("target.csv", DatasetCsv(target));
    }
    const Dataset augmented = AugmentAttribute(aux, target, f.attr, rng);
    files.emplace_back("ranking_augmented.csv",
                       FormatRankingCsv(BaselineRanking(augmented, "augmented")));
  }
  for (const auto& [name, contents] : files) {
    WriteFileAtomic(Join(dir, name), contents);
    out << Join(dir, name) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateFlags {
  std::string schema, bins, out, u_rule = "standard";
  std::vector<std::string> targets, rankings, holdouts;
  bool average = false;
  std::size_t grid = 100;
};

void AddEvaluate(CLI::App& app, EvaluateFlags& f) {
  app.add_option("--schema", f.schema, "Schema JSON")->required();
  app.add_option("--target", f.targets, "Target data CSV (repeatable)")
      ->required();
  app.add_option("--ranking", f.rankings,
                 "[method=]ranking.csv; with several targets, the i-th ranking "
                 "of a method pairs with the i-th target")
      ->required();
  app.add_option("--holdout", f.holdouts, "Holdout data CSV per target");
  app.add_option("--u-rule", f.u_rule, "standard | holdout")
      ->check(CLI::IsMember({"standard", "holdout"}))
      ->capture_default_str();
  app.add_flag("--average", f.average, "Average curves across targets");
  app.add_option("--grid", f.grid, "Grid points for --average")
      ->capture_default_str();
  app.add_option("--bins", f.bins, "Bin-edge sidecar JSON");
  app.add_option("--out", f.out, "Output directory")->required();
}

int RunEvaluate(const EvaluateFlags& f, std::ostream& out) {
  const Schema schema = LoadSchema(f.schema);
  std::vector<Dataset> targets;
  for (const auto& path : f.targets) targets.push_back(LoadData(path, schema, f.bins));
  std::vector<std::optional<std::size_t>> u(targets.size());
  if (f.u_rule == "holdout") {
    if (f.holdouts.size() != targets.size()) {
      throw ConfigError("--u-rule holdout needs one --holdout per --target");
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      u[t] = HoldoutAdjustedU(targets[t], LoadData(f.holdouts[t], schema, f.bins));
    }
  }

  // method -> ranking paths, in command-line order
  std::vector<std::string> methods;
  std::map<std::string, std::vector<std::string>> paths;
  for (const auto& arg : f.rankings) {
    const auto eq = arg.find('=');
    std::string method = eq == std::string::npos ? fs::path(arg).stem().string()
                                                 : arg.substr(0, eq);
    std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
    if (!paths.count(method)) methods.push_back(method);
    paths[method].push_back(path);
  }

  std::vector<MatchRateCurve> curves;
  std::vector<AveragedCurve> averaged;
  for (const auto& method : methods) {
    const auto& list = paths[method];
    if (targets.size() > 1 && list.size() != targets.size()) {
      throw ConfigError("method " + method + " has " +
                        std::to_string(list.size()) + " rankings for " +
                        std::to_string(targets.size()) + " targets");
    }
    std::vector<MatchRateCurve> per_method;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::size_t t = targets.size() == 1 ? 0 : i;
      const ConfidenceRanking ranking = LoadRankingCsv(list[i], schema.domain);
      per_method.push_back(ComputeMatchRateCurve(
          ranking, targets[t], u[t], method,
          list.size() > 1 ? fs::path(f.targets[t]).stem().string() : ""));
    }
    if (f.average) {
      const auto grid = DefaultGrid(f.grid);
      averaged.push_back(AverageCurves(per_method, grid));
      averaged.back().method = method;
    }
    curves.insert(curves.end(), per_method.begin(), per_method.end());
  }
  const auto written = f.average ? EmitReport(averaged, f.out)
                                 : EmitReport(curves, f.out);
  for (const auto& path : written) out << path << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- oracle

struct OracleFlags {
  std::string dims = "2", workload = "k=1", chi, prior = "uniform", truth, out;
  std::size_t n = 2, runs = 20;
  std::uint64_t seed = 0;
};

void AddOracle(CLI::App& app, OracleFlags& f) {
  app.add_option("--dims", f.dims, "Comma-separated cardinalities")
      ->capture_default_str();
  app.add_option("--n", f.n, "Dataset size")->capture_default_str();
  app.add_option("--workload", f.workload, "k=<order> or a workload JSON")
      ->capture_default_str();
  app.add_option("--chi", f.chi, "row=<labels> (default: last row)");
  app.add_option("--prior", f.prior, "uniform | random")
      ->check(CLI::IsMember({"uniform", "random"}))
      ->capture_default_str();
  app.add_option("--truth", f.truth,
                 "True dataset as rows separated by ';', labels by ','");
  app.add_option("--runs", f.runs, "RAP-Rank runs for the reference comparison")
      ->capture_default_str();
  app.add_option("--seed", f.seed, "Seed")->capture_default_str();
  app.add_option("--out", f.out, "Write the JSON report here (default stdout)");
}

std::vector<std::string> SplitOn(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

Row ParseLabels(const std::string& text, const Domain& domain) {
  const auto labels = SplitOn(text, ',');
  if (labels.size() != domain.num_attributes()) {
    throw ConfigError("row \"" + text + "\" needs " +
                      std::to_string(domain.num_attributes()) + " labels");
  }
  Row row;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    auto idx = domain.FindLabel(a, labels[a]);
    if (!idx) throw ConfigError("unknown label \"" + labels[a] + "\"");
    row.values.push_back(*idx);
  }
  return row;
}

int RunOracle(const OracleFlags& f, std::ostream& out) {
  std::vector<Attribute> attrs;
  for (const auto& card_text : SplitOn(f.dims, ',')) {
    std::size_t card = 0;
    try {
      card = std::stoul(card_text);
    } catch (const std::exception&) {
      throw ConfigError("--dims: bad cardinality \"" + card_text + "\"");
    }
    if (card == 0) throw ConfigError("--dims: cardinalities must be positive");
    Attribute attr;
    attr.name = "A" + std::to_string(attrs.size());
    for (std::size_t c = 0; c < card; ++c) attr.labels.push_back(std::to_string(c));
    attrs.push_back(std::move(attr));
  }
  auto domain = std::make_shared<const Domain>(std::move(attrs));
  CheckEnumerable(*domain, f.n);

  QueryWorkload workload;
  if (f.workload.rfind("k=", 0) == 0) {
    workload = AllKWayMarginals(domain, std::stoul(f.workload.substr(2)));
  } else {
    workload = LoadWorkloadFile(f.workload, domain).workload;
  }
  Rng rng = MakeRng(f.seed, 0, "oracle");
  const DatasetPrior prior = f.prior == "uniform"
                                 ? UniformTuplePrior(domain, f.n)
                                 : RandomPrior(domain, f.n, rng);
  const Row chi_row =
      f.chi.empty()
          ? RowFromIndex(*domain, domain->RowSpaceSize() - 1)
          : ParseLabels(f.chi.rfind("row=", 0) == 0 ? f.chi.substr(4) : f.chi,
                        *domain);
  const IdentityCheck check = VerifyIdentity(prior, workload, BothContain(chi_row));

  Dataset truth;
  if (!f.truth.empty()) {
    std::vector<Row> rows;
    for (const auto& r : SplitOn(f.truth, ';')) rows.push_back(ParseLabels(r, *domain));
    truth = Dataset(domain, std::move(rows));
    if (truth.size() != f.n) throw ConfigError("--truth must have n rows");
  } else {
    std::discrete_distribution<std::size_t> pick(prior.probability.begin(),
                                                 prior.probability.end());
    truth = prior.datasets[pick(rng)];
  }
  const AnswerVector observed = EvalWorkload(workload, truth);
  const ConfidenceRanking posterior =
      PosteriorMembershipRanking(prior, workload, observed);
  AttackConfig cfg;
  cfg.runs = f.runs;
  cfg.num_rows = f.n;
  cfg.master_seed = f.seed;
  const AttackResult attack = RapRank(workload, observed, cfg);
  const std::size_t u = truth.NumUnique();
  auto top = [u](const ConfidenceRanking& r) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < std::min(u, r.size()); ++i) rows.push_back(r.row(i));
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  auto rows_json = [&](const std::vector<Row>& rows) {
    json arr = json::array();
    for (const Row& row : rows) arr.push_back(FormatRow(row, *domain));
    return arr;
  };
  const auto posterior_top = top(posterior);
  const auto attack_top = top(attack.ranking);

  json report;
  report["lhs"] = check.lhs;
  report["rhs"] = check.rhs;
  report["gap"] = check.gap;
  report["identity_holds"] = check.gap < 1e-12;
  report["instance"] = {{"dims", f.dims},
                        {"n", f.n},
                        {"workload", f.workload},
                        {"m", workload.size()},
                        {"prior", f.prior},
                        {"datasets", prior.size()},
                        {"chi_row", FormatRow(chi_row, *domain)},
                        {"seed", f.seed}};
  const auto hist = truth.Histogram();
  std::vector<Row> truth_rows;
  for (const auto& [row, count] : hist) truth_rows.push_back(row);
  report["reference_ranking"] = {{"truth", rows_json(truth_rows)},
                                 {"posterior_top", rows_json(posterior_top)},
                                 {"rap_rank_top", rows_json(attack_top)},
                                 {"agree", posterior_top == attack_top},
                                 {"runs", f.runs}};
  const std::string text = report.dump(2) + "\n";
  if (f.out.empty()) {
    out << text;
  } else {
    WriteFileAtomic(f.out, text);
    out << "gap " << check.gap << " -> " << f.out << "\n";
  }
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Reconstruct confidence-ranked rows from aggregate statistics"};
  app.name("recon");
  app.require_subcommand(1);
  AttackFlags attack;
  BaselineFlags baseline;
  EvaluateFlags evaluate;
  OracleFlags oracle;
  auto* attack_cmd = app.add_subcommand("attack", "Run RAP-Rank on released answers");
  auto* baseline_cmd = app.add_subcommand("baseline", "Build baseline rankings");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Match-rate curves and report");
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustive posterior checks");
  AddAttack(*attack_cmd, attack);
  AddBaseline(*baseline_cmd, baseline);
  AddEvaluate(*evaluate_cmd, evaluate);
  AddOracle(*oracle_cmd, oracle);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (attack_cmd->parsed()) return RunAttack(attack, out);
    if (baseline_cmd->parsed()) return RunBaseline(baseline, out);
    if (evaluate_cmd->parsed()) return RunEvaluate(evaluate, out);
    if (oracle_cmd->parsed()) return RunOracle(oracle, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace recon::cli
