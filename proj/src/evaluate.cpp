#include "fabsearch/evaluate.hpp"

#include <algorithm>
#include <cstdio>

#include "fabsearch/error.hpp"

namespace fabsearch {

TruthTable::TruthTable(const GroundTruth& rows) : rows_(rows) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!by_id_.emplace(rows_[i].part_id, i).second)
      throw Error(ErrorCode::DuplicateId, "ground truth lists part " + format_part_id(rows_[i].part_id) + " twice");
    specialties_[rows_[i].manufacturer_id].insert(rows_[i].process);
  }
}

const GroundTruthRow& TruthTable::row(PartId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(ErrorCode::UnknownPart, "part " + format_part_id(id) + " has no ground truth");
  return rows_[it->second];
}

bool TruthTable::specializes(const std::string& manufacturer, Process p) const {
  auto it = specialties_.find(manufacturer);
  return it != specialties_.end() && it->second.count(p) != 0;
}

Verdict evaluate_part(const Repository& repo, const KnnGraph& depth_graph, const TruthTable& truth, PartId id,
                      std::size_t k) {
  const PartRecord& part = repo.get(id);
  const GroundTruthRow& gt = truth.row(id);
  const Neighborhood n =
      query_neighborhood(repo, depth_graph, part.signature, k, {.exclude = id, .query_id = id});
  const QueryRequirements req{part.meta.material_class, part.meta.tolerance_class.value_or(gt.tolerance_class)};
  const ManufacturerRanking ranking = rank_manufacturers(n, repo, req);

  Verdict v;
  v.part_id = id;
  v.process = gt.process;
  v.original_manufacturer = gt.manufacturer_id;
  v.neighborhood_size = n.members.size();
  for (const RankingEntry& e : ranking.entries)
    if (e.manufacturer_id == gt.manufacturer_id) v.original_posterior = e.posterior;
  if (!ranking.entries.empty()) {
    const RankingEntry& top = ranking.entries.front();
    v.top_manufacturer = top.manufacturer_id;
    v.top_posterior = top.posterior;
    v.correct_type = truth.specializes(top.manufacturer_id, gt.process);
    v.improved = v.correct_type && top.manufacturer_id != gt.manufacturer_id;
    v.strictly_improved = v.improved && v.top_posterior > v.original_posterior;
  }
  return v;
}

namespace {

std::vector<PartId> selected_parts(const TruthTable& truth, const EvaluationOptions& options) {
  std::vector<PartId> ids;
  for (const GroundTruthRow& r : truth.rows())
    if (!options.material || r.material_class == *options.material) ids.push_back(r.part_id);
  return ids;
}

}  // namespace

std::vector<Verdict> evaluate_all(const Repository& repo, const TruthTable& truth, const EvaluationOptions& options) {
  const std::vector<PartId> ids = selected_parts(truth, options);
  for (PartId id : ids) repo.get(id);
  const KnnGraph graph = build_neighbor_lists(repo, options.k + 1);
  std::vector<Verdict> out(ids.size());
  const auto n = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = evaluate_part(repo, graph, truth, ids[static_cast<std::size_t>(i)], options.k);
  return out;
}

std::vector<Verdict> evaluate_all_serial(const Repository& repo, const TruthTable& truth,
                                         const EvaluationOptions& options) {
  const std::vector<PartId> ids = selected_parts(truth, options);
  for (PartId id : ids) repo.get(id);
  const KnnGraph graph = repo.size() >= 2 ? build_knn_graph_serial(repo, options.k + 1) : build_neighbor_lists(repo, options.k + 1);
  std::vector<Verdict> out;
  for (PartId id : ids) out.push_back(evaluate_part(repo, graph, truth, id, options.k));
  return out;
}

namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

struct Tally {
  std::size_t parts = 0, correct = 0, improved = 0;
};

std::vector<std::pair<std::string, Tally>> tally(const std::vector<Verdict>& verdicts, bool strict) {
  std::map<Process, Tally> per;
  Tally total;
  for (const Verdict& v : verdicts) {
    for (Tally* t : {&per[v.process], &total}) {
      ++t->parts;
      t->correct += v.correct_type;
      t->improved += strict ? v.strictly_improved : v.improved;
    }
  }
  std::vector<std::pair<std::string, Tally>> rows;
  for (Process p : kAllProcesses)
    if (auto it = per.find(p); it != per.end()) rows.emplace_back(std::string(to_string(p)), it->second);
  rows.emplace_back("Total", total);
  return rows;
}

}  // namespace

std::vector<Metric1Row> metric1(const std::vector<Verdict>& verdicts) {
  std::vector<Metric1Row> out;
  for (const auto& [name, t] : tally(verdicts, false)) out.push_back({name, t.parts, t.correct, percent(t.correct, t.parts)});
  return out;
}

std::vector<Metric2Row> metric2(const std::vector<Verdict>& verdicts, bool strict) {
  std::vector<Metric2Row> out;
  for (const auto& [name, t] : tally(verdicts, strict))
    out.push_back({name, t.parts, t.correct, t.improved, percent(t.improved, t.correct), percent(t.improved, t.parts)});
  return out;
}

EvaluationReport make_report(const std::vector<Verdict>& verdicts, const EvaluationOptions& options) {
  return {options.k, options.strict, metric1(verdicts), metric2(verdicts, options.strict)};
}

std::string format_report_text(const EvaluationReport& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "Metric 1: correct manufacturer type (k = %zu)\n", r.k);
  out += line;
  std::snprintf(line, sizeof line, "%-12s %16s %30s %31s\n", "Category", "Number of parts", "Number of correct assignments",
                "Percentage correct assignments");
  out += line;
  for (const auto& row : r.metric1) {
    std::snprintf(line, sizeof line, "%-12s %16zu %30zu %30.1f%%\n", row.category.c_str(), row.parts, row.correct,
                  row.percent_correct);
    out += line;
  }
  std::snprintf(line, sizeof line, "\nMetric 2: improved assignments%s\n", r.strict ? " (strict)" : "");
  out += line;
  std::snprintf(line, sizeof line, "%-12s %50s %46s\n", "Category", "Improved assignments in correctly identified parts",
                "Improved assignments as a percent of all parts");
  out += line;
  for (const auto& row : r.metric2) {
    std::snprintf(line, sizeof line, "%-12s %49.1f%% %45.1f%%\n", row.category.c_str(), row.percent_of_correct,
                  row.percent_of_all);
    out += line;
  }
  return out;
}

std::string format_report_csv(const EvaluationReport& r) {
  std::string out = "category,parts,correct,percent_correct\n";
  char line[256];
  for (const auto& row : r.metric1) {
    std::snprintf(line, sizeof line, "%s,%zu,%zu,%.4f\n", row.category.c_str(), row.parts, row.correct, row.percent_correct);
    out += line;
  }
  out += "\ncategory,parts,correct,improved,percent_of_correct,percent_of_all\n";
  for (const auto& row : r.metric2) {
    std::snprintf(line, sizeof line, "%s,%zu,%zu,%zu,%.4f,%.4f\n", row.category.c_str(), row.parts, row.correct,
                  row.improved, row.percent_of_correct, row.percent_of_all);
    out += line;
  }
  return out;
}

std::string format_verdicts_csv(const std::vector<Verdict>& verdicts) {
  std::string out =
      "part_id,process,original_manufacturer,top_manufacturer,top_posterior,original_posterior,neighborhood_size,"
      "correct_type,improved,strictly_improved\n";
  char num[64];
  for (const Verdict& v : verdicts) {
    std::snprintf(num, sizeof num, "%.6f,%.6f,%zu", v.top_posterior, v.original_posterior, v.neighborhood_size);
    out += format_part_id(v.part_id) + ',' + std::string(to_string(v.process)) + ',' + v.original_manufacturer + ',' +
           v.top_manufacturer.value_or("") + ',' + num + ',' + (v.correct_type ? "1" : "0") + ',' +
           (v.improved ? "1" : "0") + ',' + (v.strictly_improved ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace fabsearch
