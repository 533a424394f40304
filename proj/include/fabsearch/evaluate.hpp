#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fabsearch/graph.hpp"
#include "fabsearch/index.hpp"
#include "fabsearch/ranker.hpp"
#include "fabsearch/simulate.hpp"

namespace fabsearch {

/// Ground truth keyed for evaluation: each part's dominant process and
/// original manufacturer, and every manufacturer's specialties (the
/// processes it was assigned parts for).
class TruthTable {
 public:
  explicit TruthTable(const GroundTruth& rows);

  /// Throws UnknownPart.
  const GroundTruthRow& row(PartId id) const;
  bool specializes(const std::string& manufacturer, Process p) const;
  const GroundTruth& rows() const { return rows_; }

 private:
  GroundTruth rows_;
  std::map<PartId, std::size_t> by_id_;
  std::map<std::string, std::set<Process>> specialties_;
};

struct Verdict {
  PartId part_id = 0;
  Process process = Process::Machining;
  std::string original_manufacturer;
  /// Unset when the ranking is empty.
  std::optional<std::string> top_manufacturer;
  double top_posterior = 0.0;
  /// Posterior of the original manufacturer in the same ranking (0 if absent).
  double original_posterior = 0.0;
  std::size_t neighborhood_size = 0;
  bool correct_type = false;
  /// correct_type and the top manufacturer differs from the original one.
  bool improved = false;
  /// improved and the top posterior is strictly above the original's.
  bool strictly_improved = false;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct EvaluationOptions {
  std::size_t k = kDefaultK;
  /// Count only strictly improved verdicts in Metric 2.
  bool strict = false;
  /// Restrict the evaluated parts to one material class.
  std::optional<MaterialClass> material;
};

/// Leave-one-out verdict for one part: the part is excluded from the
/// repository and queried with its own signature, material and tolerance
/// class. `depth_graph` must be at least (k + 1) deep.
/// Throws UnknownPart.
Verdict evaluate_part(const Repository& repo, const KnnGraph& depth_graph, const TruthTable& truth, PartId id,
                      std::size_t k);

/// Every ground-truth part that passes the options' material filter,
/// parallel over parts.
std::vector<Verdict> evaluate_all(const Repository& repo, const TruthTable& truth, const EvaluationOptions& options = {});
/// Single-threaded reference for evaluate_all.
std::vector<Verdict> evaluate_all_serial(const Repository& repo, const TruthTable& truth,
                                         const EvaluationOptions& options = {});

struct Metric1Row {
  std::string category;
  std::size_t parts = 0;
  std::size_t correct = 0;
  double percent_correct = 0.0;

  friend bool operator==(const Metric1Row&, const Metric1Row&) = default;
};

struct Metric2Row {
  std::string category;
  std::size_t parts = 0;
  std::size_t correct = 0;
  std::size_t improved = 0;
  double percent_of_correct = 0.0;
  double percent_of_all = 0.0;

  friend bool operator==(const Metric2Row&, const Metric2Row&) = default;
};

/// One row per process present in the verdicts, in process order, then a
/// "Total" row.
std::vector<Metric1Row> metric1(const std::vector<Verdict>& verdicts);
std::vector<Metric2Row> metric2(const std::vector<Verdict>& verdicts, bool strict = false);

struct EvaluationReport {
  std::size_t k = kDefaultK;
  bool strict = false;
  std::vector<Metric1Row> metric1;
  std::vector<Metric2Row> metric2;
};

EvaluationReport make_report(const std::vector<Verdict>& verdicts, const EvaluationOptions& options);

std::string format_report_text(const EvaluationReport& report);
/// Two CSV sections separated by a blank line.
std::string format_report_csv(const EvaluationReport& report);
/// One line per verdict.
std::string format_verdicts_csv(const std::vector<Verdict>& verdicts);

}  // namespace fabsearch
