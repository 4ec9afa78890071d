#ifndef QEFORGE_EVALUATION_H_
#define QEFORGE_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qeforge/tags.h"

namespace qeforge {

// BAD is the positive class.
struct ConfusionCounts {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t tn = 0;
  uint64_t fn = 0;

  void Add(Tag predicted, Tag gold);
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  uint64_t Total() const { return tp + fp + tn + fn; }

  // (tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn)); 0 when any factor
  // of the denominator is 0.
  double Mcc() const;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Which positions of a 2N+1 MT tag line take part.
enum class TagPositions { kAll, kTokensOnly, kGapsOnly };

// Per-record confusion counts of two line-aligned tag files. Throws InputError
// naming the first line whose tag counts differ, or when the files have a
// different number of lines.
std::vector<ConfusionCounts> CompareTagFiles(const std::string& predicted,
                                             const std::string& gold,
                                             TagPositions positions = TagPositions::kAll);

ConfusionCounts Pool(const std::vector<ConfusionCounts>& per_record);

// Pooled MCC over every tag in the two files.
double MccOfFiles(const std::string& predicted, const std::string& gold);

struct BinMcc {
  std::string range;
  std::optional<double> mcc;  // nullopt for an empty bin
  size_t records = 0;
  ConfusionCounts counts;
};

// Partitions records into the TER histogram bins and pools within each.
std::vector<BinMcc> MccByTerRange(const std::vector<ConfusionCounts>& per_record,
                                  const std::vector<double>& ters);

struct EvaluationInputs {
  std::string predicted_mt_tags;
  std::string gold_mt_tags;
  std::optional<std::string> predicted_source_tags;
  std::optional<std::string> gold_source_tags;
  std::optional<std::string> ter_file;
  bool split_gaps = false;
};

struct MccReport {
  double target_mcc = 0.0;
  std::optional<double> source_mcc;
  std::optional<double> target_token_mcc;  // only with split_gaps
  std::optional<double> target_gap_mcc;
  std::vector<BinMcc> per_bin;
};

MccReport Evaluate(const EvaluationInputs& inputs);
nlohmann::json ReportToJson(const MccReport& report);
std::string ReportToText(const MccReport& report);

}  // namespace qeforge

#endif  // QEFORGE_EVALUATION_H_
