#ifndef QEFORGE_STATS_H_
#define QEFORGE_STATS_H_

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qeforge/pipeline.h"

namespace qeforge {

// Ten 0.1-wide bins over [0, 1) plus an overflow bin for TER >= 1.0.
struct TerHistogram {
  static constexpr size_t kBins = 10;
  static constexpr size_t kOverflow = kBins;

  std::array<size_t, kBins + 1> counts{};

  // Bin k holds [k/10, (k+1)/10); kOverflow holds everything >= 1.0.
  static size_t BinOf(double ter);
  static std::string RangeLabel(size_t bin);  // "0.3-0.4", "1.0+"

  void Add(double ter) { ++counts[BinOf(ter)]; }
  size_t Total() const;
};

struct TerSummary {
  double mean = 0.0;
  double median = 0.0;    // lower middle element for even counts
  double std_dev = 0.0;   // population (divide by n)
  double variance = 0.0;  // population
};

// Throws InputError on an empty input. Order of `values` does not matter.
TerSummary SummarizeTer(std::vector<double> values);

struct SideCounts {
  size_t source = 0;
  size_t mt = 0;
  size_t pe = 0;
};

struct CorpusStats {
  SideCounts sentence_counts;
  SideCounts token_counts;
  double avg_tokens_source = 0.0;
  double avg_tokens_mt = 0.0;
  double avg_tokens_pe = 0.0;
  TerSummary ter;
  size_t source_ok = 0;
  size_t source_bad = 0;
  size_t mt_ok = 0;
  size_t mt_bad = 0;
  std::string ter_mode;  // "no-shifts" or "shifts"
  TerHistogram histogram;
};

// One streaming pass over a dataset directory. Throws InputError when the
// dataset has no records.
CorpusStats ComputeCorpusStats(const DatasetManifest& manifest);
TerHistogram ComputeTerHistogram(const DatasetManifest& manifest);
TerHistogram HistogramOf(std::span<const double> ters);

nlohmann::json StatsToJson(const CorpusStats& stats);
// Aligned text table with the conventions in the header lines.
std::string StatsToText(const CorpusStats& stats);

// Writes stats.json and stats.txt into out_dir.
void WriteStatsReport(const CorpusStats& stats, const std::string& out_dir);

std::vector<double> ReadTerFile(const std::string& path);

}  // namespace qeforge

#endif  // QEFORGE_STATS_H_
