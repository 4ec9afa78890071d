#include "qeforge/evaluation.h"

#include <cmath>
#include <cstdio>

#include "qeforge/corpus_io.h"
#include "qeforge/errors.h"
#include "qeforge/stats.h"

namespace qeforge {

void ConfusionCounts::Add(Tag predicted, Tag gold) {
  const bool p = predicted == Tag::kBad;
  const bool g = gold == Tag::kBad;
  if (p && g) ++tp;
  else if (p) ++fp;
  else if (g) ++fn;
  else ++tn;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

double ConfusionCounts::Mcc() const {
  const long double a = static_cast<long double>(tp + fp);
  const long double b = static_cast<long double>(tp + fn);
  const long double c = static_cast<long double>(tn + fp);
  const long double d = static_cast<long double>(tn + fn);
  if (a == 0 || b == 0 || c == 0 || d == 0) return 0.0;
  const long double num = static_cast<long double>(tp) * tn -
                          static_cast<long double>(fp) * fn;
  return static_cast<double>(num / (std::sqrt(a * b) * std::sqrt(c * d)));
}

std::vector<ConfusionCounts> CompareTagFiles(const std::string& predicted,
                                             const std::string& gold,
                                             TagPositions positions) {
  LineReader pred(predicted), ref(gold);
  std::vector<ConfusionCounts> out;
  std::string p, g;
  while (true) {
    const bool hp = pred.Next(p);
    const bool hg = ref.Next(g);
    if (hp != hg) {
      throw InputError("tag files " + predicted + " and " + gold +
                       " differ in line count (line " +
                       std::to_string(std::max(pred.line_no(), ref.line_no())) + ")");
    }
    if (!hp) break;
    const auto pt = ParseTags(p);
    const auto gt = ParseTags(g);
    if (pt.size() != gt.size()) {
      throw InputError("tag count mismatch at line " + std::to_string(pred.line_no()) +
                       ": predicted " + std::to_string(pt.size()) + ", gold " +
                       std::to_string(gt.size()));
    }
    ConfusionCounts c;
    for (size_t i = 0; i < pt.size(); ++i) {
      const bool gap = i % 2 == 0;
      if (positions == TagPositions::kTokensOnly && gap) continue;
      if (positions == TagPositions::kGapsOnly && !gap) continue;
      c.Add(pt[i], gt[i]);
    }
    out.push_back(c);
  }
  return out;
}

ConfusionCounts Pool(const std::vector<ConfusionCounts>& per_record) {
  ConfusionCounts total;
  for (const auto& c : per_record) total += c;
  return total;
}

double MccOfFiles(const std::string& predicted, const std::string& gold) {
  return Pool(CompareTagFiles(predicted, gold)).Mcc();
}

std::vector<BinMcc> MccByTerRange(const std::vector<ConfusionCounts>& per_record,
                                  const std::vector<double>& ters) {
  if (per_record.size() != ters.size()) {
    throw InputError("TER file has " + std::to_string(ters.size()) +
                     " lines but the tag files have " +
                     std::to_string(per_record.size()));
  }
  std::vector<BinMcc> bins(TerHistogram::kBins + 1);
  for (size_t k = 0; k < bins.size(); ++k) bins[k].range = TerHistogram::RangeLabel(k);
  for (size_t i = 0; i < ters.size(); ++i) {
    BinMcc& b = bins[TerHistogram::BinOf(ters[i])];
    ++b.records;
    b.counts += per_record[i];
  }
  for (auto& b : bins) {
    if (b.records > 0) b.mcc = b.counts.Mcc();
  }
  return bins;
}

MccReport Evaluate(const EvaluationInputs& in) {
  MccReport report;
  const auto per_record = CompareTagFiles(in.predicted_mt_tags, in.gold_mt_tags);
  report.target_mcc = Pool(per_record).Mcc();
  if (in.predicted_source_tags.has_value() != in.gold_source_tags.has_value()) {
    throw InputError("source MCC needs both predicted and gold source tags");
  }
  if (in.predicted_source_tags) {
    report.source_mcc = MccOfFiles(*in.predicted_source_tags, *in.gold_source_tags);
  }
  if (in.split_gaps) {
    report.target_token_mcc =
        Pool(CompareTagFiles(in.predicted_mt_tags, in.gold_mt_tags,
                             TagPositions::kTokensOnly)).Mcc();
    report.target_gap_mcc =
        Pool(CompareTagFiles(in.predicted_mt_tags, in.gold_mt_tags,
                             TagPositions::kGapsOnly)).Mcc();
  }
  if (in.ter_file) report.per_bin = MccByTerRange(per_record, ReadTerFile(*in.ter_file));
  return report;
}

nlohmann::json ReportToJson(const MccReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : r.per_bin) {
    bins.push_back({{"range", b.range}, {"mcc", opt(b.mcc)}, {"count", b.records}});
  }
  nlohmann::json j = {{"target_mcc", r.target_mcc},
                      {"source_mcc", opt(r.source_mcc)},
                      {"per_bin", bins},
                      {"positive_class", "BAD"},
                      {"zero_denominator", 0}};
  if (r.target_token_mcc) {
    j["target_token_mcc"] = *r.target_token_mcc;
    j["target_gap_mcc"] = opt(r.target_gap_mcc);
  }
  return j;
}

std::string ReportToText(const MccReport& r) {
  char buf[96];
  std::string out;
  std::snprintf(buf, sizeof buf, "Target MCC  %.4f\n", r.target_mcc);
  out += buf;
  if (r.source_mcc) {
    std::snprintf(buf, sizeof buf, "Source MCC  %.4f\n", *r.source_mcc);
    out += buf;
  }
  if (r.target_token_mcc) {
    std::snprintf(buf, sizeof buf, "Target MCC (tokens)  %.4f\nTarget MCC (gaps)    %.4f\n",
                  *r.target_token_mcc, *r.target_gap_mcc);
    out += buf;
  }
  if (!r.per_bin.empty()) {
    out += "\nTER range   records   Target MCC\n";
    for (const auto& b : r.per_bin) {
      if (b.mcc) {
        std::snprintf(buf, sizeof buf, "%-9s %9zu   %10.4f\n", b.range.c_str(), b.records, *b.mcc);
      } else {
        std::snprintf(buf, sizeof buf, "%-9s %9zu   %10s\n", b.range.c_str(), b.records, "-");
      }
      out += buf;
    }
  }
  return out;
}

}  // namespace qeforge
