#include "qeforge/stats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qeforge/corpus_io.h"
#include "qeforge/errors.h"
#include "qeforge/tags.h"

namespace qeforge {
namespace {

// Neumaier compensated sum.
double CompensatedSum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

size_t CountTokens(const std::string& line) {
  size_t n = 0;
  bool in_token = false;
  for (char c : line) {
    if (c == ' ') {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

std::string WithCommas(size_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (size_t i = 0; i < digits.size(); ++i) {
    if (i && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string TwoDecimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double Ratio(size_t a, size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace

size_t TerHistogram::BinOf(double ter) {
  if (!(ter < 1.0)) return kOverflow;
  for (size_t k = kBins - 1; k > 0; --k) {
    // k / 10.0 is the correctly rounded double of the decimal boundary, so a
    // parsed "0.700000" lands in bin 7.
    if (ter >= static_cast<double>(k) / 10.0) return k;
  }
  return 0;
}

std::string TerHistogram::RangeLabel(size_t bin) {
  if (bin >= kOverflow) return "1.0+";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f-%.1f", bin / 10.0, (bin + 1) / 10.0);
  return buf;
}

size_t TerHistogram::Total() const {
  size_t n = 0;
  for (size_t c : counts) n += c;
  return n;
}

TerSummary SummarizeTer(std::vector<double> values) {
  if (values.empty()) throw InputError("TER statistics of an empty dataset");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  TerSummary s;
  s.mean = CompensatedSum(values) / n;
  s.median = values[(values.size() - 1) / 2];
  std::vector<double> sq(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - s.mean;
    sq[i] = d * d;
  }
  std::sort(sq.begin(), sq.end());
  s.variance = CompensatedSum(sq) / n;
  s.std_dev = std::sqrt(s.variance);
  return s;
}

std::vector<double> ReadTerFile(const std::string& path) {
  LineReader in(path);
  std::vector<double> out;
  std::string line;
  while (in.Next(line)) {
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (line.empty() || end == line.c_str() || *end != '\0' || !(v >= 0.0)) {
      throw InputError(path + ": bad TER value at line " + std::to_string(in.line_no()));
    }
    out.push_back(v);
  }
  return out;
}

TerHistogram HistogramOf(std::span<const double> ters) {
  TerHistogram h;
  for (double t : ters) h.Add(t);
  return h;
}

TerHistogram ComputeTerHistogram(const DatasetManifest& manifest) {
  manifest.Validate();
  TerHistogram h;
  for (double t : ReadTerFile(manifest.Path("ter.txt"))) h.Add(t);
  return h;
}

CorpusStats ComputeCorpusStats(const DatasetManifest& manifest) {
  manifest.Validate();
  if (manifest.records == 0) throw InputError("dataset " + manifest.directory + " is empty");
  CorpusStats st;
  LineReader src(manifest.Path("src.txt")), mt(manifest.Path("mt.txt")),
      pe(manifest.Path("pe.txt")), mt_tags(manifest.Path("mt_tags.txt")),
      source_tags(manifest.Path("source_tags.txt"));
  std::string s, m, p, mtag, stag;
  while (src.Next(s) && mt.Next(m) && pe.Next(p) && mt_tags.Next(mtag) &&
         source_tags.Next(stag)) {
    ++st.sentence_counts.source;
    ++st.sentence_counts.mt;
    ++st.sentence_counts.pe;
    st.token_counts.source += CountTokens(s);
    st.token_counts.mt += CountTokens(m);
    st.token_counts.pe += CountTokens(p);
    for (Tag t : ParseTags(mtag)) ++(t == Tag::kOk ? st.mt_ok : st.mt_bad);
    for (Tag t : ParseTags(stag)) ++(t == Tag::kOk ? st.source_ok : st.source_bad);
  }
  st.avg_tokens_source = Ratio(st.token_counts.source, st.sentence_counts.source);
  st.avg_tokens_mt = Ratio(st.token_counts.mt, st.sentence_counts.mt);
  st.avg_tokens_pe = Ratio(st.token_counts.pe, st.sentence_counts.pe);

  std::vector<double> ters = ReadTerFile(manifest.Path("ter.txt"));
  st.histogram = HistogramOf(ters);
  st.ter = SummarizeTer(std::move(ters));

  bool shifts = false;
  if (manifest.config.contains("pipeline")) {
    shifts = manifest.config["pipeline"].value("ter_shifts", false);
  }
  st.ter_mode = shifts ? "shifts" : "no-shifts";
  return st;
}

nlohmann::json StatsToJson(const CorpusStats& st) {
  auto side = [](const SideCounts& c) {
    return nlohmann::json{{"source", c.source}, {"mt", c.mt}, {"pe", c.pe}};
  };
  nlohmann::json bins = nlohmann::json::array();
  for (size_t k = 0; k < st.histogram.counts.size(); ++k) {
    bins.push_back({{"range", TerHistogram::RangeLabel(k)},
                    {"count", st.histogram.counts[k]}});
  }
  return {
      {"sentenceCounts", side(st.sentence_counts)},
      {"tokenCounts", side(st.token_counts)},
      {"avgTokensPerSentence",
       {{"source", st.avg_tokens_source}, {"mt", st.avg_tokens_mt}, {"pe", st.avg_tokens_pe}}},
      {"terMean", st.ter.mean},
      {"terMedian", st.ter.median},
      {"terStd", st.ter.std_dev},
      {"terVariance", st.ter.variance},
      {"tagCounts",
       {{"sourceOK", st.source_ok},
        {"sourceBAD", st.source_bad},
        {"mtOK", st.mt_ok},
        {"mtBAD", st.mt_bad}}},
      {"terMode", st.ter_mode},
      {"conventions", {{"std", "population"}, {"median", "lower"}}},
      {"terHistogram", bins},
  };
}

std::string StatsToText(const CorpusStats& st) {
  std::vector<std::pair<std::string, std::string>> rows = {
      {"# of Source Sentences", WithCommas(st.sentence_counts.source)},
      {"# of MT Output", WithCommas(st.sentence_counts.mt)},
      {"# of pseudo-PE", WithCommas(st.sentence_counts.pe)},
      {"", ""},
      {"# of Source Tokens", WithCommas(st.token_counts.source)},
      {"# of MT Output Tokens", WithCommas(st.token_counts.mt)},
      {"# of pseudo-PE Tokens", WithCommas(st.token_counts.pe)},
      {"", ""},
      {"Average Token Per Source Sentence", TwoDecimals(st.avg_tokens_source)},
      {"Average Token Per MT Output", TwoDecimals(st.avg_tokens_mt)},
      {"Average Token Per pseudo-PE", TwoDecimals(st.avg_tokens_pe)},
      {"", ""},
      {"Mean TER", TwoDecimals(st.ter.mean)},
      {"Median TER", TwoDecimals(st.ter.median)},
      {"STD TER", TwoDecimals(st.ter.std_dev)},
      {"Variance TER", TwoDecimals(st.ter.variance)},
      {"", ""},
      {"# Source OK tags", WithCommas(st.source_ok)},
      {"# Source BAD tags", WithCommas(st.source_bad)},
      {"# MT Output OK tags", WithCommas(st.mt_ok)},
      {"# MT Output BAD tags", WithCommas(st.mt_bad)},
  };
  size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  std::string out;
  out += "# TER mode: " + st.ter_mode + "\n";
  out += "# STD/Variance: population (divide by n); Median: lower middle for even counts\n";
  for (const auto& [k, v] : rows) {
    if (k.empty()) {
      out += std::string(width + 14, '-') + "\n";
      continue;
    }
    out += k + std::string(width - k.size() + 2, ' ');
    out += std::string(12 - std::min<size_t>(12, v.size()), ' ') + v + "\n";
  }
  out += "\nTER range    count\n";
  for (size_t k = 0; k < st.histogram.counts.size(); ++k) {
    const std::string label = TerHistogram::RangeLabel(k);
    out += label + std::string(9 - label.size(), ' ');
    const std::string c = std::to_string(st.histogram.counts[k]);
    out += std::string(12 - std::min<size_t>(12, c.size()), ' ') + c + "\n";
  }
  return out;
}

void WriteStatsReport(const CorpusStats& stats, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream json(out_dir + "/stats.json");
  std::ofstream text(out_dir + "/stats.txt");
  if (!json || !text) throw InputError("cannot write stats report to " + out_dir);
  json << StatsToJson(stats).dump(2) << '\n';
  text << StatsToText(stats);
}

}  // namespace qeforge
