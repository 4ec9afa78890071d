#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fixtures.h"
#include "oracles.h"
#include "qeforge/aligner.h"
#include "qeforge/backend.h"
#include "qeforge/cli.h"
#include "qeforge/corpus_io.h"
#include "qeforge/evaluation.h"
#include "qeforge/log.h"
#include "qeforge/pipeline.h"
#include "qeforge/stats.h"
#include "qeforge/tags.h"
#include "qeforge/ter.h"

namespace {

using namespace qeforge;
using fixtures::DataPath;
using fixtures::ReadFile;
using fixtures::TempDir;
using fixtures::WriteFile;

struct CriterionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void Require(bool ok, const std::string& what) {
  if (!ok) throw CriterionFailure(what);
}

std::string Line(const std::string& rel) {
  std::string s = ReadFile(DataPath(rel));
  while (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

// Built once and shared by the tag-law and statistics criteria.
struct Builds {
  TempDir dir;
  std::map<std::string, DatasetManifest> by_strategy;
};

Builds& SharedBuilds() {
  static Builds b;
  if (b.by_strategy.empty()) {
    fixtures::WriteSyntheticParallel(b.dir / "src.txt", b.dir / "tgt.txt", 1000, 2024);
    MockBackend mock({42});
    PipelineConfig config;
    b.by_strategy["M"] = BuildQuakM(b.dir / "tgt.txt", mock, config, b.dir / "m");
    b.by_strategy["P"] =
        BuildQuakP(b.dir / "src.txt", b.dir / "tgt.txt", mock, config, b.dir / "p");
    b.by_strategy["H"] = BuildQuakH(b.dir / "src.txt", b.dir / "tgt.txt", std::nullopt, &mock,
                                    config, b.dir / "h");
  }
  return b;
}

void TableOne() {
  const auto source = Tokenize(Line("table1/src.txt"));
  const auto mt = Tokenize(Line("table1/mt.txt"));
  const auto pe = Tokenize(Line("table1/pe.txt"));
  const auto links = AlignmentSet::FromPharaoh(Line("table1/alignments.txt"));
  const TagSet tags = AnnotateTriple(source, mt, pe, links);
  Require(tags.mt_tags.size() == 31, "expected 31 MT tags");
  Require(FormatTags(tags.mt_tags.tags()) == Line("table1/mt_tags.txt"), "MT tag row differs");
  Require(FormatTags(tags.source_tags) == Line("table1/source_tags.txt"),
          "source tag row differs");
  for (size_t k = 0; k < mt.size(); ++k) {
    const bool bad = tags.mt_tags.token(k) == Tag::kBad;
    const bool expected = k >= 10 && k <= 13;
    Require(bad == expected, "wrong tag on MT token " + std::to_string(k));
  }
  Require(mt[10] == "it" && mt[11] == "is" && mt[12] == "highly" && mt[13] == "likely",
          "fixture tokens moved");
  Require(tags.source_tags[7] == Tag::kBad && tags.source_tags[8] == Tag::kBad,
          "source indices 7 and 8 must be BAD");
  Require(LevenshteinCost(mt, pe) == 4, "edit count must be 4");
}

void TerOracle() {
  std::mt19937_64 rng(20240);
  auto random_seq = [&] {
    std::vector<std::string> w(rng() % 9);
    for (auto& t : w) t = std::string(1, static_cast<char>('a' + rng() % 5));
    return w;
  };
  for (int trial = 0; trial < 12000; ++trial) {
    const auto mt = random_seq();
    const auto pe = random_seq();
    const size_t expected = oracle::EditDistance(mt, pe);
    const auto script = LevenshteinAlign(TokenSequence(mt), TokenSequence(pe));
    Require(script.Cost() == expected, "cost mismatch on trial " + std::to_string(trial));
    Require(LevenshteinCost(TokenSequence(mt), TokenSequence(pe)) == expected,
            "LevenshteinCost mismatch on trial " + std::to_string(trial));
  }
}

size_t Tokens(const std::string& line) { return fixtures::Split(line).size(); }

void TagLaws() {
  size_t identity = 0;
  for (const auto& [name, m] : SharedBuilds().by_strategy) {
    Require(m.records == 1000, name + ": expected 1000 records, got " + std::to_string(m.records));
    for (auto f : kDatasetFiles) {
      Require(CountLines(m.Path(f)) == m.records, name + ": line count of " + std::string(f));
    }
    const auto src = ReadLines(m.Path("src.txt"));
    const auto mt = ReadLines(m.Path("mt.txt"));
    const auto pe = ReadLines(m.Path("pe.txt"));
    const auto mt_tags = ReadLines(m.Path("mt_tags.txt"));
    const auto src_tags = ReadLines(m.Path("source_tags.txt"));
    for (size_t r = 0; r < m.records; ++r) {
      const auto where = name + " record " + std::to_string(r + 1);
      Require(Tokens(mt_tags[r]) == 2 * Tokens(mt[r]) + 1, where + ": 2N+1 law");
      Require(Tokens(src_tags[r]) == Tokens(src[r]), where + ": source tag count");
      if (mt[r] == pe[r]) {
        ++identity;
        Require(mt_tags[r].find("BAD") == std::string::npos &&
                    src_tags[r].find("BAD") == std::string::npos,
                where + ": identity record has BAD tags");
      }
    }
    Require(CheckDatasetLaws(m).ok(), name + ": library law check failed");
  }
  Require(identity > 0, "builds contain no identity records");
}

void StrategyConsistency() {
  TempDir dir;
  fixtures::WriteSyntheticParallel(dir / "src.txt", dir / "tgt.txt", 1000, 77);
  MockBackend mock({42});
  PipelineConfig config;
  const auto p = BuildQuakP(dir / "src.txt", dir / "tgt.txt", mock, config, dir / "p");
  const auto h =
      BuildQuakH(dir / "src.txt", dir / "tgt.txt", std::nullopt, &mock, config, dir / "h");
  const auto m = BuildQuakM(dir / "tgt.txt", mock, config, dir / "m");
  Require(ReadFile(p.Path("src.txt")) == ReadFile(h.Path("src.txt")), "P and H src.txt differ");
  Require(ReadFile(p.Path("pe.txt")) == ReadFile(h.Path("pe.txt")), "P and H pe.txt differ");
  Require(ReadFile(h.Path("mt.txt")) == ReadFile(m.Path("mt.txt")), "H and M mt.txt differ");
}

void AlignerEm() {
  TempDir dir;
  fixtures::WriteSyntheticParallel(dir / "src.txt", dir / "tgt.txt", 1000, 5);
  const FilePairs corpus(dir / "src.txt", dir / "tgt.txt");
  AlignerConfig config;
  config.iterations = 5;
  for (bool optimize : {false, true}) {
    config.optimize_tension = optimize;
    const auto r = TrainAligner(corpus, config);
    Require(r.log_likelihoods.size() == 5, "expected 5 iterations");
    for (size_t k = 1; k < r.log_likelihoods.size(); ++k) {
      Require(r.log_likelihoods[k] >= r.log_likelihoods[k - 1] - 1e-6,
              "log-likelihood decreased at iteration " + std::to_string(k + 1));
    }
    std::map<std::string, double> sums;
    for (const auto& [s, t, p] : r.model.table.Entries()) sums[s] += p;
    for (const auto& [s, sum] : sums) {
      Require(std::fabs(sum - 1.0) <= 1e-9, "row " + s + " sums to " + std::to_string(sum));
    }
  }

  InMemoryPairs single;
  for (int k = 0; k < 100; ++k) single.Add(Tokenize("a"), Tokenize("b"));
  const auto one = TrainAligner(single, {});
  Require(one.model.table.Prob("a", "b") >= 0.99, "t(b|a) below 0.99");
  AlignmentModel fixed;
  fixed.table.Set("a", "b", 0.99);
  Require(ViterbiAlign(fixed, Tokenize("a"), Tokenize("b")) == AlignmentSet{{0, 0}},
          "single candidate Viterbi");

  AlignmentModel null_wins;
  null_wins.table.Set("a", "x", 1.0);
  null_wins.table.Set("<eps>", "z", 1.0);
  const auto links = ViterbiAlign(null_wins, Tokenize("a"), Tokenize("x z"));
  Require(links == AlignmentSet{{0, 0}}, "NULL-aligned target must stay unlinked");

  const auto toy = TrainAligner(
      InMemoryPairs({{Tokenize("a b"), Tokenize("x y")},
                     {Tokenize("a"), Tokenize("x")},
                     {Tokenize("b"), Tokenize("y")}}),
      {});
  Require(ViterbiAlign(toy.model, Tokenize("a b"), Tokenize("x y")) ==
              AlignmentSet({{0, 0}, {1, 1}}),
          "toy corpus Viterbi");
}

void MccCorrectness() {
  TempDir dir;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string pred, gold;
    uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    const size_t records = 1 + rng() % 8;
    for (size_t r = 0; r < records; ++r) {
      const size_t n = 2 * (rng() % 6) + 1;
      for (size_t i = 0; i < n; ++i) {
        const bool pb = rng() % 3 == 0, gb = rng() % 3 == 0;
        tp += pb && gb;
        fp += pb && !gb;
        tn += !pb && !gb;
        fn += !pb && gb;
        pred += (i ? " " : "") + std::string(pb ? "BAD" : "OK");
        gold += (i ? " " : "") + std::string(gb ? "BAD" : "OK");
      }
      pred += "\n";
      gold += "\n";
    }
    WriteFile(dir / "pred", pred);
    WriteFile(dir / "gold", gold);
    const double got = MccOfFiles(dir / "pred", dir / "gold");
    Require(std::fabs(got - oracle::Mcc(tp, fp, tn, fn)) <= 1e-12,
            "pooled MCC mismatch on trial " + std::to_string(trial));
  }
  WriteFile(dir / "g", "OK BAD OK\n");
  WriteFile(dir / "inv", "BAD OK BAD\n");
  WriteFile(dir / "ok", "OK OK OK\n");
  Require(MccOfFiles(dir / "g", dir / "g") == 1.0, "perfect prediction");
  Require(MccOfFiles(dir / "inv", dir / "g") == -1.0, "inverted prediction");
  Require(MccOfFiles(dir / "ok", dir / "ok") == 0.0, "single class");

  WriteFile(dir / "bin_gold", "BAD BAD BAD OK OK OK OK\nBAD BAD BAD OK OK OK OK\n");
  WriteFile(dir / "bin_pred", "BAD BAD OK BAD OK OK OK\nBAD BAD OK BAD OK OK OK\n");
  WriteFile(dir / "bin_ter", "0.050000\n0.450000\n");
  EvaluationInputs in;
  in.predicted_mt_tags = dir / "bin_pred";
  in.gold_mt_tags = dir / "bin_gold";
  in.ter_file = dir / "bin_ter";
  const MccReport report = Evaluate(in);
  size_t filled = 0;
  for (const auto& b : report.per_bin) {
    if (!b.mcc) continue;
    ++filled;
    Require(std::fabs(*b.mcc - 0.4167) <= 1e-4, "bin " + b.range + " MCC " + std::to_string(*b.mcc));
  }
  Require(filled == 2, "expected exactly two populated bins");
}

void Statistics() {
  const auto s = SummarizeTer({0.0, 0.5});
  Require(s.mean == 0.25, "mean of {0, 0.5}");
  Require(s.variance == 0.0625, "variance of {0, 0.5}");
  for (const auto& [name, m] : SharedBuilds().by_strategy) {
    const auto st = ComputeCorpusStats(m);
    Require(st.histogram.Total() == m.records, name + ": histogram total");
    size_t expected_tags = 0;
    for (const auto& line : ReadLines(m.Path("mt.txt"))) expected_tags += 2 * Tokens(line) + 1;
    Require(st.mt_ok + st.mt_bad == expected_tags, name + ": mtOK + mtBAD");
  }
}

void Determinism() {
  TempDir dir;
  fixtures::WriteSyntheticParallel(dir / "src.txt", dir / "tgt.txt", 500, 8);
  for (const char* out : {"a", "b"}) {
    const int code = RunCli({"--log-level", "warn", "build-m", "--mono", dir / "tgt.txt",
                             "--backend", "mock:seed=42", "--out", dir / out});
    Require(code == 0, "build-m exited with " + std::to_string(code));
  }
  const auto a = DatasetManifest::Load(dir / "a");
  const auto b = DatasetManifest::Load(dir / "b");
  Require(a.config_hash == b.config_hash, "config hashes differ");
  for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename().string();
    Require(ReadFile(dir / "a/" + name) == ReadFile(dir / "b/" + name), name + " differs");
  }
  size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "b")) ++files_b;
  size_t files_a = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "a")) ++files_a;
  Require(files_a == files_b, "directories hold different files");
}

}  // namespace

int main() {
  SetLogLevel(LogLevel::kWarn);
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"1 Table 1 golden tags", TableOne},
      {"2 TER oracle equivalence", TerOracle},
      {"3 Tag laws on M/P/H builds", TagLaws},
      {"4 Strategy consistency", StrategyConsistency},
      {"5 Aligner EM", AlignerEm},
      {"6 MCC correctness", MccCorrectness},
      {"7 Statistics", Statistics},
      {"8 Determinism", Determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %-30s %8.2fs%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), secs,
                detail.empty() ? "" : "  ", detail.c_str());
    failures += !ok;
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
