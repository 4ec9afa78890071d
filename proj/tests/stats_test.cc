#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "oracles.h"
#include "qeforge/corpus_io.h"
#include "qeforge/errors.h"
#include "qeforge/stats.h"

namespace qeforge {
namespace {

using fixtures::ReadFile;
using fixtures::TempDir;
using fixtures::WriteFile;

TEST(SummarizeTer, TwoValues) {
  const auto s = SummarizeTer({0.0, 0.5});
  EXPECT_DOUBLE_EQ(s.mean, 0.25);
  EXPECT_DOUBLE_EQ(s.median, 0.0);
  EXPECT_DOUBLE_EQ(s.variance, 0.0625);
  EXPECT_DOUBLE_EQ(s.std_dev, 0.25);
}

TEST(SummarizeTer, OddCountMedianIsTheMiddle) {
  EXPECT_DOUBLE_EQ(SummarizeTer({0.9, 0.1, 0.4}).median, 0.4);
  EXPECT_DOUBLE_EQ(SummarizeTer({0.9, 0.1, 0.4, 0.2}).median, 0.2);
}

TEST(SummarizeTer, ConstantInputHasNoSpread) {
  const auto s = SummarizeTer(std::vector<double>(1000, 0.1));
  EXPECT_NEAR(s.mean, 0.1, 1e-15);
  EXPECT_NEAR(s.variance, 0.0, 1e-15);
  EXPECT_THROW(SummarizeTer({}), InputError);
}

TEST(SummarizeTer, MatchesTwoPassOracleAndIgnoresOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ter(0.0, 1.6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng() % 300);
    for (auto& x : v) x = ter(rng);
    const auto [mean, var] = oracle::MeanVariance(v);
    const auto s = SummarizeTer(v);
    EXPECT_NEAR(s.mean, mean, 1e-12);
    EXPECT_NEAR(s.variance, var, 1e-12);
    std::shuffle(v.begin(), v.end(), rng);
    const auto t = SummarizeTer(v);
    EXPECT_DOUBLE_EQ(t.median, s.median);
    EXPECT_NEAR(t.mean, s.mean, 1e-15);
    EXPECT_NEAR(t.variance, s.variance, 1e-15);
  }
}

TEST(TerHistogram, BinsAndOverflow) {
  const std::vector<double> v = {0.05, 0.15, 0.15};
  const auto h = HistogramOf(v);
  EXPECT_EQ(h.counts[0], 1u);
  EXPECT_EQ(h.counts[1], 2u);
  for (size_t k = 2; k <= TerHistogram::kOverflow; ++k) EXPECT_EQ(h.counts[k], 0u);
  EXPECT_EQ(TerHistogram::BinOf(1.3), TerHistogram::kOverflow);
  EXPECT_EQ(TerHistogram::BinOf(1.0), TerHistogram::kOverflow);
  EXPECT_EQ(TerHistogram::BinOf(0.0), 0u);
  EXPECT_EQ(TerHistogram::BinOf(0.999999), 9u);
  EXPECT_EQ(TerHistogram::RangeLabel(3), "0.3-0.4");
  EXPECT_EQ(TerHistogram::RangeLabel(TerHistogram::kOverflow), "1.0+");
}

TEST(TerHistogram, GridLandsOnePerBin) {
  std::vector<double> grid;
  for (int k = 0; k < 10; ++k) grid.push_back(k / 10.0);
  const auto h = HistogramOf(grid);
  for (size_t k = 0; k < TerHistogram::kBins; ++k) EXPECT_EQ(h.counts[k], 1u) << k;
  EXPECT_EQ(h.counts[TerHistogram::kOverflow], 0u);
  EXPECT_EQ(h.Total(), 10u);
}

TEST(ReadTerFile, RejectsGarbage) {
  TempDir dir;
  WriteFile(dir / "ter.txt", "0.5\nabc\n");
  EXPECT_THROW(ReadTerFile(dir / "ter.txt"), InputError);
  WriteFile(dir / "ter.txt", "0.700000\n");
  EXPECT_EQ(TerHistogram::BinOf(ReadTerFile(dir / "ter.txt")[0]), 7u);
}

class CorpusStatsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    fixtures::WriteSyntheticParallel(dir_ / "src.txt", dir_ / "tgt.txt", 150, 4);
    MockBackend mock({42});
    manifest_ = BuildQuakP(dir_ / "src.txt", dir_ / "tgt.txt", mock, {}, dir_ / "ds");
  }
  TempDir dir_;
  DatasetManifest manifest_;
};

TEST_F(CorpusStatsTest, CountsAgreeWithTheFiles) {
  const auto st = ComputeCorpusStats(manifest_);
  EXPECT_EQ(st.sentence_counts.source, 150u);
  EXPECT_EQ(st.sentence_counts.mt, 150u);
  EXPECT_EQ(st.sentence_counts.pe, 150u);
  size_t src_tokens = 0, mt_tokens = 0, pe_tokens = 0;
  for (const auto& l : ReadLines(manifest_.Path("src.txt"))) src_tokens += fixtures::Split(l).size();
  for (const auto& l : ReadLines(manifest_.Path("mt.txt"))) mt_tokens += fixtures::Split(l).size();
  for (const auto& l : ReadLines(manifest_.Path("pe.txt"))) pe_tokens += fixtures::Split(l).size();
  EXPECT_EQ(st.token_counts.source, src_tokens);
  EXPECT_EQ(st.token_counts.mt, mt_tokens);
  EXPECT_EQ(st.token_counts.pe, pe_tokens);
  EXPECT_DOUBLE_EQ(st.avg_tokens_mt, mt_tokens / 150.0);
  EXPECT_EQ(st.mt_ok + st.mt_bad, 2 * mt_tokens + 150);
  EXPECT_EQ(st.source_ok + st.source_bad, src_tokens);
  const auto [mean, var] = oracle::MeanVariance(ReadTerFile(manifest_.Path("ter.txt")));
  EXPECT_NEAR(st.ter.mean, mean, 1e-12);
  EXPECT_NEAR(st.ter.variance, var, 1e-12);
  EXPECT_EQ(st.histogram.Total(), 150u);
  EXPECT_EQ(st.ter_mode, "no-shifts");
}

TEST_F(CorpusStatsTest, ReportIsStableAndComplete) {
  const auto st = ComputeCorpusStats(manifest_);
  WriteStatsReport(st, dir_ / "r1");
  WriteStatsReport(ComputeCorpusStats(manifest_), dir_ / "r2");
  EXPECT_EQ(ReadFile(dir_ / "r1/stats.json"), ReadFile(dir_ / "r2/stats.json"));
  EXPECT_EQ(ReadFile(dir_ / "r1/stats.txt"), ReadFile(dir_ / "r2/stats.txt"));
  const auto j = StatsToJson(st);
  for (const char* key : {"sentenceCounts", "tokenCounts", "avgTokensPerSentence", "terMean",
                          "terMedian", "terStd", "terVariance", "tagCounts", "terHistogram"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["terHistogram"].size(), TerHistogram::kBins + 1);
  const std::string text = StatsToText(st);
  EXPECT_NE(text.find("Mean TER"), std::string::npos);
  EXPECT_NE(text.find("population"), std::string::npos);
}

TEST(CorpusStats, IdenticalPairsGiveZeroTer) {
  TempDir dir;
  WriteFile(dir / "src.txt", "a b\nc\n");
  WriteFile(dir / "tgt.txt", "x y\nz\n");
  MockBackend clean({0, 0.0, 0.0, 0.0});
  const auto m = BuildQuakM(dir / "tgt.txt", clean, {}, dir / "ds");
  const auto st = ComputeCorpusStats(m);
  EXPECT_EQ(st.ter.mean, 0.0);
  EXPECT_EQ(st.ter.median, 0.0);
  EXPECT_EQ(st.ter.std_dev, 0.0);
  EXPECT_EQ(st.mt_bad, 0u);
  EXPECT_EQ(st.source_bad, 0u);
  EXPECT_EQ(st.histogram.counts[0], 2u);
}

}  // namespace
}  // namespace qeforge
