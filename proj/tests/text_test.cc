#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "qeforge/errors.h"
#include "qeforge/text.h"

namespace qeforge {
namespace {

TEST(Normalize, CollapsesAndTrimsWhitespace) {
  EXPECT_EQ(Normalize("  hello   world "), "hello world");
  EXPECT_EQ(Normalize("a\t\tb\r\n"), "a b");
  EXPECT_EQ(Normalize("abc"), "abc");
  EXPECT_EQ(Normalize(""), "");
}

TEST(Normalize, ComposesToNfc) {
  // U+0065 U+0301 against precomposed U+00E9.
  EXPECT_EQ(Normalize("cafe\xCC\x81"), "caf\xC3\xA9");
  // Hangul conjoining jamo compose to a syllable: U+1100 U+1161 -> U+AC00.
  EXPECT_EQ(Normalize("\xE1\x84\x80\xE1\x85\xA1"), "\xEA\xB0\x80");
}

TEST(Normalize, DropsControlCharactersAndBom) {
  EXPECT_EQ(Normalize("\xEF\xBB\xBFhi\x07 there\x01"), "hi there");
}

TEST(Normalize, NonBreakingSpaceIsWhitespace) {
  EXPECT_EQ(Normalize("a\xC2\xA0\xC2\xA0" "b"), "a b");
}

TEST(Normalize, RejectsInvalidUtf8) {
  EXPECT_THROW(Normalize("bad \xFF byte"), LineError);
  EXPECT_THROW(Normalize("\xC3"), LineError);
  EXPECT_FALSE(IsValidUtf8("\xED\xA0\x80"));  // encoded surrogate
  EXPECT_TRUE(IsValidUtf8("\xEC\xA4\x91\xEA\xB5\xAD"));
}

TEST(Tokenize, WhitespaceMode) {
  EXPECT_EQ(Tokenize("chances are high ."), (TokenSequence{"chances", "are", "high", "."}));
  EXPECT_TRUE(Tokenize("").empty());
  EXPECT_EQ(Tokenize("high.").size(), 1u);
}

TEST(Tokenize, PunctSplitMode) {
  EXPECT_EQ(Tokenize("high.", TokenizeMode::kPunctSplit), (TokenSequence{"high", "."}));
  EXPECT_EQ(Tokenize("(\"quoted,\")", TokenizeMode::kPunctSplit),
            (TokenSequence{"(", "\"", "quoted", ",", "\"", ")"}));
  EXPECT_EQ(Tokenize("e.g. 3.5", TokenizeMode::kPunctSplit),
            (TokenSequence{"e.g", ".", "3.5"}));
  EXPECT_EQ(Tokenize("...", TokenizeMode::kPunctSplit), (TokenSequence{".", ".", "."}));
}

TEST(Tokenize, TableOneMtHasFifteenTokens) {
  const auto mt = Tokenize(
      "Given that the Chinese authorities do not deny it , it is highly likely .");
  EXPECT_EQ(mt.size(), 15u);
}

TEST(Tokenize, KoreanEojeolUnitsStayWhole) {
  const auto src = Prepare("중국 당국이 부인하지 않는 것으로 볼 때 가능성이 높다 .",
                           TokenizeMode::kWhitespace);
  EXPECT_EQ(src.size(), 10u);
  EXPECT_EQ(src[7], "가능성이");
}

TEST(TokenSequence, RejectsEmptyOrWhitespaceTokens) {
  EXPECT_THROW(TokenSequence({"a", ""}), InvariantError);
  EXPECT_THROW(TokenSequence({"a b"}), InvariantError);
  EXPECT_THROW(TokenSequence({"a\xC2\xA0" "b"}), InvariantError);
}

TEST(TokenSequence, JoinRoundTripsRandomSequences) {
  std::mt19937 rng(11);
  const std::vector<std::string> alphabet = {"a", "bb", ".", "가", "é", "\"", "x1"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> toks;
    const size_t n = rng() % 9;
    for (size_t i = 0; i < n; ++i) {
      std::string tok;
      const size_t parts = 1 + rng() % 3;
      for (size_t p = 0; p < parts; ++p) tok += alphabet[rng() % alphabet.size()];
      toks.push_back(tok);
    }
    const TokenSequence seq(toks);
    EXPECT_EQ(Tokenize(seq.Join()), seq);
    EXPECT_EQ(Tokenize(Normalize(seq.Join())), seq);
  }
}

TEST(Lowercase, FoldsUnicodeCase) {
  EXPECT_EQ(Lowercase(TokenSequence{"Given", "ÉTÉ", "KO"}),
            (TokenSequence{"given", "été", "ko"}));
}

TEST(TokenizeMode, ParsesNames) {
  EXPECT_EQ(ParseTokenizeMode("whitespace"), TokenizeMode::kWhitespace);
  EXPECT_EQ(ParseTokenizeMode("punct-split"), TokenizeMode::kPunctSplit);
  EXPECT_EQ(TokenizeModeName(TokenizeMode::kPunctSplit), "punct-split");
  EXPECT_THROW(ParseTokenizeMode("moses"), InputError);
}

}  // namespace
}  // namespace qeforge
