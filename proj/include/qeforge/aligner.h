#ifndef QEFORGE_ALIGNER_H_
#define QEFORGE_ALIGNER_H_

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qeforge/text.h"

namespace qeforge {

// Fast-align style reparameterized IBM Model 2. The alignment prior for
// target position j (1-based, of m) and source position i (1-based, of n) is
//   p0                                      for NULL
//   (1 - p0) * exp(-tension * |j/m - i/n|) / Z   otherwise
// or uniform over the n + 1 candidates when favor_diagonal is off.
struct AlignerConfig {
  int iterations = 5;
  double diagonal_tension = 4.0;
  double null_prob = 0.08;
  bool favor_diagonal = true;
  // Re-estimates the tension after every M-step by maximizing the expected
  // complete-data log-likelihood (keeps EM monotone).
  bool optimize_tension = false;
  size_t jobs = 1;

  // Throws InputError when a field is out of range.
  void Validate() const;
};

// (source index, MT index), 0-based.
using Link = std::pair<size_t, size_t>;

class AlignmentSet {
 public:
  AlignmentSet() = default;
  AlignmentSet(std::initializer_list<Link> links) : links_(links) {}

  void Add(size_t source, size_t mt) { links_.emplace(source, mt); }
  bool Contains(size_t source, size_t mt) const {
    return links_.count({source, mt}) > 0;
  }
  size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }
  auto begin() const { return links_.begin(); }
  auto end() const { return links_.end(); }

  AlignmentSet Transposed() const;
  // Throws InvariantError if a link falls outside the given lengths.
  void CheckBounds(size_t source_len, size_t mt_len) const;

  // Pharaoh notation: "0-3 1-4 ...", sorted by source then MT index.
  std::string ToPharaoh() const;
  static AlignmentSet FromPharaoh(std::string_view line);

  friend bool operator==(const AlignmentSet&, const AlignmentSet&) = default;

 private:
  std::set<Link> links_;
};

// Sparse t(target | source) with a distinguished NULL source word.
class TranslationTable {
 public:
  static constexpr std::string_view kNullToken = "<eps>";
  static constexpr double kFloor = 1e-9;

  // Unseen pairs get kFloor.
  double Prob(std::string_view source, std::string_view target) const;
  void Set(std::string_view source, std::string_view target, double prob);

  // Largest |sum_t p(t|s) - 1| over rows with any mass.
  double MaxRowDeviation() const;
  size_t EntryCount() const;

  // Sorted (source, target, prob) triples; stable across runs.
  std::vector<std::tuple<std::string, std::string, double>> Entries() const;

  using Row = std::unordered_map<std::string, double>;
  const std::unordered_map<std::string, Row>& rows() const { return rows_; }

 private:
  std::unordered_map<std::string, Row> rows_;
};

struct AlignmentModel {
  TranslationTable table;
  AlignerConfig config;  // diagonal_tension holds the learned value

  void Save(std::ostream& out) const;
  static AlignmentModel Load(std::istream& in);
  void SaveFile(const std::string& path) const;
  static AlignmentModel LoadFile(const std::string& path);
};

// A corpus of (source, target) pairs that can be streamed several times.
class PairCorpus {
 public:
  using Visitor =
      std::function<void(const TokenSequence&, const TokenSequence&)>;
  virtual ~PairCorpus() = default;
  virtual void ForEach(const Visitor& visit) const = 0;
};

class InMemoryPairs : public PairCorpus {
 public:
  InMemoryPairs() = default;
  explicit InMemoryPairs(std::vector<std::pair<TokenSequence, TokenSequence>> pairs)
      : pairs_(std::move(pairs)) {}
  void Add(TokenSequence source, TokenSequence target) {
    pairs_.emplace_back(std::move(source), std::move(target));
  }
  void ForEach(const Visitor& visit) const override;
  size_t size() const { return pairs_.size(); }

 private:
  std::vector<std::pair<TokenSequence, TokenSequence>> pairs_;
};

// Reverses the roles of source and target.
class SwappedPairs : public PairCorpus {
 public:
  explicit SwappedPairs(const PairCorpus& inner) : inner_(inner) {}
  void ForEach(const Visitor& visit) const override;

 private:
  const PairCorpus& inner_;
};

struct TrainResult {
  AlignmentModel model;
  // Corpus log-likelihood measured in the E-step of each iteration.
  std::vector<double> log_likelihoods;
  std::vector<double> tensions;
  size_t used_pairs = 0;
  size_t skipped_pairs = 0;
};

// EM training. Pairs with an empty side are skipped; throws InputError if no
// usable pair remains. Expected counts are reduced in fixed chunk order, so
// results do not depend on config.jobs.
TrainResult TrainAligner(const PairCorpus& corpus, const AlignerConfig& config);

// Per target token: argmax over source positions and NULL of prior * t.
// Ties go to the smaller source index; NULL needs a strictly larger score.
AlignmentSet ViterbiAlign(const AlignmentModel& model,
                          const TokenSequence& source,
                          const TokenSequence& target);

enum class SymmetrizeHeuristic { kIntersection, kUnion, kGrowDiagFinalAnd };

SymmetrizeHeuristic ParseHeuristic(std::string_view name);
std::string_view HeuristicName(SymmetrizeHeuristic h);

// Both sets are in (source, MT) orientation; transpose reverse-model output
// before calling. Throws InvariantError for out-of-range links.
AlignmentSet Symmetrize(const AlignmentSet& forward,
                        const AlignmentSet& reverse,
                        SymmetrizeHeuristic heuristic, size_t source_len,
                        size_t mt_len);

// Forward + reverse models used together for symmetrized alignment.
struct BidirectionalModel {
  AlignmentModel forward;
  AlignmentModel reverse;
};

BidirectionalModel TrainBidirectional(const PairCorpus& corpus,
                                      const AlignerConfig& config);

AlignmentSet AlignPair(const BidirectionalModel& model,
                       SymmetrizeHeuristic heuristic,
                       const TokenSequence& source, const TokenSequence& mt);

}  // namespace qeforge

#endif  // QEFORGE_ALIGNER_H_
