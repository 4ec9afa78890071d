#include "qeforge/aligner.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>

#include "qeforge/errors.h"

namespace qeforge {
namespace {

constexpr size_t kChunkSize = 512;
constexpr int kNullId = 0;
constexpr std::string_view kModelMagic = "qeforge-align-model";
constexpr int kModelVersion = 1;

class Vocab {
 public:
  int Id(const std::string& w) {
    auto [it, inserted] = ids_.try_emplace(w, static_cast<int>(words_.size()));
    if (inserted) words_.push_back(w);
    return it->second;
  }
  const std::string& Word(int id) const { return words_[id]; }
  size_t size() const { return words_.size(); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
};

struct EncodedPair {
  std::vector<int> source;
  std::vector<int> target;
};

using IdRow = std::unordered_map<int, double>;

uint64_t PairKey(int s, int t) {
  return (static_cast<uint64_t>(s) << 32) | static_cast<uint32_t>(t);
}

uint64_t ShapeKey(size_t m, size_t n, size_t j) {
  return (static_cast<uint64_t>(m) << 42) | (static_cast<uint64_t>(n) << 21) | j;
}

double Distance(size_t j1, size_t m, size_t i1, size_t n) {
  return std::fabs(static_cast<double>(j1) / static_cast<double>(m) -
                   static_cast<double>(i1) / static_cast<double>(n));
}

// Alignment prior over source positions 1..n for target position j1 (1-based)
// of m. Returns the NULL prior; fills `prior` for the real positions.
double AlignmentPrior(const AlignerConfig& cfg, size_t j1, size_t m, size_t n,
                      std::vector<double>& prior) {
  prior.assign(n, 0.0);
  if (!cfg.favor_diagonal) {
    const double u = 1.0 / static_cast<double>(n + 1);
    std::fill(prior.begin(), prior.end(), u);
    return u;
  }
  double z = 0.0;
  for (size_t i = 0; i < n; ++i) {
    prior[i] = std::exp(-cfg.diagonal_tension * Distance(j1, m, i + 1, n));
    z += prior[i];
  }
  for (double& p : prior) p *= (1.0 - cfg.null_prob) / z;
  return cfg.null_prob;
}

struct ChunkStats {
  std::unordered_map<uint64_t, double> counts;
  std::unordered_map<uint64_t, double> shape_mass;
  double empirical_distance = 0.0;
  double log_likelihood = 0.0;
};

struct EmState {
  const AlignerConfig* config = nullptr;
  const std::vector<IdRow>* rows = nullptr;
  double uniform = 0.0;  // > 0 only in the first iteration

  double T(int s, int t) const {
    if (uniform > 0.0) return uniform;
    const IdRow& row = (*rows)[s];
    auto it = row.find(t);
    return it == row.end() ? TranslationTable::kFloor : it->second;
  }
};

ChunkStats EStep(const EmState& st, const std::vector<EncodedPair>& chunk) {
  ChunkStats out;
  std::vector<double> prior;
  std::vector<double> post;
  const bool track_shape = st.config->optimize_tension && st.config->favor_diagonal;
  for (const EncodedPair& p : chunk) {
    const size_t n = p.source.size();
    const size_t m = p.target.size();
    for (size_t j = 0; j < m; ++j) {
      const int f = p.target[j];
      const double null_prior = AlignmentPrior(*st.config, j + 1, m, n, prior);
      post.resize(n);
      const double null_score = null_prior * st.T(kNullId, f);
      double sum = null_score;
      for (size_t i = 0; i < n; ++i) {
        post[i] = prior[i] * st.T(p.source[i], f);
        sum += post[i];
      }
      out.log_likelihood += std::log(sum);
      out.counts[PairKey(kNullId, f)] += null_score / sum;
      double mass = 0.0;
      for (size_t i = 0; i < n; ++i) {
        const double q = post[i] / sum;
        out.counts[PairKey(p.source[i], f)] += q;
        if (track_shape) {
          mass += q;
          out.empirical_distance += q * Distance(j + 1, m, i + 1, n);
        }
      }
      if (track_shape) out.shape_mass[ShapeKey(m, n, j + 1)] += mass;
    }
  }
  return out;
}

// Expected |j/m - i/n| under the normalized diagonal prior.
double ExpectedDistance(double tension, size_t m, size_t n, size_t j1) {
  double z = 0.0, e = 0.0;
  for (size_t i = 1; i <= n; ++i) {
    const double d = Distance(j1, m, i, n);
    const double w = std::exp(-tension * d);
    z += w;
    e += w * d;
  }
  return e / z;
}

// Maximizes sum(post * (-tension * d)) - sum(mass * log Z(tension)); the
// objective is concave so the root of its derivative is found by bisection.
double OptimizeTension(const std::unordered_map<uint64_t, double>& shape_mass,
                       double empirical, double current) {
  std::vector<std::pair<uint64_t, double>> shapes(shape_mass.begin(),
                                                  shape_mass.end());
  std::sort(shapes.begin(), shapes.end());
  auto gradient = [&](double tension) {
    double g = -empirical;
    for (const auto& [key, mass] : shapes) {
      const size_t m = key >> 42;
      const size_t n = (key >> 21) & ((1u << 21) - 1);
      const size_t j1 = key & ((1u << 21) - 1);
      g += mass * ExpectedDistance(tension, m, n, j1);
    }
    return g;
  };
  double lo = 1e-3, hi = 100.0;
  if (gradient(lo) <= 0.0) return lo;
  if (gradient(hi) >= 0.0) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gradient(mid) > 0.0 ? lo : hi) = mid;
  }
  const double found = 0.5 * (lo + hi);
  return std::isfinite(found) ? found : current;
}

}  // namespace

void AlignerConfig::Validate() const {
  if (iterations < 1) throw InputError("aligner iterations must be >= 1");
  if (!(diagonal_tension > 0.0)) throw InputError("diagonal tension must be > 0");
  if (!(null_prob > 0.0 && null_prob < 1.0)) {
    throw InputError("null probability must be in (0, 1)");
  }
}

// --- AlignmentSet -----------------------------------------------------------

AlignmentSet AlignmentSet::Transposed() const {
  AlignmentSet out;
  for (const auto& [a, b] : links_) out.Add(b, a);
  return out;
}

void AlignmentSet::CheckBounds(size_t source_len, size_t mt_len) const {
  for (const auto& [s, t] : links_) {
    if (s >= source_len || t >= mt_len) {
      throw InvariantError("alignment link " + std::to_string(s) + "-" +
                           std::to_string(t) + " out of range for lengths " +
                           std::to_string(source_len) + "/" +
                           std::to_string(mt_len));
    }
  }
}

std::string AlignmentSet::ToPharaoh() const {
  std::string out;
  for (const auto& [s, t] : links_) {
    if (!out.empty()) out += ' ';
    out += std::to_string(s);
    out += '-';
    out += std::to_string(t);
  }
  return out;
}

AlignmentSet AlignmentSet::FromPharaoh(std::string_view line) {
  AlignmentSet out;
  std::istringstream in{std::string(line)};
  std::string item;
  while (in >> item) {
    const auto dash = item.find('-');
    size_t s = 0, t = 0;
    size_t used_s = 0, used_t = 0;
    try {
      if (dash == std::string::npos) throw std::invalid_argument("no dash");
      const std::string a = item.substr(0, dash);
      const std::string b = item.substr(dash + 1);
      if (a.empty() || b.empty() || a[0] == '-' || b[0] == '-' ||
          a[0] == '+' || b[0] == '+') {
        throw std::invalid_argument("sign");
      }
      s = std::stoul(a, &used_s);
      t = std::stoul(b, &used_t);
      if (used_s != a.size() || used_t != b.size()) {
        throw std::invalid_argument("trailing");
      }
    } catch (const std::logic_error&) {
      throw InputError("malformed alignment link '" + item + "'");
    }
    out.Add(s, t);
  }
  return out;
}

// --- TranslationTable ---------------------------------------------------------

double TranslationTable::Prob(std::string_view source,
                              std::string_view target) const {
  auto row = rows_.find(std::string(source));
  if (row == rows_.end()) return kFloor;
  auto it = row->second.find(std::string(target));
  return it == row->second.end() ? kFloor : it->second;
}

void TranslationTable::Set(std::string_view source, std::string_view target,
                           double prob) {
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw InvariantError("translation probability outside [0, 1]");
  }
  rows_[std::string(source)][std::string(target)] = prob;
}

double TranslationTable::MaxRowDeviation() const {
  double worst = 0.0;
  for (const auto& [s, row] : rows_) {
    double sum = 0.0;
    for (const auto& [t, p] : row) sum += p;
    if (sum > 0.0) worst = std::max(worst, std::fabs(sum - 1.0));
  }
  return worst;
}

size_t TranslationTable::EntryCount() const {
  size_t n = 0;
  for (const auto& [s, row] : rows_) n += row.size();
  return n;
}

std::vector<std::tuple<std::string, std::string, double>>
TranslationTable::Entries() const {
  std::vector<std::tuple<std::string, std::string, double>> out;
  out.reserve(EntryCount());
  for (const auto& [s, row] : rows_) {
    for (const auto& [t, p] : row) out.emplace_back(s, t, p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- Model I/O ------------------------------------------------------------------

void AlignmentModel::Save(std::ostream& out) const {
  char buf[64];
  out << "# " << kModelMagic << ' ' << kModelVersion << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", config.diagonal_tension);
  out << "tension " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", config.null_prob);
  out << "null_prob " << buf << '\n';
  out << "favor_diagonal " << (config.favor_diagonal ? 1 : 0) << '\n';
  out << "entries " << table.EntryCount() << '\n';
  for (const auto& [s, t, p] : table.Entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", p);
    out << s << ' ' << t << ' ' << buf << '\n';
  }
}

AlignmentModel AlignmentModel::Load(std::istream& in) {
  AlignmentModel model;
  std::string hash, magic;
  int version = 0;
  if (!(in >> hash >> magic >> version) || hash != "#" || magic != kModelMagic) {
    throw InputError("not an alignment model file");
  }
  if (version != kModelVersion) {
    throw InputError("unsupported alignment model version " +
                     std::to_string(version));
  }
  std::string key;
  int favor = 1;
  size_t entries = 0;
  if (!(in >> key >> model.config.diagonal_tension) || key != "tension" ||
      !(in >> key >> model.config.null_prob) || key != "null_prob" ||
      !(in >> key >> favor) || key != "favor_diagonal" ||
      !(in >> key >> entries) || key != "entries") {
    throw InputError("malformed alignment model header");
  }
  model.config.favor_diagonal = favor != 0;
  std::string s, t, p;
  for (size_t k = 0; k < entries; ++k) {
    if (!(in >> s >> t >> p)) throw InputError("truncated alignment model");
    model.table.Set(s, t, std::strtod(p.c_str(), nullptr));
  }
  return model;
}

void AlignmentModel::SaveFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  Save(out);
}

AlignmentModel AlignmentModel::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  return Load(in);
}

// --- Corpora ----------------------------------------------------------------------

void InMemoryPairs::ForEach(const Visitor& visit) const {
  for (const auto& [s, t] : pairs_) visit(s, t);
}

void SwappedPairs::ForEach(const Visitor& visit) const {
  inner_.ForEach([&](const TokenSequence& s, const TokenSequence& t) {
    visit(t, s);
  });
}

// --- Training -----------------------------------------------------------------------

TrainResult TrainAligner(const PairCorpus& corpus, const AlignerConfig& config) {
  config.Validate();
  TrainResult result;
  result.model.config = config;

  Vocab src_vocab, tgt_vocab;
  src_vocab.Id(std::string(TranslationTable::kNullToken));
  corpus.ForEach([&](const TokenSequence& s, const TokenSequence& t) {
    if (s.empty() || t.empty()) {
      ++result.skipped_pairs;
      return;
    }
    ++result.used_pairs;
    for (const auto& w : s) src_vocab.Id(w);
    for (const auto& w : t) tgt_vocab.Id(w);
  });
  if (result.used_pairs == 0) {
    throw InputError("aligner training corpus has no non-empty pairs");
  }

  AlignerConfig cfg = config;
  std::vector<IdRow> rows(src_vocab.size());
  const size_t jobs = std::max<size_t>(1, config.jobs);

  for (int iter = 0; iter < config.iterations; ++iter) {
    EmState state;
    state.config = &cfg;
    state.rows = &rows;
    state.uniform = iter == 0 ? 1.0 / static_cast<double>(tgt_vocab.size()) : 0.0;

    std::unordered_map<uint64_t, double> counts;
    std::unordered_map<uint64_t, double> shape_mass;
    double empirical = 0.0;
    double ll = 0.0;

    std::vector<std::vector<EncodedPair>> pending(1);
    auto drain = [&]() {
      std::vector<std::future<ChunkStats>> futures;
      for (const auto& chunk : pending) {
        if (chunk.empty()) continue;
        if (jobs == 1) {
          std::promise<ChunkStats> done;
          done.set_value(EStep(state, chunk));
          futures.push_back(done.get_future());
        } else {
          futures.push_back(std::async(std::launch::async, EStep,
                                       std::cref(state), std::cref(chunk)));
        }
      }
      for (auto& f : futures) {
        ChunkStats cs = f.get();
        ll += cs.log_likelihood;
        empirical += cs.empirical_distance;
        for (const auto& [k, v] : cs.counts) counts[k] += v;
        for (const auto& [k, v] : cs.shape_mass) shape_mass[k] += v;
      }
      pending.assign(1, {});
    };

    corpus.ForEach([&](const TokenSequence& s, const TokenSequence& t) {
      if (s.empty() || t.empty()) return;
      EncodedPair p;
      p.source.reserve(s.size());
      p.target.reserve(t.size());
      for (const auto& w : s) p.source.push_back(src_vocab.Id(w));
      for (const auto& w : t) p.target.push_back(tgt_vocab.Id(w));
      if (pending.back().size() == kChunkSize) {
        if (pending.size() == jobs) drain();
        else pending.emplace_back();
      }
      pending.back().push_back(std::move(p));
    });
    drain();

    // M-step.
    std::vector<double> totals(src_vocab.size(), 0.0);
    std::vector<std::pair<uint64_t, double>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [k, v] : sorted) totals[k >> 32] += v;
    for (auto& row : rows) row.clear();
    for (const auto& [k, v] : sorted) {
      const int s = static_cast<int>(k >> 32);
      const int t = static_cast<int>(k & 0xffffffffu);
      if (totals[s] > 0.0) rows[s][t] = v / totals[s];
    }

    if (cfg.optimize_tension && cfg.favor_diagonal) {
      cfg.diagonal_tension =
          OptimizeTension(shape_mass, empirical, cfg.diagonal_tension);
    }
    result.log_likelihoods.push_back(ll);
    result.tensions.push_back(cfg.diagonal_tension);
  }

  result.model.config = cfg;
  for (size_t s = 0; s < rows.size(); ++s) {
    for (const auto& [t, p] : rows[s]) {
      result.model.table.Set(src_vocab.Word(static_cast<int>(s)),
                             tgt_vocab.Word(t), p);
    }
  }
  return result;
}

AlignmentSet ViterbiAlign(const AlignmentModel& model,
                          const TokenSequence& source,
                          const TokenSequence& target) {
  AlignmentSet out;
  const size_t n = source.size();
  const size_t m = target.size();
  if (n == 0 || m == 0) return out;
  std::vector<double> prior;
  for (size_t j = 0; j < m; ++j) {
    const double null_prior = AlignmentPrior(model.config, j + 1, m, n, prior);
    double best = -1.0;
    size_t best_i = 0;
    for (size_t i = 0; i < n; ++i) {
      const double score = prior[i] * model.table.Prob(source[i], target[j]);
      if (score > best) {
        best = score;
        best_i = i;
      }
    }
    const double null_score =
        null_prior * model.table.Prob(TranslationTable::kNullToken, target[j]);
    if (best >= null_score) out.Add(best_i, j);
  }
  return out;
}

// --- Symmetrization ----------------------------------------------------------------

SymmetrizeHeuristic ParseHeuristic(std::string_view name) {
  if (name == "intersection") return SymmetrizeHeuristic::kIntersection;
  if (name == "union") return SymmetrizeHeuristic::kUnion;
  if (name == "grow-diag-final-and") return SymmetrizeHeuristic::kGrowDiagFinalAnd;
  throw InputError("unknown symmetrization heuristic: " + std::string(name));
}

std::string_view HeuristicName(SymmetrizeHeuristic h) {
  switch (h) {
    case SymmetrizeHeuristic::kIntersection: return "intersection";
    case SymmetrizeHeuristic::kUnion: return "union";
    case SymmetrizeHeuristic::kGrowDiagFinalAnd: return "grow-diag-final-and";
  }
  return "?";
}

AlignmentSet Symmetrize(const AlignmentSet& forward, const AlignmentSet& reverse,
                        SymmetrizeHeuristic heuristic, size_t source_len,
                        size_t mt_len) {
  forward.CheckBounds(source_len, mt_len);
  reverse.CheckBounds(source_len, mt_len);

  AlignmentSet inter, uni;
  for (const auto& [s, t] : forward) {
    uni.Add(s, t);
    if (reverse.Contains(s, t)) inter.Add(s, t);
  }
  for (const auto& [s, t] : reverse) uni.Add(s, t);
  if (heuristic == SymmetrizeHeuristic::kIntersection) return inter;
  if (heuristic == SymmetrizeHeuristic::kUnion) return uni;

  AlignmentSet result = inter;
  std::vector<char> src_aligned(source_len, 0), mt_aligned(mt_len, 0);
  for (const auto& [s, t] : result) {
    src_aligned[s] = 1;
    mt_aligned[t] = 1;
  }
  auto add = [&](size_t s, size_t t) {
    result.Add(s, t);
    src_aligned[s] = 1;
    mt_aligned[t] = 1;
  };

  static constexpr int kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0},  {0, 1},
                                           {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool grew = true;
  while (grew) {
    grew = false;
    for (size_t s = 0; s < source_len; ++s) {
      for (size_t t = 0; t < mt_len; ++t) {
        if (!result.Contains(s, t)) continue;
        for (const auto& d : kNeighbors) {
          const long ns = static_cast<long>(s) + d[0];
          const long nt = static_cast<long>(t) + d[1];
          if (ns < 0 || nt < 0 || ns >= static_cast<long>(source_len) ||
              nt >= static_cast<long>(mt_len)) {
            continue;
          }
          if ((!src_aligned[ns] || !mt_aligned[nt]) && uni.Contains(ns, nt) &&
              !result.Contains(ns, nt)) {
            add(ns, nt);
            grew = true;
          }
        }
      }
    }
  }
  for (const AlignmentSet* directional : {&forward, &reverse}) {
    for (const auto& [s, t] : *directional) {
      if (!src_aligned[s] && !mt_aligned[t]) add(s, t);
    }
  }
  return result;
}

BidirectionalModel TrainBidirectional(const PairCorpus& corpus,
                                      const AlignerConfig& config) {
  BidirectionalModel out;
  out.forward = TrainAligner(corpus, config).model;
  SwappedPairs swapped(corpus);
  out.reverse = TrainAligner(swapped, config).model;
  return out;
}

AlignmentSet AlignPair(const BidirectionalModel& model,
                       SymmetrizeHeuristic heuristic,
                       const TokenSequence& source, const TokenSequence& mt) {
  const AlignmentSet fwd = ViterbiAlign(model.forward, source, mt);
  const AlignmentSet rev = ViterbiAlign(model.reverse, mt, source).Transposed();
  return Symmetrize(fwd, rev, heuristic, source.size(), mt.size());
}

}  // namespace qeforge
