#include "qeforge/pipeline.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <thread>

#include "qeforge/corpus_io.h"
#include "qeforge/errors.h"
#include "qeforge/hash.h"
#include "qeforge/log.h"
#include "qeforge/tags.h"
#include "qeforge/ter.h"

namespace qeforge {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kCheckpointDir = ".checkpoint";

// Reasons a corpus line does not become a record.
constexpr const char* kDropInvalidInput = "invalid_input";
constexpr const char* kDropEmptyPe = "empty_pe";
constexpr const char* kDropTranslationFailed = "translation_failed";
constexpr const char* kDropInvalidTranslation = "invalid_translation";

std::map<std::string, size_t> EmptyDrops() {
  return {{kDropInvalidInput, 0},
          {kDropEmptyPe, 0},
          {kDropTranslationFailed, 0},
          {kDropInvalidTranslation, 0}};
}

void ParallelFor(size_t n, size_t jobs, const std::function<void(size_t)>& fn) {
  jobs = std::clamp<size_t>(jobs, 1, std::max<size_t>(1, n));
  if (jobs == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (size_t i = w; i < n; i += jobs) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string FormatTer(double ter) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", ter);
  return buf;
}

std::optional<TokenSequence> TryPrepare(const std::string& raw, TokenizeMode mode) {
  try {
    return Prepare(raw, mode);
  } catch (const LineError&) {
    return std::nullopt;
  }
}

struct Record {
  size_t line_no = 0;
  TokenSequence source;
  TokenSequence mt;
  TokenSequence pe;
  std::optional<TokenSequence> pseudo_source;
};

struct Annotated {
  std::string ter;
  std::string mt_tags;
};

Annotated AnnotateRecord(const Record& r, const PipelineConfig& config) {
  const TokenSequence mt = config.lowercase ? Lowercase(r.mt) : r.mt;
  const TokenSequence pe = config.lowercase ? Lowercase(r.pe) : r.pe;
  const TerResult ter = TerScore(mt, pe, config.ter_shifts);
  // Tags always come from the monotone script.
  const EditScript& script =
      config.ter_shifts ? LevenshteinAlign(mt, pe) : ter.script;
  return {FormatTer(ter.ter), FormatTags(AnnotateMtTags(script).tags())};
}

// Writes the text columns plus TER and MT tags; source tags and alignments
// are added once the aligner is trained.
class RecordSink {
 public:
  RecordSink(const std::string& dir, bool pseudo_source)
      : src_(dir + "/src.txt"),
        mt_(dir + "/mt.txt"),
        pe_(dir + "/pe.txt"),
        ter_(dir + "/ter.txt"),
        mt_tags_(dir + "/mt_tags.txt") {
    if (pseudo_source) pseudo_.emplace(dir + "/" + std::string(kPseudoSourceFile));
  }

  void WriteBatch(const std::vector<Record>& batch, const PipelineConfig& config) {
    std::vector<Annotated> out(batch.size());
    ParallelFor(batch.size(), config.jobs,
                [&](size_t i) { out[i] = AnnotateRecord(batch[i], config); });
    for (size_t i = 0; i < batch.size(); ++i) {
      src_.Write(batch[i].source.Join());
      mt_.Write(batch[i].mt.Join());
      pe_.Write(batch[i].pe.Join());
      ter_.Write(out[i].ter);
      mt_tags_.Write(out[i].mt_tags);
      if (pseudo_) pseudo_->Write(batch[i].pseudo_source->Join());
    }
    records_ += batch.size();
  }

  void Close() {
    for (LineWriter* w : {&src_, &mt_, &pe_, &ter_, &mt_tags_}) w->Close();
    if (pseudo_) pseudo_->Close();
  }
  size_t records() const { return records_; }

 private:
  LineWriter src_, mt_, pe_, ter_, mt_tags_;
  std::optional<LineWriter> pseudo_;
  size_t records_ = 0;
};

size_t CountUsablePairs(const PairCorpus& corpus) {
  size_t n = 0;
  corpus.ForEach([&](const TokenSequence& s, const TokenSequence& t) {
    if (!s.empty() && !t.empty()) ++n;
  });
  return n;
}

std::optional<BidirectionalModel> TrainForDataset(const std::string& src_path,
                                                  const std::string& mt_path,
                                                  const PipelineConfig& config) {
  AlignerConfig ac = config.aligner;
  ac.jobs = config.jobs;
  if (config.align_corpus) {
    FilePairs external(config.align_corpus->first, config.align_corpus->second,
                       /*prepare=*/true, config.tokenize);
    LogInfo("training aligner on external corpus",
            {{"source", config.align_corpus->first}});
    return TrainBidirectional(external, ac);
  }
  FilePairs own(src_path, mt_path);
  if (CountUsablePairs(own) == 0) {
    LogWarn("no non-empty (source, mt) pairs; alignments left empty", {});
    return std::nullopt;
  }
  LogInfo("training aligner on dataset pairs", {{"source", src_path}});
  return TrainBidirectional(own, ac);
}

// Adds alignments.txt and source_tags.txt to a directory that already holds
// src.txt, mt.txt and mt_tags.txt.
void AlignAndProject(const std::string& dir, const PipelineConfig& config,
                     const std::optional<std::string>& alignments_path) {
  const std::string src_path = dir + "/src.txt";
  const std::string mt_path = dir + "/mt.txt";
  std::optional<BidirectionalModel> model;
  std::optional<LineReader> given;
  if (alignments_path) {
    given.emplace(*alignments_path);
  } else {
    model = TrainForDataset(src_path, mt_path, config);
  }

  LineReader src(src_path), mt(mt_path), tags(dir + "/mt_tags.txt");
  const std::string tmp_align = dir + "/alignments.txt.tmp";
  LineWriter align_out(tmp_align);
  LineWriter source_tags_out(dir + "/source_tags.txt");

  struct Item {
    TokenSequence source, mt;
    std::vector<Tag> mt_tags;
    AlignmentSet alignment;
    std::string source_tags;
  };
  std::vector<Item> batch;
  auto flush = [&] {
    ParallelFor(batch.size(), config.jobs, [&](size_t i) {
      Item& it = batch[i];
      if (model) {
        it.alignment = AlignPair(*model, config.symmetrize, it.source, it.mt);
      }
      MtTagSequence mt_tags(std::move(it.mt_tags));
      if (mt_tags.token_count() != it.mt.size()) {
        throw InvariantError("MT tag count does not match MT length");
      }
      it.source_tags =
          FormatTags(ProjectSourceTags(mt_tags, it.alignment, it.source.size()));
    });
    for (const Item& it : batch) {
      align_out.Write(it.alignment.ToPharaoh());
      source_tags_out.Write(it.source_tags);
    }
    batch.clear();
  };

  std::string s, m, t, a;
  while (src.Next(s)) {
    if (!mt.Next(m) || !tags.Next(t)) {
      throw InvariantError("dataset columns have different lengths in " + dir);
    }
    Item it;
    it.source = Tokenize(s);
    it.mt = Tokenize(m);
    it.mt_tags = ParseTags(t);
    if (given) {
      if (!given->Next(a)) {
        throw InputError("alignment file " + *alignments_path + " is too short");
      }
      it.alignment = AlignmentSet::FromPharaoh(a);
    }
    batch.push_back(std::move(it));
    if (batch.size() >= config.batch_lines) flush();
  }
  flush();
  align_out.Close();
  source_tags_out.Close();
  fs::rename(tmp_align, dir + "/alignments.txt");
}

nlohmann::json AlignerJson(const AlignerConfig& a) {
  return {{"iterations", a.iterations},
          {"diagonal_tension", a.diagonal_tension},
          {"null_prob", a.null_prob},
          {"favor_diagonal", a.favor_diagonal},
          {"optimize_tension", a.optimize_tension}};
}

DatasetManifest NewManifest(Strategy strategy, const std::string& out_dir,
                            const PipelineConfig& config, nlohmann::json inputs) {
  DatasetManifest m;
  m.strategy = strategy;
  m.directory = out_dir;
  m.dropped = EmptyDrops();
  m.config = {{"strategy", std::string(StrategyCode(strategy))},
              {"inputs", std::move(inputs)},
              {"pipeline", config.ToJson()}};
  m.config_hash = HexDigest(Fnv1a64(m.config.dump()));
  return m;
}

void PrepareOutDir(const std::string& out_dir) {
  fs::create_directories(out_dir);
  fs::create_directories(fs::path(out_dir) / kCheckpointDir);
}

void FinishBuild(DatasetManifest& manifest, RecordSink& sink,
                 const PipelineConfig& config) {
  sink.Close();
  manifest.records = sink.records();
  if (manifest.records == 0) {
    throw InputError("no usable records: every input line was dropped");
  }
  AlignAndProject(manifest.directory, config, std::nullopt);
  fs::remove_all(fs::path(manifest.directory) / kCheckpointDir);
  manifest.Save();
  manifest.Validate();
  LogInfo("dataset written", {{"dir", manifest.directory},
                              {"strategy", std::string(StrategyCode(manifest.strategy))},
                              {"records", std::to_string(manifest.records)}});
}

std::string CheckpointPath(const std::string& out_dir, const Direction& d) {
  return (fs::path(out_dir) / kCheckpointDir /
          (d.kind == DirectionKind::kSourceToTarget ? "src2tgt.tsv" : "tgt2src.tsv"))
      .string();
}

// Round trip of prepared target sentences: fills pseudo_source and mt for the
// records that survive both translations; the others are counted as drops.
class RoundTripper {
 public:
  RoundTripper(TranslationBackend& backend, const PipelineConfig& config,
               const std::string& out_dir)
      : config_(config),
        to_source_(backend, Direction{DirectionKind::kTargetToSource, config.langs},
                   CheckpointPath(out_dir, {DirectionKind::kTargetToSource, config.langs}),
                   config.checkpoint_every),
        to_target_(backend, Direction{DirectionKind::kSourceToTarget, config.langs},
                   CheckpointPath(out_dir, {DirectionKind::kSourceToTarget, config.langs}),
                   config.checkpoint_every) {}

  std::vector<Record> Run(std::vector<Record> batch,
                          std::map<std::string, size_t>& dropped) {
    std::vector<std::string> texts;
    std::vector<size_t> line_nos;
    for (const Record& r : batch) {
      texts.push_back(r.pe.Join());
      line_nos.push_back(r.line_no);
    }
    const TranslationBatch pseudo = to_source_.Translate(texts, line_nos);
    std::vector<Record> kept;
    texts.clear();
    line_nos.clear();
    for (size_t i = 0; i < batch.size(); ++i) {
      if (!pseudo[i]) {
        ++dropped[kDropTranslationFailed];
        continue;
      }
      auto ps = TryPrepare(*pseudo[i], config_.tokenize);
      if (!ps) {
        ++dropped[kDropInvalidTranslation];
        continue;
      }
      batch[i].pseudo_source = std::move(*ps);
      texts.push_back(batch[i].pseudo_source->Join());
      line_nos.push_back(batch[i].line_no);
      kept.push_back(std::move(batch[i]));
    }
    const TranslationBatch mt = to_target_.Translate(texts, line_nos);
    std::vector<Record> out;
    for (size_t i = 0; i < kept.size(); ++i) {
      if (!mt[i]) {
        ++dropped[kDropTranslationFailed];
        continue;
      }
      auto m = TryPrepare(*mt[i], config_.tokenize);
      if (!m) {
        ++dropped[kDropInvalidTranslation];
        continue;
      }
      kept[i].mt = std::move(*m);
      out.push_back(std::move(kept[i]));
    }
    to_source_.Flush();
    to_target_.Flush();
    return out;
  }

 private:
  const PipelineConfig& config_;
  CheckpointedTranslator to_source_;
  CheckpointedTranslator to_target_;
};

// Reads two line-aligned files in lockstep; throws InputError on a length
// mismatch.
bool NextPair(LineReader& a, LineReader& b, std::string& x, std::string& y) {
  const bool has_a = a.Next(x);
  const bool has_b = b.Next(y);
  if (has_a != has_b) {
    throw InputError("line count mismatch between " + a.path() + " and " +
                     b.path() + " at line " +
                     std::to_string(std::max(a.line_no(), b.line_no())));
  }
  return has_a;
}

}  // namespace

// --- Strategy / config ---------------------------------------------------------

std::string_view StrategyCode(Strategy s) {
  switch (s) {
    case Strategy::kMonolingual: return "M";
    case Strategy::kParallel: return "P";
    case Strategy::kHybrid: return "H";
  }
  return "?";
}

Strategy ParseStrategy(std::string_view code) {
  if (code == "M") return Strategy::kMonolingual;
  if (code == "P") return Strategy::kParallel;
  if (code == "H") return Strategy::kHybrid;
  throw InputError("unknown strategy '" + std::string(code) + "'");
}

nlohmann::json PipelineConfig::ToJson() const {
  nlohmann::json j = {
      {"tokenize", std::string(TokenizeModeName(tokenize))},
      {"lowercase", lowercase},
      {"ter_shifts", ter_shifts},
      {"aligner", AlignerJson(aligner)},
      {"symmetrize", std::string(HeuristicName(symmetrize))},
      {"lang_pair", langs.source + "-" + langs.target},
      {"checkpoint_every", checkpoint_every},
  };
  j["align_corpus"] = align_corpus
                          ? nlohmann::json::array({align_corpus->first, align_corpus->second})
                          : nlohmann::json(nullptr);
  if (!extra.empty()) j["extra"] = extra;
  return j;
}

// --- Manifest ----------------------------------------------------------------------

std::string DatasetManifest::Path(std::string_view file) const {
  return (fs::path(directory) / std::string(file)).string();
}

nlohmann::json DatasetManifest::ToJson() const {
  nlohmann::json files = nlohmann::json::array();
  for (auto f : kDatasetFiles) files.push_back(std::string(f));
  if (has_pseudo_source) files.push_back(std::string(kPseudoSourceFile));
  nlohmann::json j = {
      {"format_version", kDatasetFormatVersion},
      {"tool_version", std::string(kToolVersion)},
      {"strategy", std::string(StrategyCode(strategy))},
      {"files", files},
      {"counts", {{"records", records}, {"input_lines", input_lines}}},
      {"dropped", dropped},
      {"config", config},
      {"config_hash", config_hash},
  };
  if (!split.is_null()) j["split"] = split;
  return j;
}

void DatasetManifest::Save() const {
  std::ofstream out(Path(kManifestFile));
  if (!out) throw InputError("cannot write " + Path(kManifestFile));
  out << ToJson().dump(2) << '\n';
}

DatasetManifest DatasetManifest::Load(const std::string& directory) {
  DatasetManifest m;
  m.directory = directory;
  std::ifstream in(m.Path(kManifestFile));
  if (!in) throw InputError("no manifest.json in " + directory);
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format_version").get<int>() != kDatasetFormatVersion) {
      throw InputError("unsupported dataset format version in " + directory);
    }
    m.strategy = ParseStrategy(j.at("strategy").get<std::string>());
    m.records = j.at("counts").at("records").get<size_t>();
    m.input_lines = j.at("counts").at("input_lines").get<size_t>();
    m.dropped = j.at("dropped").get<std::map<std::string, size_t>>();
    m.config = j.at("config");
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& f : j.at("files")) {
      if (f.get<std::string>() == kPseudoSourceFile) m.has_pseudo_source = true;
    }
    if (j.contains("split")) m.split = j.at("split");
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed manifest in " + directory + ": " + e.what());
  }
  return m;
}

void DatasetManifest::Validate() const {
  std::vector<std::string> files(std::begin(kDatasetFiles), std::end(kDatasetFiles));
  if (has_pseudo_source) files.emplace_back(kPseudoSourceFile);
  for (const auto& f : files) {
    const std::string p = Path(f);
    if (!fs::exists(p)) throw InvariantError("dataset file missing: " + p);
    const size_t n = CountLines(p);
    if (n != records) {
      throw InvariantError(p + " has " + std::to_string(n) + " lines, manifest says " +
                           std::to_string(records));
    }
  }
}

// --- Builders -------------------------------------------------------------------------

DatasetManifest BuildQuakM(const std::string& target_mono,
                           TranslationBackend& backend,
                           const PipelineConfig& config,
                           const std::string& out_dir,
                           const std::string& backend_label) {
  DatasetManifest manifest =
      NewManifest(Strategy::kMonolingual, out_dir, config,
                  {{"mono", target_mono}, {"backend", backend_label}});
  LineReader mono(target_mono);
  PrepareOutDir(out_dir);
  RecordSink sink(out_dir, /*pseudo_source=*/false);
  RoundTripper round_trip(backend, config, out_dir);

  std::vector<Record> batch;
  auto flush = [&] {
    std::vector<Record> done = round_trip.Run(std::move(batch), manifest.dropped);
    for (Record& r : done) r.source = *r.pseudo_source;
    sink.WriteBatch(done, config);
    batch.clear();
  };
  std::string line;
  while (mono.Next(line)) {
    auto pe = TryPrepare(line, config.tokenize);
    if (!pe) {
      ++manifest.dropped[kDropInvalidInput];
      LogWarn("skipping line with invalid UTF-8", {{"line", std::to_string(mono.line_no())}});
      continue;
    }
    if (pe->empty()) {
      ++manifest.dropped[kDropEmptyPe];
      continue;
    }
    Record r;
    r.line_no = mono.line_no();
    r.pe = std::move(*pe);
    batch.push_back(std::move(r));
    if (batch.size() >= config.batch_lines) flush();
  }
  manifest.input_lines = mono.line_no();
  if (manifest.input_lines == 0) throw InputError("monolingual corpus is empty");
  flush();
  FinishBuild(manifest, sink, config);
  return manifest;
}

DatasetManifest BuildQuakP(const std::string& source_path,
                           const std::string& target_path,
                           TranslationBackend& backend,
                           const PipelineConfig& config,
                           const std::string& out_dir,
                           const std::string& backend_label) {
  DatasetManifest manifest = NewManifest(
      Strategy::kParallel, out_dir, config,
      {{"source", source_path}, {"target", target_path}, {"backend", backend_label}});
  LineReader src(source_path), tgt(target_path);
  PrepareOutDir(out_dir);
  RecordSink sink(out_dir, /*pseudo_source=*/false);
  const Direction forward{DirectionKind::kSourceToTarget, config.langs};
  CheckpointedTranslator translator(backend, forward, CheckpointPath(out_dir, forward),
                                    config.checkpoint_every);

  std::vector<Record> batch;
  auto flush = [&] {
    std::vector<std::string> texts;
    std::vector<size_t> line_nos;
    for (const Record& r : batch) {
      texts.push_back(r.source.Join());
      line_nos.push_back(r.line_no);
    }
    const TranslationBatch mt = translator.Translate(texts, line_nos);
    translator.Flush();
    std::vector<Record> done;
    for (size_t i = 0; i < batch.size(); ++i) {
      if (!mt[i]) {
        ++manifest.dropped[kDropTranslationFailed];
        continue;
      }
      auto m = TryPrepare(*mt[i], config.tokenize);
      if (!m) {
        ++manifest.dropped[kDropInvalidTranslation];
        continue;
      }
      batch[i].mt = std::move(*m);
      done.push_back(std::move(batch[i]));
    }
    sink.WriteBatch(done, config);
    batch.clear();
  };

  std::string s, t;
  while (NextPair(src, tgt, s, t)) {
    auto source = TryPrepare(s, config.tokenize);
    auto pe = TryPrepare(t, config.tokenize);
    if (!source || !pe) {
      ++manifest.dropped[kDropInvalidInput];
      LogWarn("skipping line with invalid UTF-8", {{"line", std::to_string(src.line_no())}});
      continue;
    }
    if (pe->empty()) {
      ++manifest.dropped[kDropEmptyPe];
      continue;
    }
    Record r;
    r.line_no = src.line_no();
    r.source = std::move(*source);
    r.pe = std::move(*pe);
    batch.push_back(std::move(r));
    if (batch.size() >= config.batch_lines) flush();
  }
  manifest.input_lines = src.line_no();
  if (manifest.input_lines == 0) throw InputError("parallel corpus is empty");
  flush();
  FinishBuild(manifest, sink, config);
  return manifest;
}

DatasetManifest BuildQuakH(const std::string& source_path,
                           const std::string& target_path,
                           const std::optional<std::string>& round_trip_mt,
                           TranslationBackend* backend,
                           const PipelineConfig& config,
                           const std::string& out_dir,
                           const std::string& backend_label) {
  if (!round_trip_mt && backend == nullptr) {
    throw InputError("strategy H needs round-trip MT output or a backend");
  }
  nlohmann::json inputs = {{"source", source_path}, {"target", target_path}};
  if (round_trip_mt) inputs["round_trip_mt"] = *round_trip_mt;
  else inputs["backend"] = backend_label;
  DatasetManifest manifest = NewManifest(Strategy::kHybrid, out_dir, config, inputs);
  manifest.has_pseudo_source = !round_trip_mt.has_value();

  LineReader src(source_path), tgt(target_path);
  std::optional<LineReader> given_mt;
  if (round_trip_mt) given_mt.emplace(*round_trip_mt);
  PrepareOutDir(out_dir);
  RecordSink sink(out_dir, manifest.has_pseudo_source);
  std::optional<RoundTripper> round_trip;
  if (!round_trip_mt) round_trip.emplace(*backend, config, out_dir);

  std::vector<Record> batch;
  auto flush = [&] {
    if (round_trip) batch = round_trip->Run(std::move(batch), manifest.dropped);
    sink.WriteBatch(batch, config);
    batch.clear();
  };

  std::string s, t, m;
  while (NextPair(src, tgt, s, t)) {
    if (given_mt && !given_mt->Next(m)) {
      throw InputError("round-trip MT file " + *round_trip_mt +
                       " is shorter than the parallel corpus");
    }
    auto source = TryPrepare(s, config.tokenize);
    auto pe = TryPrepare(t, config.tokenize);
    std::optional<TokenSequence> mt;
    if (given_mt) mt = TryPrepare(m, config.tokenize);
    if (!source || !pe || (given_mt && !mt)) {
      ++manifest.dropped[kDropInvalidInput];
      LogWarn("skipping line with invalid UTF-8", {{"line", std::to_string(src.line_no())}});
      continue;
    }
    if (pe->empty()) {
      ++manifest.dropped[kDropEmptyPe];
      continue;
    }
    Record r;
    r.line_no = src.line_no();
    r.source = std::move(*source);
    r.pe = std::move(*pe);
    if (mt) r.mt = std::move(*mt);
    batch.push_back(std::move(r));
    if (batch.size() >= config.batch_lines) flush();
  }
  if (given_mt && given_mt->Next(m)) {
    throw InputError("round-trip MT file " + *round_trip_mt +
                     " is longer than the parallel corpus");
  }
  manifest.input_lines = src.line_no();
  if (manifest.input_lines == 0) throw InputError("parallel corpus is empty");
  flush();
  FinishBuild(manifest, sink, config);
  return manifest;
}

// --- Split ------------------------------------------------------------------------------

std::vector<unsigned char> SplitAssignment(size_t records, size_t valid_count,
                                           size_t test_count, uint64_t seed) {
  if (valid_count + test_count >= records && valid_count + test_count > 0) {
    throw InputError("valid + test (" + std::to_string(valid_count + test_count) +
                     ") must be smaller than the record count (" +
                     std::to_string(records) + ")");
  }
  std::vector<unsigned char> out(records, 0);
  std::vector<uint32_t> idx(records);
  for (size_t i = 0; i < records; ++i) idx[i] = static_cast<uint32_t>(i);
  std::mt19937_64 rng(seed);
  const size_t picks = valid_count + test_count;
  for (size_t i = 0; i < picks; ++i) {
    const uint64_t span = records - i;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(idx[i], idx[i + x % span]);
    out[idx[i]] = i < valid_count ? 1 : 2;
  }
  return out;
}

SplitManifests SplitDataset(const DatasetManifest& manifest, size_t valid_count,
                            size_t test_count, uint64_t seed,
                            const std::string& out_dir) {
  manifest.Validate();
  const auto assignment =
      SplitAssignment(manifest.records, valid_count, test_count, seed);
  static constexpr const char* kNames[] = {"train", "valid", "test"};

  std::vector<std::string> files(std::begin(kDatasetFiles), std::end(kDatasetFiles));
  if (manifest.has_pseudo_source) files.emplace_back(kPseudoSourceFile);

  std::array<DatasetManifest, 3> parts;
  for (int k = 0; k < 3; ++k) {
    parts[k] = manifest;
    parts[k].directory = (fs::path(out_dir) / kNames[k]).string();
    parts[k].records = 0;
    parts[k].input_lines = manifest.records;
    parts[k].dropped = EmptyDrops();
    parts[k].split = {{"name", kNames[k]},
                      {"seed", seed},
                      {"valid", valid_count},
                      {"test", test_count},
                      {"parent_config_hash", manifest.config_hash},
                      {"parent_records", manifest.records}};
    fs::create_directories(parts[k].directory);
  }
  for (size_t i = 0; i < assignment.size(); ++i) ++parts[assignment[i]].records;

  for (const auto& f : files) {
    LineReader in(manifest.Path(f));
    std::vector<LineWriter> outs;
    for (int k = 0; k < 3; ++k) outs.emplace_back(parts[k].Path(f));
    std::string line;
    size_t i = 0;
    while (in.Next(line)) outs[assignment[i++]].Write(line);
    for (auto& w : outs) w.Close();
  }
  for (auto& p : parts) {
    p.Save();
    p.Validate();
  }
  return {parts[0], parts[1], parts[2]};
}

// --- Checks and standalone tagging -----------------------------------------------------

LawReport CheckDatasetLaws(const DatasetManifest& manifest) {
  manifest.Validate();
  LawReport report;
  LineReader src(manifest.Path("src.txt")), mt(manifest.Path("mt.txt")),
      pe(manifest.Path("pe.txt")), mt_tags(manifest.Path("mt_tags.txt")),
      source_tags(manifest.Path("source_tags.txt")),
      align(manifest.Path("alignments.txt"));
  std::string s, m, p, mtag, stag, a;
  while (src.Next(s) && mt.Next(m) && pe.Next(p) && mt_tags.Next(mtag) &&
         source_tags.Next(stag) && align.Next(a)) {
    ++report.records;
    const TokenSequence source = Tokenize(s);
    const TokenSequence mt_tokens = Tokenize(m);
    const auto mtt = ParseTags(mtag);
    const auto stt = ParseTags(stag);
    if (mtt.size() != 2 * mt_tokens.size() + 1) ++report.mt_tag_violations;
    if (stt.size() != source.size()) ++report.source_tag_violations;
    try {
      AlignmentSet::FromPharaoh(a).CheckBounds(source.size(), mt_tokens.size());
    } catch (const std::exception&) {
      ++report.alignment_violations;
    }
    if (m == p) {
      ++report.identity_records;
      const bool all_ok =
          std::all_of(mtt.begin(), mtt.end(), [](Tag t) { return t == Tag::kOk; }) &&
          std::all_of(stt.begin(), stt.end(), [](Tag t) { return t == Tag::kOk; });
      if (!all_ok) ++report.identity_violations;
    }
  }
  return report;
}

void TagFiles(const std::string& source_path, const std::string& mt_path,
              const std::string& pe_path,
              const std::optional<std::string>& alignments_path,
              const PipelineConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);
  // Canonical copies of source and mt, so alignment and projection read the
  // same tokens the tags were computed on.
  LineReader src(source_path), mt(mt_path), pe(pe_path);
  LineWriter src_out(out_dir + "/src.txt"), mt_out(out_dir + "/mt.txt"),
      ter_out(out_dir + "/ter.txt"), tags_out(out_dir + "/mt_tags.txt");
  std::string s, m, p;
  while (NextPair(src, mt, s, m)) {
    if (!pe.Next(p)) throw InputError(pe_path + " is shorter than " + mt_path);
    Record r;
    try {
      r.source = Prepare(s, config.tokenize);
      r.mt = Prepare(m, config.tokenize);
      r.pe = Prepare(p, config.tokenize);
    } catch (const LineError& e) {
      throw InputError(std::string(e.what()) + " at line " + std::to_string(src.line_no()));
    }
    if (r.pe.empty()) {
      throw InputError("empty post-edit at line " + std::to_string(src.line_no()) +
                       " (TER undefined)");
    }
    const Annotated a = AnnotateRecord(r, config);
    src_out.Write(r.source.Join());
    mt_out.Write(r.mt.Join());
    ter_out.Write(a.ter);
    tags_out.Write(a.mt_tags);
  }
  if (pe.Next(p)) throw InputError(pe_path + " is longer than " + mt_path);
  for (LineWriter* w : {&src_out, &mt_out, &ter_out, &tags_out}) w->Close();
  AlignAndProject(out_dir, config, alignments_path);
}

}  // namespace qeforge
