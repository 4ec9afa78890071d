#ifndef QEFORGE_PIPELINE_H_
#define QEFORGE_PIPELINE_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qeforge/aligner.h"
#include "qeforge/backend.h"
#include "qeforge/text.h"

namespace qeforge {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kDatasetFormatVersion = 1;

enum class Strategy { kMonolingual, kParallel, kHybrid };

std::string_view StrategyCode(Strategy s);  // "M", "P", "H"
Strategy ParseStrategy(std::string_view code);

// Dataset files, in manifest order.
inline constexpr std::string_view kDatasetFiles[] = {
    "src.txt",         "mt.txt",         "pe.txt", "mt_tags.txt",
    "source_tags.txt", "alignments.txt", "ter.txt"};
inline constexpr std::string_view kPseudoSourceFile = "pseudo_src.txt";
inline constexpr std::string_view kManifestFile = "manifest.json";

struct PipelineConfig {
  TokenizeMode tokenize = TokenizeMode::kWhitespace;
  bool lowercase = false;
  bool ter_shifts = false;
  AlignerConfig aligner;
  SymmetrizeHeuristic symmetrize = SymmetrizeHeuristic::kGrowDiagFinalAnd;
  // Train the aligner on these (source, target) files instead of the
  // dataset's own (source, mt) pairs.
  std::optional<std::pair<std::string, std::string>> align_corpus;
  LanguagePair langs;
  size_t checkpoint_every = 10000;
  size_t batch_lines = 1000;
  size_t jobs = 1;
  // Extra settings echoed into the manifest (e.g. the CLI's merged config).
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json ToJson() const;
};

struct DatasetManifest {
  Strategy strategy = Strategy::kParallel;
  std::string directory;
  size_t records = 0;
  size_t input_lines = 0;
  std::map<std::string, size_t> dropped;
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;
  bool has_pseudo_source = false;
  nlohmann::json split = nullptr;  // set on manifests written by SplitDataset

  std::string Path(std::string_view file) const;
  nlohmann::json ToJson() const;
  void Save() const;
  static DatasetManifest Load(const std::string& directory);

  // Throws InvariantError unless every file exists with `records` lines.
  void Validate() const;
};

// Strategy M: pseudo-source = translate(target, tgt->src),
// mt = translate(pseudo-source, src->tgt), pe = target.
DatasetManifest BuildQuakM(const std::string& target_mono,
                           TranslationBackend& backend,
                           const PipelineConfig& config,
                           const std::string& out_dir,
                           const std::string& backend_label = "");

// Strategy P: mt = translate(source, src->tgt), pe = target.
DatasetManifest BuildQuakP(const std::string& source_path,
                           const std::string& target_path,
                           TranslationBackend& backend,
                           const PipelineConfig& config,
                           const std::string& out_dir,
                           const std::string& backend_label = "");

// Strategy H: source and pe from the parallel corpus, mt from a round trip of
// the target side. Either round_trip_mt (a file line-aligned with the corpus)
// or backend must be given.
DatasetManifest BuildQuakH(const std::string& source_path,
                           const std::string& target_path,
                           const std::optional<std::string>& round_trip_mt,
                           TranslationBackend* backend,
                           const PipelineConfig& config,
                           const std::string& out_dir,
                           const std::string& backend_label = "");

struct SplitManifests {
  DatasetManifest train;
  DatasetManifest valid;
  DatasetManifest test;
};

// Seeded sample without replacement for valid and test; the rest is train.
// Writes {out_dir}/train, {out_dir}/valid and {out_dir}/test, preserving the
// original record order inside each split.
SplitManifests SplitDataset(const DatasetManifest& manifest, size_t valid_count,
                            size_t test_count, uint64_t seed,
                            const std::string& out_dir);

// Assigns each record index to 0 (train), 1 (valid) or 2 (test).
std::vector<unsigned char> SplitAssignment(size_t records, size_t valid_count,
                                           size_t test_count, uint64_t seed);

struct LawReport {
  size_t records = 0;
  size_t mt_tag_violations = 0;
  size_t source_tag_violations = 0;
  size_t identity_records = 0;
  size_t identity_violations = 0;
  size_t alignment_violations = 0;
  bool ok() const {
    return mt_tag_violations == 0 && source_tag_violations == 0 &&
           identity_violations == 0 && alignment_violations == 0;
  }
};

// Re-reads a dataset and checks the 2N+1 law, source tag lengths, link bounds
// and that mt == pe records are all OK.
LawReport CheckDatasetLaws(const DatasetManifest& manifest);

// Runs the tagging stage on existing files: TER, edit scripts and tags for
// line-aligned (source, mt, pe) files, using given Pharaoh alignments or a
// freshly trained aligner. Writes mt_tags.txt, source_tags.txt,
// alignments.txt, ter.txt into out_dir.
void TagFiles(const std::string& source_path, const std::string& mt_path,
              const std::string& pe_path,
              const std::optional<std::string>& alignments_path,
              const PipelineConfig& config, const std::string& out_dir);

}  // namespace qeforge

#endif  // QEFORGE_PIPELINE_H_
