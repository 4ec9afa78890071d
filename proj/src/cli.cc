#include "qeforge/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "qeforge/aligner.h"
#include "qeforge/backend.h"
#include "qeforge/corpus_io.h"
#include "qeforge/errors.h"
#include "qeforge/evaluation.h"
#include "qeforge/log.h"
#include "qeforge/pipeline.h"
#include "qeforge/stats.h"
#include "qeforge/ter.h"

namespace qeforge {
namespace fs = std::filesystem;
namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInvariant = 2;

// Flag values shared by the subcommands; CLI11 fills them in from flags, the
// --config file and defaults, in that order of precedence.
struct RunConfig {
  std::string out;
  std::string backend = "mock:seed=0";
  std::string tokenize = "whitespace";
  bool lowercase = false;
  bool ter_shifts = false;
  int iterations = 5;
  double tension = 4.0;
  double null_prob = 0.08;
  bool no_favor_diagonal = false;
  bool optimize_tension = false;
  std::string symmetrize = "grow-diag-final-and";
  std::vector<std::string> align_corpus;
  std::string lang_pair = "ko-en";
  size_t checkpoint_every = 10000;
  size_t batch_lines = 1000;
  size_t jobs = 0;
  std::string log_level = "info";

  std::string mono;
  std::vector<std::string> parallel;
  std::string round_trip_mt;
  std::string src, mt, pe, alignments;
  std::string model_dir;
  std::string dataset;
  size_t valid = 0, test = 0;
  uint64_t seed = 0;
  std::string pred_mt, gold_mt, pred_src, gold_src, ter_file;
  bool split_gaps = false;
  std::string input;
  std::string direction = "src2tgt";
};

void AddTextOptions(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--tokenize", rc.tokenize, "whitespace | punct-split")
      ->check(CLI::IsMember({"whitespace", "punct-split"}));
  cmd->add_flag("--lowercase", rc.lowercase, "Fold case before TER and tagging");
  cmd->add_flag("--ter-shifts", rc.ter_shifts, "Enable the block-shift phase for TER");
}

void AddAlignerOptions(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--iterations", rc.iterations, "EM iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--tension", rc.tension, "Initial diagonal tension")->check(CLI::PositiveNumber);
  cmd->add_option("--p0", rc.null_prob, "NULL alignment probability")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--no-favor-diagonal", rc.no_favor_diagonal, "Uniform alignment prior");
  cmd->add_flag("--optimize-tension", rc.optimize_tension, "Re-estimate the tension");
  cmd->add_option("--symmetrize", rc.symmetrize, "intersection | union | grow-diag-final-and")
      ->check(CLI::IsMember({"intersection", "union", "grow-diag-final-and"}));
}

void AddBuildOptions(CLI::App* cmd, RunConfig& rc) {
  AddTextOptions(cmd, rc);
  AddAlignerOptions(cmd, rc);
  cmd->add_option("--out", rc.out, "Output dataset directory")->required();
  cmd->add_option("--align-corpus", rc.align_corpus,
                  "Train the aligner on SRC,TGT instead of the dataset")
      ->delimiter(',')
      ->expected(2);
  cmd->add_option("--lang-pair", rc.lang_pair, "Language pair label, source-target");
  cmd->add_option("--checkpoint-every", rc.checkpoint_every, "Backend checkpoint interval (lines)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--batch-lines", rc.batch_lines, "Lines per streaming batch")
      ->check(CLI::PositiveNumber);
}

AlignerConfig ToAlignerConfig(const RunConfig& rc) {
  AlignerConfig a;
  a.iterations = rc.iterations;
  a.diagonal_tension = rc.tension;
  a.null_prob = rc.null_prob;
  a.favor_diagonal = !rc.no_favor_diagonal;
  a.optimize_tension = rc.optimize_tension;
  a.jobs = rc.jobs;
  a.Validate();
  return a;
}

LanguagePair ParseLangPair(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == s.size()) {
    throw InputError("--lang-pair must look like ko-en");
  }
  return {s.substr(0, dash), s.substr(dash + 1)};
}

PipelineConfig ToPipelineConfig(const RunConfig& rc) {
  PipelineConfig c;
  c.tokenize = ParseTokenizeMode(rc.tokenize);
  c.lowercase = rc.lowercase;
  c.ter_shifts = rc.ter_shifts;
  c.aligner = ToAlignerConfig(rc);
  c.symmetrize = ParseHeuristic(rc.symmetrize);
  if (rc.align_corpus.size() == 2) c.align_corpus.emplace(rc.align_corpus[0], rc.align_corpus[1]);
  c.langs = ParseLangPair(rc.lang_pair);
  c.checkpoint_every = rc.checkpoint_every;
  c.batch_lines = rc.batch_lines;
  c.jobs = rc.jobs;
  return c;
}

void PrintDatasetSummary(const DatasetManifest& m) {
  std::cout << "strategy " << StrategyCode(m.strategy) << "\nrecords " << m.records
            << "\ninput_lines " << m.input_lines << "\nconfig_hash " << m.config_hash
            << "\ndirectory " << m.directory << "\n";
}

int RunBuild(Strategy strategy, const RunConfig& rc) {
  const PipelineConfig config = ToPipelineConfig(rc);
  if (strategy == Strategy::kHybrid && !rc.round_trip_mt.empty()) {
    const auto m = BuildQuakH(rc.parallel.at(0), rc.parallel.at(1), rc.round_trip_mt,
                              nullptr, config, rc.out);
    PrintDatasetSummary(m);
    return kExitOk;
  }
  const BackendSpec spec = BackendSpec::Parse(rc.backend);
  auto backend = MakeBackend(spec);
  const std::string label = spec.ToString();
  DatasetManifest m;
  switch (strategy) {
    case Strategy::kMonolingual:
      m = BuildQuakM(rc.mono, *backend, config, rc.out, label);
      break;
    case Strategy::kParallel:
      m = BuildQuakP(rc.parallel.at(0), rc.parallel.at(1), *backend, config, rc.out, label);
      break;
    case Strategy::kHybrid:
      m = BuildQuakH(rc.parallel.at(0), rc.parallel.at(1), std::nullopt, backend.get(),
                     config, rc.out, label);
      break;
  }
  PrintDatasetSummary(m);
  return kExitOk;
}

int RunAlignTrain(const RunConfig& rc) {
  const PipelineConfig config = ToPipelineConfig(rc);
  FilePairs corpus(rc.parallel.at(0), rc.parallel.at(1), /*prepare=*/true, config.tokenize);
  fs::create_directories(rc.out);
  const TrainResult fwd = TrainAligner(corpus, config.aligner);
  SwappedPairs swapped(corpus);
  const TrainResult rev = TrainAligner(swapped, config.aligner);
  fwd.model.SaveFile(rc.out + "/forward.model");
  rev.model.SaveFile(rc.out + "/reverse.model");
  nlohmann::json report = {
      {"forward", {{"log_likelihood", fwd.log_likelihoods}, {"tension", fwd.tensions},
                   {"pairs", fwd.used_pairs}, {"skipped", fwd.skipped_pairs}}},
      {"reverse", {{"log_likelihood", rev.log_likelihoods}, {"tension", rev.tensions},
                   {"pairs", rev.used_pairs}, {"skipped", rev.skipped_pairs}}}};
  std::ofstream(rc.out + "/training.json") << report.dump(2) << '\n';
  if (fwd.skipped_pairs > 0) {
    LogWarn("skipped pairs with an empty side",
            {{"count", std::to_string(fwd.skipped_pairs)}});
  }
  std::cout << "pairs " << fwd.used_pairs << "\nforward_tension "
            << fwd.model.config.diagonal_tension << "\nreverse_tension "
            << rev.model.config.diagonal_tension << "\n";
  return kExitOk;
}

int RunAlign(const RunConfig& rc) {
  const PipelineConfig config = ToPipelineConfig(rc);
  BidirectionalModel model;
  model.forward = AlignmentModel::LoadFile(rc.model_dir + "/forward.model");
  model.reverse = AlignmentModel::LoadFile(rc.model_dir + "/reverse.model");
  fs::create_directories(rc.out);
  LineWriter out(rc.out + "/alignments.txt");
  LineReader src(rc.parallel.at(0)), tgt(rc.parallel.at(1));
  std::string s, t;
  while (true) {
    const bool hs = src.Next(s);
    const bool ht = tgt.Next(t);
    if (hs != ht) throw InputError("line count mismatch between the parallel files");
    if (!hs) break;
    const TokenSequence source = Prepare(s, config.tokenize);
    const TokenSequence target = Prepare(t, config.tokenize);
    out.Write(AlignPair(model, config.symmetrize, source, target).ToPharaoh());
  }
  out.Close();
  std::cout << "aligned " << out.lines() << "\n";
  return kExitOk;
}

int RunTag(const RunConfig& rc) {
  const PipelineConfig config = ToPipelineConfig(rc);
  std::optional<std::string> alignments;
  if (!rc.alignments.empty()) alignments = rc.alignments;
  TagFiles(rc.src, rc.mt, rc.pe, alignments, config, rc.out);
  std::cout << "tagged " << CountLines(rc.out + "/mt_tags.txt") << "\n";
  return kExitOk;
}

int RunTer(const RunConfig& rc) {
  const TokenizeMode mode = ParseTokenizeMode(rc.tokenize);
  LineReader mt(rc.mt), pe(rc.pe);
  std::optional<LineWriter> ter_out, edits_out;
  if (!rc.out.empty()) {
    fs::create_directories(rc.out);
    ter_out.emplace(rc.out + "/ter.txt");
    edits_out.emplace(rc.out + "/edits.txt");
  }
  std::vector<double> values;
  size_t edits = 0, ref_tokens = 0;
  std::string m, p;
  while (true) {
    const bool hm = mt.Next(m);
    const bool hp = pe.Next(p);
    if (hm != hp) throw InputError("--mt and --pe differ in line count");
    if (!hm) break;
    TokenSequence a = Prepare(m, mode);
    TokenSequence b = Prepare(p, mode);
    if (rc.lowercase) {
      a = Lowercase(a);
      b = Lowercase(b);
    }
    if (b.empty()) {
      LogWarn("skipping pair with empty reference", {{"line", std::to_string(mt.line_no())}});
      continue;
    }
    const TerResult r = TerScore(a, b, rc.ter_shifts);
    values.push_back(r.ter);
    edits += r.edit_count;
    ref_tokens += r.ref_length;
    if (ter_out) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", r.ter);
      ter_out->Write(buf);
      std::string ops = SerializeOps(r.shifts);
      const std::string script = SerializeScript(r.script);
      if (!ops.empty() && !script.empty()) ops += ',';
      edits_out->Write(ops + script);
    }
  }
  if (values.empty()) throw InputError("no scorable pairs");
  const TerSummary s = SummarizeTer(values);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "pairs %zu\nmode %s\nmean TER %.2f\nmedian TER %.2f\nstd TER %.2f\n"
                "variance TER %.2f\ncorpus TER %.4f\n",
                values.size(), rc.ter_shifts ? "shifts" : "no-shifts", s.mean, s.median,
                s.std_dev, s.variance,
                static_cast<double>(edits) / static_cast<double>(ref_tokens));
  std::cout << buf;
  if (ter_out) {
    ter_out->Close();
    edits_out->Close();
  }
  return kExitOk;
}

int RunStats(const RunConfig& rc) {
  const DatasetManifest m = DatasetManifest::Load(rc.dataset);
  const CorpusStats st = ComputeCorpusStats(m);
  const std::string out = rc.out.empty() ? rc.dataset : rc.out;
  fs::create_directories(out);
  WriteStatsReport(st, out);
  std::cout << StatsToText(st);
  return kExitOk;
}

int RunSplit(const RunConfig& rc) {
  const DatasetManifest m = DatasetManifest::Load(rc.dataset);
  const SplitManifests parts = SplitDataset(m, rc.valid, rc.test, rc.seed, rc.out);
  std::cout << "train " << parts.train.records << "\nvalid " << parts.valid.records
            << "\ntest " << parts.test.records << "\n";
  return kExitOk;
}

int RunEvaluate(const RunConfig& rc) {
  EvaluationInputs in;
  in.predicted_mt_tags = rc.pred_mt;
  in.gold_mt_tags = rc.gold_mt;
  if (!rc.pred_src.empty()) in.predicted_source_tags = rc.pred_src;
  if (!rc.gold_src.empty()) in.gold_source_tags = rc.gold_src;
  if (!rc.ter_file.empty()) in.ter_file = rc.ter_file;
  in.split_gaps = rc.split_gaps;
  const MccReport report = Evaluate(in);
  if (!rc.out.empty()) {
    fs::create_directories(rc.out);
    std::ofstream(rc.out + "/evaluation.json") << ReportToJson(report).dump(2) << '\n';
    std::ofstream(rc.out + "/evaluation.txt") << ReportToText(report);
  }
  std::cout << ReportToText(report);
  return kExitOk;
}

int RunTranslate(const RunConfig& rc) {
  const BackendSpec spec = BackendSpec::Parse(rc.backend);
  auto backend = MakeBackend(spec);
  Direction dir;
  dir.langs = ParseLangPair(rc.lang_pair);
  dir.kind = rc.direction == "tgt2src" ? DirectionKind::kTargetToSource
                                       : DirectionKind::kSourceToTarget;
  LineReader in(rc.input);
  std::optional<LineWriter> out;
  if (!rc.out.empty()) {
    fs::create_directories(rc.out);
    out.emplace(rc.out + "/translations.txt");
  }
  std::vector<std::string> batch;
  std::vector<size_t> line_nos;
  auto flush = [&] {
    if (batch.empty()) return;
    const TranslationBatch res = backend->TranslateBatch(batch, dir, line_nos);
    for (size_t i = 0; i < res.size(); ++i) {
      if (!res[i]) {
        throw InputError("no translation for line " + std::to_string(line_nos[i]));
      }
      if (out) out->Write(*res[i]);
      else std::cout << *res[i] << '\n';
    }
    batch.clear();
    line_nos.clear();
  };
  std::string line;
  while (in.Next(line)) {
    batch.push_back(Normalize(line));
    line_nos.push_back(in.line_no());
    if (batch.size() >= rc.batch_lines) flush();
  }
  flush();
  if (out) out->Close();
  return kExitOk;
}

LogLevel ParseLogLevel(const std::string& s) {
  if (s == "debug") return LogLevel::kDebug;
  if (s == "warn") return LogLevel::kWarn;
  if (s == "error") return LogLevel::kError;
  if (s == "silent") return LogLevel::kSilent;
  return LogLevel::kInfo;
}

}  // namespace

int RunCli(int argc, const char* const* argv) {
  RunConfig rc;
  CLI::App app{"Builds and audits word-level MT quality-estimation datasets", "qeforge"};
  app.set_config("--config", "", "Read options from a TOML/INI file (flags win)");
  app.set_version_flag("--version",
                       "qeforge " + std::string(kToolVersion) + " (dataset format " +
                           std::to_string(kDatasetFormatVersion) +
                           ", alignment model format 1)");
  app.add_option("--jobs", rc.jobs, "Worker threads (default: all cores)");
  app.add_option("--log-level", rc.log_level, "debug | info | warn | error | silent")
      ->check(CLI::IsMember({"debug", "info", "warn", "error", "silent"}));
  app.require_subcommand(1);

  auto* build_m = app.add_subcommand("build-m", "Strategy M: round-trip a target monolingual corpus");
  build_m->add_option("--mono", rc.mono, "Target-language monolingual corpus")->required();
  build_m->add_option("--backend", rc.backend, "mock:seed=N | file:... | http:...");
  AddBuildOptions(build_m, rc);

  auto* build_p = app.add_subcommand("build-p", "Strategy P: one-way translation of a parallel corpus");
  build_p->add_option("--parallel", rc.parallel, "SRC,TGT files")
      ->delimiter(',')->expected(2)->required();
  build_p->add_option("--backend", rc.backend, "mock:seed=N | file:... | http:...");
  AddBuildOptions(build_p, rc);

  auto* build_h = app.add_subcommand("build-h", "Strategy H: parallel source/pe with round-trip MT");
  build_h->add_option("--parallel", rc.parallel, "SRC,TGT files")
      ->delimiter(',')->expected(2)->required();
  auto* rt = build_h->add_option("--round-trip-mt", rc.round_trip_mt,
                                 "Round-trip MT of the target side, line-aligned");
  build_h->add_option("--backend", rc.backend, "Backend for the round trip")->excludes(rt);
  AddBuildOptions(build_h, rc);

  auto* align_train = app.add_subcommand("align-train", "Train forward and reverse aligners");
  align_train->add_option("--parallel", rc.parallel, "SRC,TGT files")
      ->delimiter(',')->expected(2)->required();
  align_train->add_option("--out", rc.out, "Model directory")->required();
  align_train->add_option("--tokenize", rc.tokenize)->check(CLI::IsMember({"whitespace", "punct-split"}));
  AddAlignerOptions(align_train, rc);

  auto* align = app.add_subcommand("align", "Symmetrized Viterbi alignment with trained models");
  align->add_option("--parallel", rc.parallel, "SRC,TGT files")
      ->delimiter(',')->expected(2)->required();
  align->add_option("--model-dir", rc.model_dir, "Directory from align-train")->required();
  align->add_option("--out", rc.out, "Output directory")->required();
  align->add_option("--tokenize", rc.tokenize)->check(CLI::IsMember({"whitespace", "punct-split"}));
  AddAlignerOptions(align, rc);

  auto* tag = app.add_subcommand("tag", "Tag existing source / MT / post-edit files");
  tag->add_option("--src", rc.src, "Source sentences")->required();
  tag->add_option("--mt", rc.mt, "MT output")->required();
  tag->add_option("--pe", rc.pe, "Post-edits (pseudo-PE)")->required();
  tag->add_option("--alignments", rc.alignments, "Pharaoh source-MT alignments");
  tag->add_option("--out", rc.out, "Output directory")->required();
  AddTextOptions(tag, rc);
  AddAlignerOptions(tag, rc);

  auto* ter = app.add_subcommand("ter", "TER between MT output and post-edits");
  ter->add_option("--mt", rc.mt, "MT output")->required();
  ter->add_option("--pe", rc.pe, "Post-edits")->required();
  ter->add_option("--out", rc.out, "Write ter.txt and edits.txt here");
  AddTextOptions(ter, rc);

  auto* stats = app.add_subcommand("stats", "Dataset statistics and TER histogram");
  stats->add_option("--dataset", rc.dataset, "Dataset directory")->required();
  stats->add_option("--out", rc.out, "Report directory (default: the dataset)");

  auto* split = app.add_subcommand("split", "Seeded train/valid/test split");
  split->add_option("--dataset", rc.dataset, "Dataset directory")->required();
  split->add_option("--valid", rc.valid, "Validation records");
  split->add_option("--test", rc.test, "Test records");
  split->add_option("--seed", rc.seed, "Sampling seed");
  split->add_option("--out", rc.out, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "MCC of predicted tags against gold tags");
  evaluate->add_option("--pred-mt", rc.pred_mt, "Predicted MT tags")->required();
  evaluate->add_option("--gold-mt", rc.gold_mt, "Gold MT tags")->required();
  evaluate->add_option("--pred-src", rc.pred_src, "Predicted source tags");
  evaluate->add_option("--gold-src", rc.gold_src, "Gold source tags");
  evaluate->add_option("--ter", rc.ter_file, "Per-record TER for per-range MCC");
  evaluate->add_flag("--split-gaps", rc.split_gaps, "Also report token-only and gap-only MCC");
  evaluate->add_option("--out", rc.out, "Write evaluation.json and evaluation.txt here");

  auto* translate = app.add_subcommand("mock-translate", "Run a translation backend over a file");
  translate->add_option("--in", rc.input, "Input lines")->required();
  translate->add_option("--backend", rc.backend, "Backend spec (default mock:seed=0)");
  translate->add_option("--direction", rc.direction, "src2tgt | tgt2src")
      ->check(CLI::IsMember({"src2tgt", "tgt2src"}));
  translate->add_option("--lang-pair", rc.lang_pair, "Language pair label");
  translate->add_option("--out", rc.out, "Write translations.txt here (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    if (e.get_exit_code() != 0) std::cerr << app.help();
    return kExitInput;
  }

  SetLogLevel(ParseLogLevel(rc.log_level));
  if (rc.jobs == 0) rc.jobs = std::max(1u, std::thread::hardware_concurrency());

  try {
    if (build_m->parsed()) return RunBuild(Strategy::kMonolingual, rc);
    if (build_p->parsed()) return RunBuild(Strategy::kParallel, rc);
    if (build_h->parsed()) return RunBuild(Strategy::kHybrid, rc);
    if (align_train->parsed()) return RunAlignTrain(rc);
    if (align->parsed()) return RunAlign(rc);
    if (tag->parsed()) return RunTag(rc);
    if (ter->parsed()) return RunTer(rc);
    if (stats->parsed()) return RunStats(rc);
    if (split->parsed()) return RunSplit(rc);
    if (evaluate->parsed()) return RunEvaluate(rc);
    if (translate->parsed()) return RunTranslate(rc);
  } catch (const InvariantError& e) {
    LogError("invariant violation", {{"error", e.what()}});
    return kExitInvariant;
  } catch (const InputError& e) {
    LogError("input error", {{"error", e.what()}});
    return kExitInput;
  } catch (const BackendError& e) {
    LogError("backend failure; rerun with the same --out to resume", {{"error", e.what()}});
    return kExitInput;
  } catch (const std::exception& e) {
    LogError("unexpected failure", {{"error", e.what()}});
    return kExitInvariant;
  }
  return kExitInput;
}

int RunCli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("qeforge");
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qeforge
