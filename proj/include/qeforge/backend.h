#ifndef QEFORGE_BACKEND_H_
#define QEFORGE_BACKEND_H_

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qeforge {

struct LanguagePair {
  std::string source = "ko";
  std::string target = "en";
};

enum class DirectionKind { kSourceToTarget, kTargetToSource };

struct Direction {
  DirectionKind kind = DirectionKind::kSourceToTarget;
  LanguagePair langs;

  // "ko-en" for source->target, "en-ko" for the reverse.
  std::string Label() const;
  Direction Inverse() const;
};

struct MockOptions {
  uint64_t seed = 0;
  double drop = 0.1;
  double swap = 0.05;
  double substitute = 0.1;
};

struct HttpOptions {
  std::string url;  // http://host:port/path
  std::string auth_header = "Authorization";
  std::string token_env = "QEFORGE_MT_TOKEN";
  size_t batch_size = 64;
  double timeout_seconds = 30.0;
  int retries = 3;
  double backoff_seconds = 0.2;
  size_t max_in_flight = 4;
};

struct BackendSpec {
  enum class Kind { kFile, kHttp, kMock };
  Kind kind = Kind::kMock;
  std::string src2tgt_path;  // file backend
  std::string tgt2src_path;
  HttpOptions http;
  MockOptions mock;

  // "mock:seed=42,drop=0.1", "file:src2tgt=a.tsv,tgt2src=b.tsv",
  // "http:url=http://host:8080/translate,batch=32". An http spec without url
  // falls back to $QEFORGE_MT_ENDPOINT.
  static BackendSpec Parse(std::string_view text);
  // Canonical form; Parse(ToString()) is the same spec.
  std::string ToString() const;
};

// One result per input line; nullopt marks a per-line failure.
using TranslationBatch = std::vector<std::optional<std::string>>;

class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  // line_nos holds the 1-based corpus line number of each line, in increasing
  // order. Backends that do not key on line numbers ignore it.
  virtual TranslationBatch TranslateBatch(std::span<const std::string> lines,
                                          const Direction& direction,
                                          std::span<const size_t> line_nos) = 0;
};

// Seeded token dropout, substitution and adjacent swaps. The output is a pure
// function of (seed, direction, line).
class MockBackend : public TranslationBackend {
 public:
  explicit MockBackend(MockOptions options);
  TranslationBatch TranslateBatch(std::span<const std::string> lines,
                                  const Direction& direction,
                                  std::span<const size_t> line_nos) override;
  std::string TranslateLine(const std::string& line,
                            const Direction& direction) const;

 private:
  MockOptions options_;
  std::vector<std::string> vocabulary_;
};

// Precomputed translations in `lineNo<TAB>translation` files, one per
// direction. Lookups are sequential scans with rewind, so the table is never
// held in memory.
class FileBackend : public TranslationBackend {
 public:
  FileBackend(std::string src2tgt_path, std::string tgt2src_path);
  TranslationBatch TranslateBatch(std::span<const std::string> lines,
                                  const Direction& direction,
                                  std::span<const size_t> line_nos) override;

 private:
  struct Cursor {
    std::string path;
    std::ifstream in;
    size_t last_line_no = 0;
    std::optional<std::pair<size_t, std::string>> peeked;
  };
  std::optional<std::string> Lookup(Cursor& cursor, size_t line_no);
  Cursor src2tgt_;
  Cursor tgt2src_;
};

// POSTs {"direction": label, "lines": [...]} and expects {"lines": [...]}.
// Sub-batches of batch_size run up to max_in_flight at a time and are
// re-sequenced; 5xx and transport failures are retried with exponential
// backoff before a BackendError is thrown.
class HttpBackend : public TranslationBackend {
 public:
  explicit HttpBackend(HttpOptions options);
  TranslationBatch TranslateBatch(std::span<const std::string> lines,
                                  const Direction& direction,
                                  std::span<const size_t> line_nos) override;

 private:
  std::vector<std::string> PostWithRetry(std::span<const std::string> lines,
                                         const std::string& direction) const;
  HttpOptions options_;
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
};

std::unique_ptr<TranslationBackend> MakeBackend(const BackendSpec& spec);

// Wraps a backend with an append-only checkpoint file in the file-backend
// TSV format. Lines already present in the checkpoint are served from it, so
// a run that aborted on a BackendError resumes where it stopped. Requests
// must arrive in increasing line order.
class CheckpointedTranslator {
 public:
  CheckpointedTranslator(TranslationBackend& backend, Direction direction,
                         std::string checkpoint_path, size_t flush_every);
  ~CheckpointedTranslator();

  TranslationBatch Translate(std::span<const std::string> lines,
                             std::span<const size_t> line_nos);
  size_t resumed_lines() const { return resumed_; }
  void Flush();

 private:
  TranslationBackend& backend_;
  Direction direction_;
  std::string path_;
  size_t flush_every_;
  bool ReadSaved();

  std::string previous_path_;
  std::ifstream previous_;
  std::optional<std::pair<size_t, std::optional<std::string>>> saved_;
  size_t resumed_ = 0;
  std::ofstream out_;
  size_t unflushed_ = 0;
};

}  // namespace qeforge

#endif  // QEFORGE_BACKEND_H_
