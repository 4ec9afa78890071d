#ifndef QEFORGE_CORPUS_IO_H_
#define QEFORGE_CORPUS_IO_H_

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qeforge/aligner.h"
#include "qeforge/text.h"

namespace qeforge {

// Reads a UTF-8 text file line by line, dropping a trailing '\r'.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  // Returns false at end of file.
  bool Next(std::string& line);
  size_t line_no() const { return line_no_; }  // 1-based, of the last line read
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  size_t line_no_ = 0;
};

class LineWriter {
 public:
  explicit LineWriter(const std::string& path);
  void Write(const std::string& line);
  void Close();
  size_t lines() const { return lines_; }

 private:
  std::string path_;
  std::ofstream out_;
  size_t lines_ = 0;
};

size_t CountLines(const std::string& path);
std::vector<std::string> ReadLines(const std::string& path);
void WriteLines(const std::string& path, const std::vector<std::string>& lines);

// Line-aligned (source, target) files, re-read on every pass.
class FilePairs : public PairCorpus {
 public:
  // With `prepare` set, lines are normalized and tokenized in `mode`;
  // otherwise they are treated as canonical space-separated tokens.
  FilePairs(std::string source_path, std::string target_path,
            bool prepare = false, TokenizeMode mode = TokenizeMode::kWhitespace);
  void ForEach(const Visitor& visit) const override;

 private:
  std::string source_path_;
  std::string target_path_;
  bool prepare_;
  TokenizeMode mode_;
};

}  // namespace qeforge

#endif  // QEFORGE_CORPUS_IO_H_
