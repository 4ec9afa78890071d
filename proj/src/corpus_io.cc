#include "qeforge/corpus_io.h"

#include "qeforge/errors.h"

namespace qeforge {

LineReader::LineReader(const std::string& path) : path_(path), in_(path) {
  if (!in_) throw InputError("cannot read " + path);
}

bool LineReader::Next(std::string& line) {
  if (!std::getline(in_, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no_;
  return true;
}

LineWriter::LineWriter(const std::string& path) : path_(path), out_(path) {
  if (!out_) throw InputError("cannot write " + path);
}

void LineWriter::Write(const std::string& line) {
  out_ << line << '\n';
  ++lines_;
}

void LineWriter::Close() {
  out_.close();
  if (out_.fail()) throw InputError("error writing " + path_);
}

size_t CountLines(const std::string& path) {
  LineReader r(path);
  std::string line;
  while (r.Next(line)) {
  }
  return r.line_no();
}

std::vector<std::string> ReadLines(const std::string& path) {
  LineReader r(path);
  std::vector<std::string> out;
  std::string line;
  while (r.Next(line)) out.push_back(line);
  return out;
}

void WriteLines(const std::string& path, const std::vector<std::string>& lines) {
  LineWriter w(path);
  for (const auto& l : lines) w.Write(l);
  w.Close();
}

FilePairs::FilePairs(std::string source_path, std::string target_path,
                     bool prepare, TokenizeMode mode)
    : source_path_(std::move(source_path)),
      target_path_(std::move(target_path)),
      prepare_(prepare),
      mode_(mode) {}

void FilePairs::ForEach(const Visitor& visit) const {
  LineReader src(source_path_);
  LineReader tgt(target_path_);
  std::string s, t;
  while (true) {
    const bool has_s = src.Next(s);
    const bool has_t = tgt.Next(t);
    if (has_s != has_t) {
      throw InputError("line count mismatch between " + source_path_ + " and " +
                       target_path_);
    }
    if (!has_s) break;
    if (prepare_) {
      std::optional<std::pair<TokenSequence, TokenSequence>> pair;
      try {
        pair.emplace(Prepare(s, mode_), Prepare(t, mode_));
      } catch (const LineError&) {
        continue;  // unusable for aligner training
      }
      visit(pair->first, pair->second);
    } else {
      visit(Tokenize(s), Tokenize(t));
    }
  }
}

}  // namespace qeforge
