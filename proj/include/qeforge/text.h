#ifndef QEFORGE_TEXT_H_
#define QEFORGE_TEXT_H_

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace qeforge {

// A tokenized sentence. Tokens are never empty and never contain whitespace,
// so Join() followed by whitespace tokenization reproduces the sequence.
class TokenSequence {
 public:
  TokenSequence() = default;
  // Throws InvariantError if any token is empty or contains whitespace.
  explicit TokenSequence(std::vector<std::string> tokens);
  TokenSequence(std::initializer_list<std::string> tokens);

  size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](size_t i) const { return tokens_[i]; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  // Tokens separated by single spaces.
  std::string Join() const;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

enum class TokenizeMode { kWhitespace, kPunctSplit };

// NFC-normalizes a UTF-8 line, drops control characters, converts every
// whitespace run to one space and trims both ends. Throws LineError when the
// input is not valid UTF-8.
std::string Normalize(std::string_view raw);

// Splits a normalized line. kPunctSplit also peels the marks . , ! ? ; : " ( )
// off the front and back of every whitespace token.
TokenSequence Tokenize(std::string_view line,
                       TokenizeMode mode = TokenizeMode::kWhitespace);

// Unicode lower-casing of every token (root locale).
TokenSequence Lowercase(const TokenSequence& seq);

// Normalize + Tokenize.
TokenSequence Prepare(std::string_view raw, TokenizeMode mode);

bool IsValidUtf8(std::string_view s);

TokenizeMode ParseTokenizeMode(std::string_view name);
std::string_view TokenizeModeName(TokenizeMode mode);

}  // namespace qeforge

#endif  // QEFORGE_TEXT_H_
