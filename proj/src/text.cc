#include "qeforge/text.h"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <string_view>

#include "qeforge/errors.h"

namespace qeforge {
namespace {

constexpr std::string_view kSplitPunct = ".,!?;:\"()";

bool IsSpace(UChar32 c) { return u_isUWhiteSpace(c) || c == 0x200B; }

bool ContainsSpace(std::string_view s) {
  int32_t i = 0;
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c >= 0 && IsSpace(c)) return true;
  }
  return false;
}

void AppendPunctSplit(std::string_view word, std::vector<std::string>& out) {
  size_t lo = 0;
  size_t hi = word.size();
  while (lo < hi && kSplitPunct.find(word[lo]) != std::string_view::npos) {
    out.emplace_back(1, word[lo]);
    ++lo;
  }
  std::vector<std::string> trailing;
  while (hi > lo && kSplitPunct.find(word[hi - 1]) != std::string_view::npos) {
    trailing.emplace_back(1, word[hi - 1]);
    --hi;
  }
  if (hi > lo) out.emplace_back(word.substr(lo, hi - lo));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace

TokenSequence::TokenSequence(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.empty()) throw InvariantError("empty token in TokenSequence");
    if (ContainsSpace(t)) {
      throw InvariantError("token contains whitespace: '" + t + "'");
    }
  }
}

TokenSequence::TokenSequence(std::initializer_list<std::string> tokens)
    : TokenSequence(std::vector<std::string>(tokens)) {}

std::string TokenSequence::Join() const {
  std::string out;
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out += ' ';
    out += tokens_[i];
  }
  return out;
}

bool IsValidUtf8(std::string_view s) {
  int32_t i = 0;
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto n = static_cast<int32_t>(s.size());
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0) return false;
  }
  return true;
}

std::string Normalize(std::string_view raw) {
  if (!IsValidUtf8(raw)) throw LineError("invalid UTF-8");

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw InvariantError("ICU NFC normalizer unavailable");
  icu::UnicodeString composed = nfc->normalize(
      icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), raw.size())),
      status);
  if (U_FAILURE(status)) throw LineError("NFC normalization failed");

  icu::UnicodeString cleaned;
  bool pending_space = false;
  for (int32_t i = 0; i < composed.length();) {
    const UChar32 c = composed.char32At(i);
    i += U16_LENGTH(c);
    if (IsSpace(c)) {
      pending_space = true;
      continue;
    }
    if (u_charType(c) == U_CONTROL_CHAR || c == 0xFEFF) continue;
    if (pending_space && !cleaned.isEmpty()) cleaned.append(UChar32{' '});
    pending_space = false;
    cleaned.append(c);
  }
  std::string out;
  cleaned.toUTF8String(out);
  return out;
}

TokenSequence Tokenize(std::string_view line, TokenizeMode mode) {
  std::vector<std::string> tokens;
  const auto* p = reinterpret_cast<const uint8_t*>(line.data());
  const auto n = static_cast<int32_t>(line.size());
  int32_t start = -1;
  auto flush = [&](int32_t end) {
    if (start < 0) return;
    std::string_view word = line.substr(start, end - start);
    if (mode == TokenizeMode::kPunctSplit) {
      AppendPunctSplit(word, tokens);
    } else {
      tokens.emplace_back(word);
    }
    start = -1;
  };
  for (int32_t i = 0; i < n;) {
    const int32_t at = i;
    UChar32 c;
    U8_NEXT(p, i, n, c);
    if (c < 0) throw LineError("invalid UTF-8");
    if (IsSpace(c)) {
      flush(at);
    } else if (start < 0) {
      start = at;
    }
  }
  flush(n);
  return TokenSequence(std::move(tokens));
}

TokenSequence Lowercase(const TokenSequence& seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (const auto& t : seq) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(t);
    u.toLower(icu::Locale::getRoot());
    std::string s;
    u.toUTF8String(s);
    out.push_back(std::move(s));
  }
  return TokenSequence(std::move(out));
}

TokenSequence Prepare(std::string_view raw, TokenizeMode mode) {
  return Tokenize(Normalize(raw), mode);
}

TokenizeMode ParseTokenizeMode(std::string_view name) {
  if (name == "whitespace") return TokenizeMode::kWhitespace;
  if (name == "punct-split") return TokenizeMode::kPunctSplit;
  throw InputError("unknown tokenize mode: " + std::string(name));
}

std::string_view TokenizeModeName(TokenizeMode mode) {
  return mode == TokenizeMode::kWhitespace ? "whitespace" : "punct-split";
}

}  // namespace qeforge
