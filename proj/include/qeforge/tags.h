#ifndef QEFORGE_TAGS_H_
#define QEFORGE_TAGS_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qeforge/aligner.h"
#include "qeforge/ter.h"
#include "qeforge/text.h"

namespace qeforge {

enum class Tag : unsigned char { kOk, kBad };

std::string_view TagName(Tag t);
Tag ParseTag(std::string_view s);

// 2N + 1 tags for N MT tokens: gap 0, token 1, gap 1, ..., token N, gap N.
// Position 2k is gap k; position 2k - 1 is token k (1-based k).
class MtTagSequence {
 public:
  explicit MtTagSequence(size_t mt_tokens)
      : tags_(2 * mt_tokens + 1, Tag::kOk) {}
  // Throws InvariantError unless tags.size() is odd.
  explicit MtTagSequence(std::vector<Tag> tags);

  size_t token_count() const { return tags_.size() / 2; }
  Tag token(size_t k) const { return tags_[2 * k + 1]; }  // 0-based token
  Tag gap(size_t g) const { return tags_[2 * g]; }
  void set_token(size_t k, Tag t) { tags_[2 * k + 1] = t; }
  void set_gap(size_t g, Tag t) { tags_[2 * g] = t; }

  const std::vector<Tag>& tags() const { return tags_; }
  size_t size() const { return tags_.size(); }

 private:
  std::vector<Tag> tags_;
};

using SourceTagSequence = std::vector<Tag>;

struct TagSet {
  MtTagSequence mt_tags{0};
  SourceTagSequence source_tags;
  AlignmentSet alignment;
};

// Token k is BAD iff it is substituted or has no PE counterpart; gap g is BAD
// iff at least one PE word is missing between MT tokens g and g + 1.
MtTagSequence AnnotateMtTags(const EditScript& script);

// Source token i is BAD iff it links to an MT token tagged BAD.
SourceTagSequence ProjectSourceTags(const MtTagSequence& mt_tags,
                                    const AlignmentSet& alignment,
                                    size_t source_len);

TagSet AnnotateTriple(const TokenSequence& source, const TokenSequence& mt,
                      const TokenSequence& pe, const AlignmentSet& alignment);

// Same as AnnotateTriple but reuses an already computed monotone script.
TagSet AnnotateWithScript(const EditScript& script, size_t source_len,
                          const AlignmentSet& alignment);

std::string FormatTags(const std::vector<Tag>& tags);
std::vector<Tag> ParseTags(std::string_view line);

}  // namespace qeforge

#endif  // QEFORGE_TAGS_H_
