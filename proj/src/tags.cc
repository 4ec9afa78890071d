#include "qeforge/tags.h"

#include "qeforge/errors.h"

namespace qeforge {

std::string_view TagName(Tag t) { return t == Tag::kOk ? "OK" : "BAD"; }

Tag ParseTag(std::string_view s) {
  if (s == "OK") return Tag::kOk;
  if (s == "BAD") return Tag::kBad;
  throw InputError("unknown tag '" + std::string(s) + "'");
}

MtTagSequence::MtTagSequence(std::vector<Tag> tags) : tags_(std::move(tags)) {
  if (tags_.size() % 2 == 0) {
    throw InvariantError("MT tag sequence must have odd length (2N+1), got " +
                         std::to_string(tags_.size()));
  }
}

MtTagSequence AnnotateMtTags(const EditScript& script) {
  ValidateScript(script);
  MtTagSequence tags(script.mt_length);
  for (const EditOp& op : script.ops) {
    switch (op.kind) {
      case EditKind::kSubstitute:
      case EditKind::kDeleteFromMt:
        tags.set_token(*op.mt_index, Tag::kBad);
        break;
      case EditKind::kInsertIntoMt:
        tags.set_gap(op.gap, Tag::kBad);
        break;
      default:
        break;
    }
  }
  return tags;
}

SourceTagSequence ProjectSourceTags(const MtTagSequence& mt_tags,
                                    const AlignmentSet& alignment,
                                    size_t source_len) {
  alignment.CheckBounds(source_len, mt_tags.token_count());
  SourceTagSequence out(source_len, Tag::kOk);
  for (const auto& [s, t] : alignment) {
    if (mt_tags.token(t) == Tag::kBad) out[s] = Tag::kBad;
  }
  return out;
}

TagSet AnnotateWithScript(const EditScript& script, size_t source_len,
                          const AlignmentSet& alignment) {
  TagSet out;
  out.mt_tags = AnnotateMtTags(script);
  out.source_tags = ProjectSourceTags(out.mt_tags, alignment, source_len);
  out.alignment = alignment;
  return out;
}

TagSet AnnotateTriple(const TokenSequence& source, const TokenSequence& mt,
                      const TokenSequence& pe, const AlignmentSet& alignment) {
  return AnnotateWithScript(LevenshteinAlign(mt, pe), source.size(), alignment);
}

std::string FormatTags(const std::vector<Tag>& tags) {
  std::string out;
  for (size_t i = 0; i < tags.size(); ++i) {
    if (i) out += ' ';
    out += TagName(tags[i]);
  }
  return out;
}

std::vector<Tag> ParseTags(std::string_view line) {
  std::vector<Tag> out;
  size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    if (end > pos) out.push_back(ParseTag(line.substr(pos, end - pos)));
    pos = end;
  }
  return out;
}

}  // namespace qeforge
