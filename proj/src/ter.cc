#include "qeforge/ter.h"

#include <algorithm>
#include <cstdint>
#include <tuple>

#include "qeforge/errors.h"

namespace qeforge {
namespace {

bool SpanOccursIn(const TokenSequence& seq, size_t start, size_t len,
                  const TokenSequence& haystack) {
  if (len > haystack.size()) return false;
  for (size_t h = 0; h + len <= haystack.size(); ++h) {
    bool all = true;
    for (size_t k = 0; k < len && all; ++k) {
      all = seq[start + k] == haystack[h + k];
    }
    if (all) return true;
  }
  return false;
}

TokenSequence MoveSpan(const TokenSequence& seq, size_t start, size_t len,
                       size_t dest) {
  std::vector<std::string> rest;
  rest.reserve(seq.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    if (i < start || i >= start + len) rest.push_back(seq[i]);
  }
  std::vector<std::string> out(rest.begin(), rest.begin() + dest);
  for (size_t k = 0; k < len; ++k) out.push_back(seq[start + k]);
  out.insert(out.end(), rest.begin() + dest, rest.end());
  return TokenSequence(std::move(out));
}

std::string IndexField(const std::optional<size_t>& v) {
  return v ? std::to_string(*v) : std::string("-");
}

}  // namespace

size_t EditScript::Cost() const {
  return std::count_if(ops.begin(), ops.end(), [](const EditOp& op) {
    return op.kind != EditKind::kMatch;
  });
}

EditScript LevenshteinAlign(const TokenSequence& mt, const TokenSequence& pe) {
  const size_t n = mt.size();
  const size_t m = pe.size();
  const size_t width = m + 1;
  std::vector<uint32_t> d((n + 1) * width);
  auto at = [&](size_t i, size_t j) -> uint32_t& { return d[i * width + j]; };
  for (size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<uint32_t>(i);
  for (size_t j = 0; j <= m; ++j) at(0, j) = static_cast<uint32_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const uint32_t diag = at(i - 1, j - 1) + (mt[i - 1] == pe[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  EditScript script;
  script.mt_length = n;
  script.pe_length = m;
  size_t i = n;
  size_t j = m;
  while (i > 0 || j > 0) {
    const uint32_t here = at(i, j);
    EditOp op;
    if (i > 0 && j > 0 && mt[i - 1] == pe[j - 1] && at(i - 1, j - 1) == here) {
      op.kind = EditKind::kMatch;
    } else if (i > 0 && j > 0 && at(i - 1, j - 1) + 1 == here) {
      op.kind = EditKind::kSubstitute;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      op.kind = EditKind::kDeleteFromMt;
    } else {
      op.kind = EditKind::kInsertIntoMt;
    }
    switch (op.kind) {
      case EditKind::kMatch:
      case EditKind::kSubstitute:
        op.mt_index = --i;
        op.pe_index = --j;
        op.gap = i;
        break;
      case EditKind::kDeleteFromMt:
        op.mt_index = --i;
        op.gap = i;
        break;
      default:
        op.pe_index = --j;
        op.gap = i;
        break;
    }
    script.ops.push_back(op);
  }
  std::reverse(script.ops.begin(), script.ops.end());
  return script;
}

size_t LevenshteinCost(const TokenSequence& mt, const TokenSequence& pe) {
  std::vector<size_t> prev(pe.size() + 1);
  std::vector<size_t> cur(pe.size() + 1);
  for (size_t j = 0; j <= pe.size(); ++j) cur[j] = j;
  for (size_t i = 1; i <= mt.size(); ++i) {
    std::swap(prev, cur);
    cur[0] = i;
    for (size_t j = 1; j <= pe.size(); ++j) {
      cur[j] = std::min({prev[j - 1] + (mt[i - 1] == pe[j - 1] ? 0 : 1),
                         prev[j] + 1, cur[j - 1] + 1});
    }
  }
  return cur[pe.size()];
}

ShiftResult ShiftPhase(const TokenSequence& mt, const TokenSequence& pe,
                       const ShiftOptions& options) {
  ShiftResult result{mt, {}};
  size_t cost = LevenshteinCost(mt, pe);
  while (result.shifts.size() < options.max_shifts && cost > 0) {
    const TokenSequence& cur = result.shifted_mt;
    const size_t n = cur.size();
    // (gain, length, -start, -dest) ordering is emulated by explicit compares.
    size_t best_gain = 0, best_start = 0, best_len = 0, best_dest = 0;
    TokenSequence best_seq;
    for (size_t start = 0; start < n; ++start) {
      for (size_t len = 1; len <= options.max_span && start + len <= n; ++len) {
        // Tercom only moves phrases that exist in the reference.
        if (!SpanOccursIn(cur, start, len, pe)) break;
        for (size_t dest = 0; dest + len <= n; ++dest) {
          if (dest == start) continue;
          const size_t dist = dest > start ? dest - start : start - dest;
          if (dist > options.max_distance) continue;
          TokenSequence moved = MoveSpan(cur, start, len, dest);
          const size_t c = LevenshteinCost(moved, pe);
          if (c >= cost) continue;
          const size_t gain = cost - c;
          const bool better =
              gain > best_gain ||
              (gain == best_gain &&
               (len > best_len ||
                (len == best_len &&
                 std::tie(start, dest) < std::tie(best_start, best_dest))));
          if (better) {
            best_gain = gain;
            best_start = start;
            best_len = len;
            best_dest = dest;
            best_seq = std::move(moved);
          }
        }
      }
    }
    if (best_gain < 1) break;
    EditOp op;
    op.kind = EditKind::kShift;
    op.mt_index = best_start;
    op.length = best_len;
    op.gap = best_dest;
    result.shifts.push_back(op);
    result.shifted_mt = std::move(best_seq);
    cost -= best_gain;
  }
  return result;
}

TerResult TerScore(const TokenSequence& mt, const TokenSequence& pe,
                   bool shifts, const ShiftOptions& options) {
  if (pe.empty()) throw InputError("TER undefined for an empty reference");
  TerResult r;
  if (shifts) {
    ShiftResult s = ShiftPhase(mt, pe, options);
    r.shifts = std::move(s.shifts);
    r.shift_count = r.shifts.size();
    r.script = LevenshteinAlign(s.shifted_mt, pe);
  } else {
    r.script = LevenshteinAlign(mt, pe);
  }
  r.edit_count = r.shift_count + r.script.Cost();
  r.ref_length = pe.size();
  r.ter = static_cast<double>(r.edit_count) / static_cast<double>(r.ref_length);
  return r;
}

void ValidateScript(const EditScript& script) {
  size_t next_mt = 0;
  size_t next_pe = 0;
  for (const EditOp& op : script.ops) {
    const bool needs_mt = op.kind == EditKind::kMatch ||
                          op.kind == EditKind::kSubstitute ||
                          op.kind == EditKind::kDeleteFromMt;
    const bool needs_pe = op.kind == EditKind::kMatch ||
                          op.kind == EditKind::kSubstitute ||
                          op.kind == EditKind::kInsertIntoMt;
    if (op.kind == EditKind::kShift) {
      throw InvariantError("shift inside a monotone edit script");
    }
    if (needs_mt != op.mt_index.has_value() ||
        needs_pe != op.pe_index.has_value()) {
      throw InvariantError("edit op carries the wrong indices");
    }
    if (needs_mt && *op.mt_index != next_mt++) {
      throw InvariantError("MT indices not consecutive in edit script");
    }
    if (needs_pe && *op.pe_index != next_pe++) {
      throw InvariantError("PE indices not consecutive in edit script");
    }
    if (op.kind == EditKind::kInsertIntoMt && op.gap != next_mt) {
      throw InvariantError("insertion gap does not match MT position");
    }
  }
  if (next_mt != script.mt_length || next_pe != script.pe_length) {
    throw InvariantError("edit script does not cover both sequences");
  }
}

std::string_view EditKindName(EditKind kind) {
  switch (kind) {
    case EditKind::kMatch: return "Match";
    case EditKind::kSubstitute: return "Substitute";
    case EditKind::kInsertIntoMt: return "InsertIntoMt";
    case EditKind::kDeleteFromMt: return "DeleteFromMt";
    case EditKind::kShift: return "Shift";
  }
  return "?";
}

std::string SerializeOps(const std::vector<EditOp>& ops) {
  std::string out;
  for (size_t k = 0; k < ops.size(); ++k) {
    const EditOp& op = ops[k];
    if (k) out += ',';
    out += EditKindName(op.kind);
    out += ':';
    if (op.kind == EditKind::kShift) {
      out += std::to_string(*op.mt_index) + "-" +
             std::to_string(*op.mt_index + op.length - 1) + ":" +
             std::to_string(op.gap);
    } else {
      out += IndexField(op.mt_index) + ":" + IndexField(op.pe_index);
    }
  }
  return out;
}

std::string SerializeScript(const EditScript& script) {
  return SerializeOps(script.ops);
}

}  // namespace qeforge
