#ifndef QEFORGE_TER_H_
#define QEFORGE_TER_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qeforge/text.h"

namespace qeforge {

// Edits are stated as transforming the MT output into the post-edit.
//   kMatch, kSubstitute: both indices set.
//   kInsertIntoMt: a PE word the MT output lacks; pe_index set, gap is the
//     number of MT tokens preceding the missing word.
//   kDeleteFromMt: an extra MT word; mt_index set.
//   kShift: block move of MT tokens [mt_index, mt_index + length) so that the
//     block starts at `gap` in the sequence with the block removed.
enum class EditKind { kMatch, kSubstitute, kInsertIntoMt, kDeleteFromMt, kShift };

struct EditOp {
  EditKind kind = EditKind::kMatch;
  std::optional<size_t> mt_index;
  std::optional<size_t> pe_index;
  size_t gap = 0;
  size_t length = 0;

  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct EditScript {
  std::vector<EditOp> ops;
  size_t mt_length = 0;
  size_t pe_length = 0;

  // Number of non-match operations.
  size_t Cost() const;
};

struct TerResult {
  size_t edit_count = 0;
  size_t ref_length = 0;
  double ter = 0.0;
  size_t shift_count = 0;
  std::vector<EditOp> shifts;
  // Monotone script between the (possibly shifted) MT output and the PE.
  EditScript script;
};

struct ShiftResult {
  TokenSequence shifted_mt;
  std::vector<EditOp> shifts;
};

struct ShiftOptions {
  size_t max_shifts = 10;
  size_t max_span = 10;
  size_t max_distance = 50;
};

// Minimal-cost monotone alignment under unit costs. Backtrace prefers
// Match, then Substitute, then DeleteFromMt, then InsertIntoMt.
EditScript LevenshteinAlign(const TokenSequence& mt, const TokenSequence& pe);

// Cost only; O(min) memory.
size_t LevenshteinCost(const TokenSequence& mt, const TokenSequence& pe);

// Greedy block shifts. Each step takes the move with the largest reduction of
// the Levenshtein cost (ties: longer span, then leftmost origin, then
// leftmost destination) and stops when no move gains at least 1.
ShiftResult ShiftPhase(const TokenSequence& mt, const TokenSequence& pe,
                       const ShiftOptions& options = {});

// Throws InputError when pe is empty (the score is undefined).
TerResult TerScore(const TokenSequence& mt, const TokenSequence& pe,
                   bool shifts, const ShiftOptions& options = {});

// Checks the per-side coverage invariants of a monotone script.
void ValidateScript(const EditScript& script);

// Comma-separated `kind:mtIdx:peIdx`, `-` for an absent index. Shifts are
// written as `Shift:<first>-<last>:<destination>`.
std::string SerializeOps(const std::vector<EditOp>& ops);
std::string SerializeScript(const EditScript& script);

std::string_view EditKindName(EditKind kind);

}  // namespace qeforge

#endif  // QEFORGE_TER_H_
