#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vulnforge/types.hpp"

namespace vulnforge {

struct TextLine {
  std::string_view text;  // without the terminator
  bool newline = true;
};

/// Splits into lines; a trailing unterminated fragment becomes a line with
/// newline = false. "" yields no lines.
std::vector<TextLine> split_lines(std::string_view text);

/// Minimal line diff (Myers, linear space) grouped into hunks with
/// `context` lines of surrounding context, following git's header
/// conventions (an empty side starts at the line preceding it).
std::vector<Hunk> extract_hunks(std::string_view before, std::string_view after, int context = 3);

/// Replays hunks over `before`. Throws Error{InvariantViolation} when a
/// context or deleted line does not match.
std::string apply_hunks(std::string_view before, const std::vector<Hunk>& hunks);

/// Unified-diff text of a single file's hunks.
std::string render_unified(std::string_view path, const std::vector<Hunk>& hunks);

/// Line numbers (before version) of Delete lines.
std::vector<int> deleted_lines(const std::vector<Hunk>& hunks);
/// Line numbers (after version) of Add lines.
std::vector<int> added_lines(const std::vector<Hunk>& hunks);

}  // namespace vulnforge
