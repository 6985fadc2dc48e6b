#include "vulnforge/diff.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "vulnforge/error.hpp"

namespace vulnforge {

std::vector<TextLine> split_lines(std::string_view text) {
  std::vector<TextLine> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back({text.substr(pos), false});
      break;
    }
    lines.push_back({text.substr(pos, nl - pos), true});
    pos = nl + 1;
  }
  return lines;
}

namespace {

// Linear-space Myers over interned line ids. Marks lines of `a` that are
// deleted and lines of `b` that are inserted; unmarked lines form an LCS.
class MyersDiff {
 public:
  MyersDiff(const std::vector<int>& a, const std::vector<int>& b)
      : a_(a), b_(b), deleted_(a.size(), false), inserted_(b.size(), false) {
    compare(0, static_cast<int>(a.size()), 0, static_cast<int>(b.size()));
  }

  const std::vector<bool>& deleted() const { return deleted_; }
  const std::vector<bool>& inserted() const { return inserted_; }

 private:
  void compare(int a_lo, int a_hi, int b_lo, int b_hi) {
    while (a_lo < a_hi && b_lo < b_hi && a_[a_lo] == b_[b_lo]) {
      ++a_lo;
      ++b_lo;
    }
    while (a_lo < a_hi && b_lo < b_hi && a_[a_hi - 1] == b_[b_hi - 1]) {
      --a_hi;
      --b_hi;
    }
    if (a_lo == a_hi) {
      for (int j = b_lo; j < b_hi; ++j) inserted_[j] = true;
      return;
    }
    if (b_lo == b_hi) {
      for (int i = a_lo; i < a_hi; ++i) deleted_[i] = true;
      return;
    }
    bisect(a_lo, a_hi, b_lo, b_hi);
  }

  void bisect(int a_lo, int a_hi, int b_lo, int b_hi) {
    const int n = a_hi - a_lo;
    const int m = b_hi - b_lo;
    const int max_d = (n + m + 1) / 2;
    const int offset = max_d;
    const int length = 2 * max_d + 2;
    std::vector<int> forward(length, -1), backward(length, -1);
    forward[offset + 1] = 0;
    backward[offset + 1] = 0;
    const int delta = n - m;
    const bool odd = (delta % 2) != 0;
    int k1_start = 0, k1_end = 0, k2_start = 0, k2_end = 0;

    auto at = [&](int i) { return a_[a_lo + i]; };
    auto bt = [&](int j) { return b_[b_lo + j]; };

    for (int d = 0; d < max_d; ++d) {
      for (int k1 = -d + k1_start; k1 <= d - k1_end; k1 += 2) {
        const int k1_off = offset + k1;
        int x1 = (k1 == -d || (k1 != d && forward[k1_off - 1] < forward[k1_off + 1]))
                     ? forward[k1_off + 1]
                     : forward[k1_off - 1] + 1;
        int y1 = x1 - k1;
        while (x1 < n && y1 < m && at(x1) == bt(y1)) {
          ++x1;
          ++y1;
        }
        forward[k1_off] = x1;
        if (x1 > n) {
          k1_end += 2;
        } else if (y1 > m) {
          k1_start += 2;
        } else if (odd) {
          const int k2_off = offset + delta - k1;
          if (k2_off >= 0 && k2_off < length && backward[k2_off] != -1) {
            if (x1 >= n - backward[k2_off]) {
              split(a_lo, a_hi, b_lo, b_hi, x1, y1);
              return;
            }
          }
        }
      }
      for (int k2 = -d + k2_start; k2 <= d - k2_end; k2 += 2) {
        const int k2_off = offset + k2;
        int x2 = (k2 == -d || (k2 != d && backward[k2_off - 1] < backward[k2_off + 1]))
                     ? backward[k2_off + 1]
                     : backward[k2_off - 1] + 1;
        int y2 = x2 - k2;
        while (x2 < n && y2 < m && at(n - x2 - 1) == bt(m - y2 - 1)) {
          ++x2;
          ++y2;
        }
        backward[k2_off] = x2;
        if (x2 > n) {
          k2_end += 2;
        } else if (y2 > m) {
          k2_start += 2;
        } else if (!odd) {
          const int k1_off = offset + delta - k2;
          if (k1_off >= 0 && k1_off < length && forward[k1_off] != -1) {
            const int x1 = forward[k1_off];
            const int y1 = offset + x1 - k1_off;
            if (x1 >= n - x2) {
              split(a_lo, a_hi, b_lo, b_hi, x1, y1);
              return;
            }
          }
        }
      }
    }
    for (int i = a_lo; i < a_hi; ++i) deleted_[i] = true;
    for (int j = b_lo; j < b_hi; ++j) inserted_[j] = true;
  }

  void split(int a_lo, int a_hi, int b_lo, int b_hi, int x, int y) {
    compare(a_lo, a_lo + x, b_lo, b_lo + y);
    compare(a_lo + x, a_hi, b_lo + y, b_hi);
  }

  const std::vector<int>& a_;
  const std::vector<int>& b_;
  std::vector<bool> deleted_;
  std::vector<bool> inserted_;
};

struct Op {
  ChangeKind kind;
  int before_index;  // 0-based, valid for Delete/Context
  int after_index;   // 0-based, valid for Add/Context
};

std::vector<Op> edit_script(const std::vector<TextLine>& a, const std::vector<TextLine>& b) {
  std::unordered_map<std::string, int> ids;
  auto intern = [&](const TextLine& line) {
    std::string key(line.text);
    key.push_back(line.newline ? '\n' : '\0');
    return ids.emplace(std::move(key), static_cast<int>(ids.size())).first->second;
  };
  std::vector<int> av, bv;
  av.reserve(a.size());
  bv.reserve(b.size());
  for (const auto& l : a) av.push_back(intern(l));
  for (const auto& l : b) bv.push_back(intern(l));

  MyersDiff diff(av, bv);
  const auto& del = diff.deleted();
  const auto& ins = diff.inserted();

  // Within each change block, deletions precede insertions.
  std::vector<Op> ops;
  int i = 0, j = 0;
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  while (i < n || j < m) {
    if ((i < n && del[i]) || (j < m && ins[j])) {
      while (i < n && del[i]) ops.push_back({ChangeKind::Delete, i++, j});
      while (j < m && ins[j]) ops.push_back({ChangeKind::Add, i, j++});
    } else {
      ops.push_back({ChangeKind::Context, i++, j++});
    }
  }
  return ops;
}

}  // namespace

std::vector<Hunk> extract_hunks(std::string_view before, std::string_view after, int context) {
  const auto a = split_lines(before);
  const auto b = split_lines(after);
  const auto ops = edit_script(a, b);

  std::vector<Hunk> hunks;
  const int total = static_cast<int>(ops.size());
  int idx = 0;
  while (idx < total) {
    while (idx < total && ops[idx].kind == ChangeKind::Context) ++idx;
    if (idx == total) break;

    int first = std::max(0, idx - context);
    int last = idx;  // exclusive end of the hunk in ops
    int scan = idx;
    while (scan < total) {
      while (scan < total && ops[scan].kind != ChangeKind::Context) ++scan;
      last = scan;
      int next_change = scan;
      while (next_change < total && ops[next_change].kind == ChangeKind::Context) ++next_change;
      if (next_change == total || next_change - scan > 2 * context) {
        last = std::min(total, scan + context);
        break;
      }
      scan = next_change;
    }

    Hunk hunk;
    for (int k = first; k < last; ++k) {
      const Op& op = ops[k];
      LineChange lc;
      lc.kind = op.kind;
      if (op.kind == ChangeKind::Add) {
        lc.content = std::string(b[op.after_index].text);
        lc.newline = b[op.after_index].newline;
        lc.line_number = op.after_index + 1;
        ++hunk.after_len;
      } else {
        lc.content = std::string(a[op.before_index].text);
        lc.newline = a[op.before_index].newline;
        lc.line_number = op.before_index + 1;
        ++hunk.before_len;
        if (op.kind == ChangeKind::Context) ++hunk.after_len;
      }
      hunk.lines.push_back(std::move(lc));
    }
    const Op& head = ops[first];
    hunk.before_start = hunk.before_len == 0 ? head.before_index : head.before_index + 1;
    hunk.after_start = hunk.after_len == 0 ? head.after_index : head.after_index + 1;
    hunks.push_back(std::move(hunk));
    idx = last;
  }
  return hunks;
}

std::string apply_hunks(std::string_view before, const std::vector<Hunk>& hunks) {
  const auto a = split_lines(before);
  std::string out;
  out.reserve(before.size());
  std::size_t cursor = 0;
  auto emit = [&out](std::string_view text, bool newline) {
    out.append(text);
    if (newline) out.push_back('\n');
  };
  auto mismatch = [](int line) {
    throw Error(ErrorKind::InvariantViolation,
                "hunk does not apply at before-line " + std::to_string(line));
  };

  for (const auto& hunk : hunks) {
    const std::size_t start = hunk.before_len == 0 ? static_cast<std::size_t>(hunk.before_start)
                                                   : static_cast<std::size_t>(hunk.before_start - 1);
    if (start < cursor || start > a.size()) mismatch(hunk.before_start);
    for (; cursor < start; ++cursor) emit(a[cursor].text, a[cursor].newline);
    for (const auto& line : hunk.lines) {
      if (line.kind == ChangeKind::Add) {
        emit(line.content, line.newline);
        continue;
      }
      if (cursor >= a.size() || a[cursor].text != line.content || a[cursor].newline != line.newline)
        mismatch(static_cast<int>(cursor) + 1);
      if (line.kind == ChangeKind::Context) emit(a[cursor].text, a[cursor].newline);
      ++cursor;
    }
  }
  for (; cursor < a.size(); ++cursor) emit(a[cursor].text, a[cursor].newline);
  return out;
}

std::string render_unified(std::string_view path, const std::vector<Hunk>& hunks) {
  std::string out;
  out += "--- a/";
  out += path;
  out += "\n+++ b/";
  out += path;
  out += '\n';
  auto range = [](int start, int len) {
    std::string r = std::to_string(start);
    if (len != 1) r += "," + std::to_string(len);
    return r;
  };
  for (const auto& hunk : hunks) {
    out += "@@ -" + range(hunk.before_start, hunk.before_len) + " +" +
           range(hunk.after_start, hunk.after_len) + " @@\n";
    for (const auto& line : hunk.lines) {
      out.push_back(line.kind == ChangeKind::Add ? '+' : line.kind == ChangeKind::Delete ? '-' : ' ');
      out += line.content;
      out.push_back('\n');
      if (!line.newline) out += "\\ No newline at end of file\n";
    }
  }
  return out;
}

std::vector<int> deleted_lines(const std::vector<Hunk>& hunks) {
  std::vector<int> out;
  for (const auto& h : hunks)
    for (const auto& l : h.lines)
      if (l.kind == ChangeKind::Delete) out.push_back(l.line_number);
  return out;
}

std::vector<int> added_lines(const std::vector<Hunk>& hunks) {
  std::vector<int> out;
  for (const auto& h : hunks)
    for (const auto& l : h.lines)
      if (l.kind == ChangeKind::Add) out.push_back(l.line_number);
  return out;
}

}  // namespace vulnforge
