#pragma once

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

/**
 * @file schema.hpp
 * @brief Parsing of structured multi-strategy completions.
 *
 * A completion is expected to look like
 *
 *   <strategy id="1">
 *     <reasoning> ... </reasoning>
 *     <strategy_outcome> ... </strategy_outcome>
 *   </strategy>
 *   ...
 *   <final_answer> ... </final_answer>
 *
 * The parser is total: malformed input yields fewer (or no) blocks, never an
 * error. Tag names are case-insensitive and attributes are ignored.
 *
 * Final answer priority: <final_answer> over <answer> over the outcome of the
 * last block whose outcome is nonempty.
 */

#include "canonical.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semdiv {

struct RawCompletion {
  std::string text;              ///< preprocessed completion
  std::size_t token_count = 0;   ///< tokens under the configured tokenizer
};

struct StrategyBlock {
  std::size_t index = 0;   ///< 1-based, document order
  std::string reasoning;
  std::string outcome;
  bool valid = false;
};

struct ParsedCompletion {
  std::vector<StrategyBlock> blocks;
  std::optional<std::string> final_answer;
  std::size_t n_strat = 0;  ///< number of valid blocks
  RawCompletion source;

  bool has_final() const { return final_answer.has_value(); }
  bool complete() const { return has_final() && n_strat > 0; }
};

using TokenCounter = std::function<std::size_t(std::string_view)>;

struct ParseOptions {
  std::size_t max_strategies = 16;
  TokenCounter count_tokens;  ///< empty → count_tokens_default
};

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// Whitespace-plus-punctuation tokenizer: each maximal run of alphanumerics
/// (bytes >= 0x80 count as alphanumeric) is one token, every other
/// non-space byte is a token of its own.
inline std::size_t count_tokens_default(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      in_word = false;
    } else if (std::isalnum(c) || c >= 0x80) {
      if (!in_word) ++n;
      in_word = true;
    } else {
      ++n;
      in_word = false;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim_copy(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(from, pos);
    if (hit == std::string::npos) break;
    out.append(s, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  out.append(s, pos, std::string::npos);
  s = std::move(out);
}

struct Substitution {
  std::string_view from;
  std::string_view to;
};

// UTF-8 punctuation and spacing mapped onto ASCII.
inline constexpr Substitution kPunctuation[] = {
    {"\xE2\x80\x98", "'"},   {"\xE2\x80\x99", "'"},  {"\xE2\x80\x9A", "'"},
    {"\xE2\x80\x9B", "'"},   {"\xE2\x80\xB2", "'"},  {"\xE2\x80\x9C", "\""},
    {"\xE2\x80\x9D", "\""},  {"\xE2\x80\x9E", "\""}, {"\xE2\x80\x9F", "\""},
    {"\xC2\xAB", "\""},      {"\xC2\xBB", "\""},     {"\xE2\x80\x90", "-"},
    {"\xE2\x80\x91", "-"},   {"\xE2\x80\x92", "-"},  {"\xE2\x80\x93", "-"},
    {"\xE2\x80\x94", "-"},   {"\xE2\x80\x95", "-"},  {"\xE2\x88\x92", "-"},
    {"\xE2\x80\xA6", "..."}, {"\xC2\xA0", " "},      {"\xE2\x80\x89", " "},
    {"\xE2\x80\xAF", " "},   {"\xE3\x80\x80", " "},
};

// Removes ``` fence markers (with an optional language tag) and ** emphasis.
inline std::string strip_markup(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 3, "```") == 0) {
      i += 3;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' ||
                              s[i] == '+' || s[i] == '-')) {
        ++i;
      }
      continue;
    }
    if (s.compare(i, 2, "**") == 0) {
      i += 2;
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t newlines = 0;
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\r') {
      if (i + 1 < s.size() && s[i + 1] == '\n') continue;
      c = '\n';
    }
    if (c == ' ' || c == '\t' || c == '\f' || c == '\v') {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
      newlines = 0;
    }
    if (c == '\n') {
      if (++newlines > 2) continue;
    } else {
      newlines = 0;
    }
    out.push_back(c);
  }
  if (pending_space) out.push_back(' ');
  return out;
}

inline std::string preprocess_once(std::string_view text) {
  std::string s(text);
  for (const auto& sub : kPunctuation) replace_all(s, sub.from, sub.to);
  s = strip_markup(s);
  s = collapse_whitespace(s);
  return trim_copy(s);
}

}  // namespace detail

/// Normalizes punctuation and whitespace and strips stray markup. Applied to
/// a fixpoint, so preprocess(preprocess(x)) == preprocess(x).
inline std::string preprocess(std::string_view text) {
  std::string cur = detail::preprocess_once(text);
  // Each pass either shortens the string or leaves it unchanged.
  while (true) {
    std::string next = detail::preprocess_once(cur);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Tag scanning
// ---------------------------------------------------------------------------

namespace detail {

struct TagSpan {
  std::size_t begin = 0;  ///< position of '<'
  std::size_t end = 0;    ///< one past '>'
};

inline bool iequals_at(std::string_view s, std::size_t pos, std::string_view name) {
  if (pos + name.size() > s.size()) return false;
  for (std::size_t k = 0; k < name.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[pos + k])) !=
        std::tolower(static_cast<unsigned char>(name[k]))) {
      return false;
    }
  }
  return true;
}

inline bool is_space_char(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Matches `<name>` or `<name attr...>` (not self-closing) starting at `lt`.
inline std::optional<TagSpan> match_open(std::string_view s, std::size_t lt, std::string_view name) {
  std::size_t j = lt + 1;
  while (j < s.size() && is_space_char(s[j])) ++j;
  if (!iequals_at(s, j, name)) return std::nullopt;
  j += name.size();
  if (j >= s.size()) return std::nullopt;
  if (s[j] == '>') return TagSpan{lt, j + 1};
  if (!is_space_char(s[j])) return std::nullopt;
  while (j < s.size() && s[j] != '>' && s[j] != '<') ++j;
  if (j >= s.size() || s[j] != '>') return std::nullopt;
  if (s[j - 1] == '/') return std::nullopt;
  return TagSpan{lt, j + 1};
}

inline std::optional<TagSpan> match_close(std::string_view s, std::size_t lt, std::string_view name) {
  std::size_t j = lt + 1;
  while (j < s.size() && is_space_char(s[j])) ++j;
  if (j >= s.size() || s[j] != '/') return std::nullopt;
  ++j;
  while (j < s.size() && is_space_char(s[j])) ++j;
  if (!iequals_at(s, j, name)) return std::nullopt;
  j += name.size();
  while (j < s.size() && is_space_char(s[j])) ++j;
  if (j >= s.size() || s[j] != '>') return std::nullopt;
  return TagSpan{lt, j + 1};
}

inline std::optional<TagSpan> find_open(std::string_view s, std::string_view name, std::size_t from) {
  for (std::size_t lt = s.find('<', from); lt != std::string_view::npos; lt = s.find('<', lt + 1)) {
    if (auto hit = match_open(s, lt, name)) return hit;
  }
  return std::nullopt;
}

inline std::optional<TagSpan> find_close(std::string_view s, std::string_view name, std::size_t from) {
  for (std::size_t lt = s.find('<', from); lt != std::string_view::npos; lt = s.find('<', lt + 1)) {
    if (auto hit = match_close(s, lt, name)) return hit;
  }
  return std::nullopt;
}

/// Trimmed content of the first well-formed `<name>...</name>` element, or
/// nullopt when there is none.
inline std::optional<std::string> first_element(std::string_view s, std::string_view name) {
  std::size_t from = 0;
  while (auto open = find_open(s, name, from)) {
    auto close = find_close(s, name, open->end);
    if (!close) return std::nullopt;
    // An opening tag of the same name before the close makes the first one
    // unterminated; retry from the later opening.
    auto reopen = find_open(s, name, open->end);
    if (reopen && reopen->begin < close->begin) {
      from = reopen->begin;
      continue;
    }
    return trim_copy(s.substr(open->end, close->begin - open->end));
  }
  return std::nullopt;
}

}  // namespace detail

/// Well-formed `<strategy>` regions in document order, at most
/// `max_strategies`. Within a block the first `<reasoning>` and first
/// `<strategy_outcome>` win; missing fields are left empty.
inline std::vector<StrategyBlock> parse_strategies(std::string_view text,
                                                   std::size_t max_strategies = 16) {
  std::vector<StrategyBlock> blocks;
  std::size_t pos = 0;
  while (blocks.size() < max_strategies) {
    auto open = detail::find_open(text, "strategy", pos);
    if (!open) break;
    auto close = detail::find_close(text, "strategy", open->end);
    if (!close) break;
    auto reopen = detail::find_open(text, "strategy", open->end);
    if (reopen && reopen->begin < close->begin) {
      pos = reopen->begin;  // unterminated block, no nesting
      continue;
    }
    const std::string_view body = text.substr(open->end, close->begin - open->end);
    StrategyBlock block;
    block.index = blocks.size() + 1;
    block.reasoning = detail::first_element(body, "reasoning").value_or("");
    block.outcome = detail::first_element(body, "strategy_outcome").value_or("");
    block.valid = !block.reasoning.empty() && !block.outcome.empty();
    blocks.push_back(std::move(block));
    pos = close->end;
  }
  return blocks;
}

/// FA ≻ ANS ≻ outcome of the last block with a nonempty outcome.
inline std::optional<std::string> extract_final_answer(std::string_view text,
                                                       const std::vector<StrategyBlock>& blocks) {
  if (auto fa = detail::first_element(text, "final_answer"); fa && !fa->empty()) return fa;
  if (auto ans = detail::first_element(text, "answer"); ans && !ans->empty()) return ans;
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (!it->outcome.empty()) return it->outcome;
  }
  return std::nullopt;
}

inline ParsedCompletion parse(std::string_view text, const ParseOptions& options = {}) {
  ParsedCompletion out;
  out.source.text = preprocess(text);
  out.source.token_count = options.count_tokens ? options.count_tokens(out.source.text)
                                                : count_tokens_default(out.source.text);
  out.blocks = parse_strategies(out.source.text, options.max_strategies);
  out.final_answer = extract_final_answer(out.source.text, out.blocks);
  out.n_strat = static_cast<std::size_t>(
      std::count_if(out.blocks.begin(), out.blocks.end(), [](const auto& b) { return b.valid; }));
  return out;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// One block to render. A disengaged field omits the inner tag entirely.
struct BlockSpec {
  std::optional<std::string> reasoning;
  std::optional<std::string> outcome;
};

struct CompletionSpec {
  std::vector<BlockSpec> blocks;
  std::optional<std::string> final_answer;
};

/// Renders a completion in the canonical schema layout.
inline std::string render(const CompletionSpec& spec) {
  std::string out;
  std::size_t id = 1;
  for (const auto& b : spec.blocks) {
    out += "<strategy id=\"" + std::to_string(id++) + "\">\n";
    if (b.reasoning) out += "<reasoning>" + *b.reasoning + "</reasoning>\n";
    if (b.outcome) out += "<strategy_outcome>" + *b.outcome + "</strategy_outcome>\n";
    out += "</strategy>\n";
  }
  if (spec.final_answer) out += "<final_answer>" + *spec.final_answer + "</final_answer>\n";
  return out;
}

}  // namespace semdiv
