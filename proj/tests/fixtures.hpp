// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The semdiv Authors

// Deterministic fixture corpora shared by the unit and acceptance suites.

#pragma once

#include <semdiv/schema.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

struct RoundTrip {
  semdiv::CompletionSpec spec;
  std::string text;
  std::vector<semdiv::StrategyBlock> blocks;  // expected
  std::optional<std::string> final_answer;    // expected
  std::size_t n_strat = 0;                    // expected
};

inline std::string random_phrase(std::mt19937_64& rng, std::size_t max_words) {
  static const std::vector<std::string> lexicon = {
      "add",   "the",  "two",     "numbers", "then", "divide", "by", "3",   "x=2", "$1,234", "3.5",
      "sum",   "of",   "squares", "check",   "mod",  "7",      "(a+b)", "so", "we", "get",    "-4"};
  std::uniform_int_distribution<std::size_t> count(1, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
  std::string out;
  for (std::size_t i = 0, n = count(rng); i < n; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += lexicon[pick(rng)];
  }
  return out;
}

// Renderer-generated completions with their expected parse, derived from the
// schema rules alone: fields present verbatim, validity = both nonempty, final answer
// = FA if nonempty else the last nonempty outcome.
inline std::vector<RoundTrip> round_trips(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_blocks(0, 6);
  std::uniform_int_distribution<int> field(0, 9);
  std::vector<RoundTrip> out;
  for (std::size_t i = 0; i < n; ++i) {
    RoundTrip f;
    const int m = n_blocks(rng);
    for (int b = 0; b < m; ++b) {
      semdiv::BlockSpec block;
      const int r = field(rng);
      if (r >= 2) block.reasoning = random_phrase(rng, 8);
      else if (r == 1) block.reasoning = "";
      const int o = field(rng);
      if (o >= 2) block.outcome = std::to_string(std::uniform_int_distribution<int>(-50, 500)(rng));
      else if (o == 1) block.outcome = "";
      f.spec.blocks.push_back(block);

      semdiv::StrategyBlock expected;
      expected.index = static_cast<std::size_t>(b + 1);
      expected.reasoning = block.reasoning.value_or("");
      expected.outcome = block.outcome.value_or("");
      expected.valid = !expected.reasoning.empty() && !expected.outcome.empty();
      f.n_strat += expected.valid ? 1 : 0;
      f.blocks.push_back(expected);
    }
    const int fa = field(rng);
    if (fa >= 4) f.spec.final_answer = std::to_string(std::uniform_int_distribution<int>(0, 999)(rng));
    else if (fa == 3) f.spec.final_answer = "";
    if (f.spec.final_answer && !f.spec.final_answer->empty()) {
      f.final_answer = f.spec.final_answer;
    } else {
      for (auto it = f.blocks.rbegin(); it != f.blocks.rend(); ++it) {
        if (!it->outcome.empty()) {
          f.final_answer = it->outcome;
          break;
        }
      }
    }
    f.text = semdiv::render(f.spec);
    out.push_back(std::move(f));
  }
  return out;
}

struct PriorityCase {
  std::string text;
  std::string expected;
};

// Every case carries a final-answer tag, an answer tag and strategy outcomes;
// the final-answer content must win regardless of order, case or attributes.
inline std::vector<PriorityCase> priority_cases() {
  const std::string blocks =
      "<strategy id=\"1\"><reasoning>try a</reasoning><strategy_outcome>11</strategy_outcome></strategy>\n"
      "<strategy id=\"2\"><reasoning>try b</reasoning><strategy_outcome>13</strategy_outcome></strategy>\n";
  return {
      {blocks + "<answer>7</answer>\n<final_answer>42</final_answer>", "42"},
      {"<final_answer>42</final_answer>\n" + blocks + "<answer>7</answer>", "42"},
      {"<answer>7</answer>" + blocks + "<FINAL_ANSWER>42</FINAL_ANSWER>", "42"},
      {blocks + "<final_answer type=\"num\">42</final_answer><answer>7</answer>", "42"},
      {blocks + "<answer>7</answer><final_answer>  42  </final_answer>", "42"},
      {blocks + "<final_answer>first</final_answer><final_answer>second</final_answer><answer>7</answer>", "first"},
      {"<answer>7</answer><answer>8</answer>" + blocks + "<final_answer>-3.5</final_answer>", "-3.5"},
      {"<strategy><reasoning>r</reasoning><strategy_outcome><answer>9</answer></strategy_outcome></strategy>"
       "<final_answer>42</final_answer>",
       "42"},
  };
}

struct FuzzCase {
  std::string text;
  std::string gold;
};

// Random completions for reward fuzzing: rendered blocks with repeated,
// lightly edited or fresh reasoning, plus some unstructured tag soup.
inline FuzzCase fuzz_completion(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coin(0, 9);
  std::uniform_int_distribution<int> number(0, 30);
  FuzzCase c;
  c.gold = std::to_string(number(rng));
  if (coin(rng) == 0) {
    static const std::vector<std::string> soup = {"<strategy>", "</strategy>", "<reasoning>", "</reasoning>",
                                                  "<strategy_outcome>", "</strategy_outcome>", "<answer>",
                                                  "</answer>", "<final_answer>", "</final_answer>", "7", "x ", " "};
    std::uniform_int_distribution<std::size_t> pick(0, soup.size() - 1);
    for (int i = 0, n = number(rng); i < n; ++i) c.text += soup[pick(rng)];
    c.text += c.gold;
    return c;
  }
  semdiv::CompletionSpec spec;
  std::vector<std::string> seen;
  for (int b = 0, m = std::uniform_int_distribution<int>(0, 8)(rng); b < m; ++b) {
    semdiv::BlockSpec block;
    const int r = coin(rng);
    if (r == 0) {
      block.reasoning = "";
    } else if (r <= 3 && !seen.empty()) {
      block.reasoning = seen[std::uniform_int_distribution<std::size_t>(0, seen.size() - 1)(rng)];
      if (r == 3) *block.reasoning += " again";
    } else if (r != 9) {
      block.reasoning = random_phrase(rng, 10);
      seen.push_back(*block.reasoning);
    }
    if (coin(rng) != 0) block.outcome = std::to_string(number(rng));
    spec.blocks.push_back(block);
  }
  const int fa = coin(rng);
  if (fa >= 3) spec.final_answer = std::to_string(number(rng));
  c.text = semdiv::render(spec);
  if (fa == 1) c.text += "<answer>" + std::to_string(number(rng)) + "</answer>";
  return c;
}

}  // namespace fixtures
