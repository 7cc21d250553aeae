#pragma once

// Penn Treebank style bracketed trees: reading, normalization and gold spans.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace attnparse {

// A node of a bracketed tree. Terminals carry a POS tag in `label`, the
// token in `word` and no children; internal nodes have at least one child.
struct RawTree {
  std::string label;
  std::string word;
  std::vector<RawTree> children;

  static RawTree terminal(std::string tag, std::string word);
  static RawTree node(std::string label, std::vector<RawTree> children);

  bool is_terminal() const noexcept { return children.empty(); }

  friend bool operator==(const RawTree&, const RawTree&) = default;
};

// Parses zero or more top-level trees. An unlabeled outer bracket around a
// single tree, as in .mrg files, is removed. Throws ParseError.
std::vector<RawTree> parse_ptb(std::string_view text);

// Single-line bracketed form; parse_ptb(to_bracketed(t)) == {t}.
std::string to_bracketed(const RawTree& tree);

std::size_t terminal_count(const RawTree& tree);

// {",", ".", ":", "``", "''", "-LRB-", "-RRB-", "#", "$"}
const std::set<std::string>& default_punct_tags();

// Drops everything from the first '-' or '=' after position 0, so
// "NP-SBJ-1" becomes "NP". "-NONE-", "-LRB-" and "-RRB-" are kept whole.
std::string strip_function_tags(std::string_view label);

// Removes -NONE- terminals, strips function tags, then removes terminals
// tagged with any of `punct_tags`. Internal nodes left without children are
// removed as well. Returns nullopt when no terminal survives.
std::optional<RawTree> normalize(const RawTree& tree, const std::set<std::string>& punct_tags);

struct LabeledSpan {
  std::string label;
  std::size_t start = 0;  // 1-based, inclusive
  std::size_t end = 0;    // 1-based, inclusive

  friend bool operator==(const LabeledSpan&, const LabeledSpan&) = default;
};

struct GoldSentence {
  std::size_t sentence_id = 0;
  std::vector<std::string> words;
  // One entry per phrase node in pre-order; unary chains give repeated
  // spans with their own labels. Preterminals are not included.
  std::vector<LabeledSpan> labeled_spans;
};

GoldSentence gold_spans(const RawTree& normalized, std::size_t sentence_id);

struct Treebank {
  // sentence_id is the tree's 0-based position in the source text.
  std::vector<GoldSentence> sentences;
  // Ids of trees with no words left after normalization.
  std::vector<std::size_t> dropped_ids;
  std::size_t tree_count = 0;
};

Treebank build_treebank(const std::vector<RawTree>& trees, const std::set<std::string>& punct_tags);

// Reads one file, or every regular file of a directory in lexicographic
// path order. Parse errors are rethrown with the file name prepended.
Treebank load_treebank(const std::filesystem::path& path,
                       const std::set<std::string>& punct_tags = default_punct_tags());

}  // namespace attnparse
