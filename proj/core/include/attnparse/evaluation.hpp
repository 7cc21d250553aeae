#pragma once

// Sentence-level bracketing F1 and per-category label recall.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attnparse/induction.hpp"
#include "attnparse/treebank.hpp"

namespace attnparse {

struct Span {
  std::size_t start = 0;  // 1-based, inclusive
  std::size_t end = 0;

  std::size_t width() const noexcept { return end - start + 1; }

  friend auto operator<=>(const Span&, const Span&) = default;
};

// Sorted set of unlabeled spans.
class SpanSet {
 public:
  SpanSet() = default;
  SpanSet(std::initializer_list<Span> spans);

  void insert(Span s);
  bool contains(Span s) const;
  std::size_t size() const noexcept { return spans_.size(); }
  bool empty() const noexcept { return spans_.empty(); }
  auto begin() const noexcept { return spans_.begin(); }
  auto end() const noexcept { return spans_.end(); }

  std::size_t intersection_size(const SpanSet& other) const;

  friend bool operator==(const SpanSet&, const SpanSet&) = default;

 private:
  std::vector<Span> spans_;
};

// One span per internal node. With `nontrivial` the full-sentence span is
// dropped (leaves are never emitted).
SpanSet tree_spans(const BinaryTree& tree, bool nontrivial);

// Gold spans with labels dropped and duplicates collapsed. With `nontrivial`
// single-word spans and the full-sentence span are dropped.
SpanSet gold_span_set(const GoldSentence& gold, bool nontrivial);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Both empty gives f1 = 1; exactly one empty gives f1 = 0.
PRF sentence_f1(const SpanSet& pred, const SpanSet& gold);

const std::vector<std::string>& default_categories();  // SBAR NP VP PP ADJP ADVP

struct CategoryCount {
  std::size_t gold = 0;
  std::size_t matched = 0;

  std::optional<double> recall() const {
    if (gold == 0) return std::nullopt;
    return static_cast<double>(matched) / static_cast<double>(gold);
  }
};

// Adds, per category, the gold spans of width >= 2 and those of them found
// in `predicted`. Categories not already in `counts` are ignored.
void count_label_matches(const SpanSet& predicted, const GoldSentence& gold,
                         std::map<std::string, CategoryCount>& counts);

struct EvalOptions {
  std::size_t min_words = 3;
  std::vector<std::string> categories = default_categories();
  // Drop the full-sentence span from both sides before F1.
  bool f1_drop_full_span = true;
  // Let the predicted full-sentence span match gold constituents for recall.
  bool recall_uses_full_span = true;
};

struct EvalResult {
  std::vector<double> per_sentence_f1;     // in [0, 1], evaluation order
  std::vector<std::size_t> sentence_ids;   // parallel to per_sentence_f1
  double corpus_s_f1 = 0.0;                // mean F1 x 100; 0 if nothing was scored
  std::map<std::string, CategoryCount> counts;
  std::size_t skipped_short = 0;
  std::vector<std::size_t> mismatched_ids;  // prediction/gold word counts differ

  // Recall in [0, 1]; categories without gold spans are omitted.
  std::map<std::string, double> label_recall() const;
};

// Commutative accumulation of per-sentence scores. Sentences with fewer than
// min_words words are counted but not scored; a prediction covering a
// different number of words than the gold is skipped and its id recorded.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(EvalOptions options = {});

  void add(const BinaryTree& pred, const GoldSentence& gold);
  void merge(const EvalAccumulator& other);

  const EvalOptions& options() const noexcept { return options_; }
  EvalResult result() const;

 private:
  EvalOptions options_;
  EvalResult partial_;
  double f1_sum_ = 0.0;
};

// Pairs preds[i] with golds[i].
EvalResult evaluate(std::span<const BinaryTree> preds, std::span<const GoldSentence> golds,
                    const EvalOptions& options = {});

std::map<std::string, double> label_recall(std::span<const BinaryTree> preds, std::span<const GoldSentence> golds,
                                           const std::vector<std::string>& categories);

// JSON document with scores, counts and the given effective configuration
// (itself a JSON object in text form, embedded verbatim under "config").
std::string eval_result_json(const EvalResult& result, std::string_view config_json);

// "layer,head,s_f1,sbar,np,vp,pp,adjp,advp" style header; the category
// columns follow `categories`, lower-cased.
std::string eval_csv_header(const std::vector<std::string>& categories);
// Scores in percent; an undefined recall is written as an empty field.
// Empty layer/head strings are allowed for results not tied to a head.
std::string eval_csv_row(std::string_view layer, std::string_view head, const EvalResult& result,
                         const std::vector<std::string>& categories);

}  // namespace attnparse
