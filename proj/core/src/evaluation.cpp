#include "attnparse/evaluation.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "attnparse/error.hpp"
#include "json.hpp"

namespace attnparse {

using json = nlohmann::json;

SpanSet::SpanSet(std::initializer_list<Span> spans) {
  for (const auto& s : spans) insert(s);
}

void SpanSet::insert(Span s) {
  auto it = std::lower_bound(spans_.begin(), spans_.end(), s);
  if (it == spans_.end() || *it != s) spans_.insert(it, s);
}

bool SpanSet::contains(Span s) const { return std::binary_search(spans_.begin(), spans_.end(), s); }

std::size_t SpanSet::intersection_size(const SpanSet& other) const {
  std::size_t n = 0;
  auto a = spans_.begin();
  auto b = other.spans_.begin();
  while (a != spans_.end() && b != other.spans_.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      ++n;
      ++a;
      ++b;
    }
  }
  return n;
}

namespace {

void collect(const BinaryTree& t, SpanSet& out) {
  if (t.is_leaf()) return;
  out.insert({t.first(), t.last()});
  collect(t.left(), out);
  collect(t.right(), out);
}

SpanSet tree_spans_impl(const BinaryTree& tree, bool drop_full) {
  SpanSet all;
  collect(tree, all);
  if (!drop_full) return all;
  SpanSet out;
  for (const auto& s : all) {
    if (!(s.start == tree.first() && s.end == tree.last())) out.insert(s);
  }
  return out;
}

SpanSet gold_f1_spans(const GoldSentence& gold, bool drop_full) {
  SpanSet out;
  const std::size_t n = gold.words.size();
  for (const auto& s : gold.labeled_spans) {
    if (s.end <= s.start) continue;
    if (drop_full && s.start == 1 && s.end == n) continue;
    out.insert({s.start, s.end});
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

SpanSet tree_spans(const BinaryTree& tree, bool nontrivial) { return tree_spans_impl(tree, nontrivial); }

SpanSet gold_span_set(const GoldSentence& gold, bool nontrivial) {
  if (nontrivial) return gold_f1_spans(gold, true);
  SpanSet out;
  for (const auto& s : gold.labeled_spans) out.insert({s.start, s.end});
  return out;
}

PRF sentence_f1(const SpanSet& pred, const SpanSet& gold) {
  if (pred.empty() && gold.empty()) return {1.0, 1.0, 1.0};
  if (pred.empty() || gold.empty()) return {0.0, 0.0, 0.0};
  const auto overlap = static_cast<double>(pred.intersection_size(gold));
  PRF r;
  r.precision = overlap / static_cast<double>(pred.size());
  r.recall = overlap / static_cast<double>(gold.size());
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

const std::vector<std::string>& default_categories() {
  static const std::vector<std::string> cats{"SBAR", "NP", "VP", "PP", "ADJP", "ADVP"};
  return cats;
}

void count_label_matches(const SpanSet& predicted, const GoldSentence& gold,
                         std::map<std::string, CategoryCount>& counts) {
  for (const auto& s : gold.labeled_spans) {
    if (s.end <= s.start) continue;
    auto it = counts.find(s.label);
    if (it == counts.end()) continue;
    ++it->second.gold;
    if (predicted.contains({s.start, s.end})) ++it->second.matched;
  }
}

std::map<std::string, double> EvalResult::label_recall() const {
  std::map<std::string, double> out;
  for (const auto& [cat, c] : counts) {
    if (auto r = c.recall()) out.emplace(cat, *r);
  }
  return out;
}

EvalAccumulator::EvalAccumulator(EvalOptions options) : options_(std::move(options)) {
  for (const auto& c : options_.categories) partial_.counts.emplace(c, CategoryCount{});
}

void EvalAccumulator::add(const BinaryTree& pred, const GoldSentence& gold) {
  const std::size_t n = gold.words.size();
  if (pred.first() != 1 || pred.leaf_count() != n) {
    partial_.mismatched_ids.push_back(gold.sentence_id);
    return;
  }
  if (n < options_.min_words) {
    ++partial_.skipped_short;
    return;
  }

  const PRF prf = sentence_f1(tree_spans_impl(pred, options_.f1_drop_full_span),
                              gold_f1_spans(gold, options_.f1_drop_full_span));
  partial_.per_sentence_f1.push_back(prf.f1);
  partial_.sentence_ids.push_back(gold.sentence_id);
  f1_sum_ += prf.f1;

  count_label_matches(tree_spans_impl(pred, !options_.recall_uses_full_span), gold, partial_.counts);
}

void EvalAccumulator::merge(const EvalAccumulator& other) {
  const auto& o = other.partial_;
  partial_.per_sentence_f1.insert(partial_.per_sentence_f1.end(), o.per_sentence_f1.begin(), o.per_sentence_f1.end());
  partial_.sentence_ids.insert(partial_.sentence_ids.end(), o.sentence_ids.begin(), o.sentence_ids.end());
  partial_.mismatched_ids.insert(partial_.mismatched_ids.end(), o.mismatched_ids.begin(), o.mismatched_ids.end());
  partial_.skipped_short += o.skipped_short;
  f1_sum_ += other.f1_sum_;
  for (const auto& [cat, c] : o.counts) {
    auto& mine = partial_.counts[cat];
    mine.gold += c.gold;
    mine.matched += c.matched;
  }
}

EvalResult EvalAccumulator::result() const {
  EvalResult r = partial_;
  const std::size_t n = r.per_sentence_f1.size();
  r.corpus_s_f1 = n == 0 ? 0.0 : 100.0 * f1_sum_ / static_cast<double>(n);
  for (const auto& [cat, c] : r.counts) {
    if (c.matched > c.gold) throw InvariantError(fmt::format("{}: {} matched of {} gold spans", cat, c.matched, c.gold));
  }
  return r;
}

EvalResult evaluate(std::span<const BinaryTree> preds, std::span<const GoldSentence> golds,
                    const EvalOptions& options) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument(fmt::format("evaluate: {} predictions for {} gold sentences", preds.size(),
                                            golds.size()));
  }
  EvalAccumulator acc(options);
  for (std::size_t i = 0; i < preds.size(); ++i) acc.add(preds[i], golds[i]);
  return acc.result();
}

std::map<std::string, double> label_recall(std::span<const BinaryTree> preds, std::span<const GoldSentence> golds,
                                           const std::vector<std::string>& categories) {
  EvalOptions options;
  options.categories = categories;
  options.min_words = 1;
  return evaluate(preds, golds, options).label_recall();
}

std::string eval_result_json(const EvalResult& result, std::string_view config_json) {
  json counts = json::object();
  json recall = json::object();
  for (const auto& [cat, c] : result.counts) {
    counts[cat] = {{"gold", c.gold}, {"matched", c.matched}};
    if (auto r = c.recall()) recall[cat] = *r;
  }
  json doc = {
      {"config", json::parse(config_json)},
      {"s_f1", result.corpus_s_f1},
      {"label_recall", recall},
      {"counts", counts},
      {"evaluated", result.per_sentence_f1.size()},
      {"skipped_short", result.skipped_short},
      {"skipped_mismatch", result.mismatched_ids},
      {"per_sentence", json::array()},
  };
  for (std::size_t i = 0; i < result.per_sentence_f1.size(); ++i) {
    doc["per_sentence"].push_back({{"id", result.sentence_ids[i]}, {"f1", result.per_sentence_f1[i]}});
  }
  return doc.dump(2) + "\n";
}

std::string eval_csv_header(const std::vector<std::string>& categories) {
  std::string out = "layer,head,s_f1";
  for (const auto& c : categories) out += "," + lower(c);
  return out;
}

std::string eval_csv_row(std::string_view layer, std::string_view head, const EvalResult& result,
                         const std::vector<std::string>& categories) {
  std::string out = fmt::format("{},{},{:.4f}", layer, head, result.corpus_s_f1);
  for (const auto& c : categories) {
    out += ',';
    auto it = result.counts.find(c);
    if (it == result.counts.end()) continue;
    if (auto r = it->second.recall()) out += fmt::format("{:.4f}", 100.0 * *r);
  }
  return out;
}

}  // namespace attnparse
