#pragma once

// Per-head score grids and what is derived from them: layer averages,
// fine-tuning deltas and per-layer head rankings for masking.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/evaluation.hpp"
#include "attnparse/treebank.hpp"

namespace attnparse {

// Scores in percent, row-major [layer][head].
struct HeadGrid {
  std::string model_tag;
  std::size_t num_layers = 0;
  std::size_t num_heads = 0;
  std::vector<double> s_f1;
  // Categories without any gold span in the corpus are absent.
  std::map<std::string, std::vector<double>> recalls;

  double at(std::size_t layer, std::size_t head) const { return s_f1.at(layer * num_heads + head); }
  std::span<const double> layer(std::size_t l) const {
    return std::span<const double>(s_f1).subspan(l * num_heads, num_heads);
  }
};

struct GridOptions {
  double lambda = kDefaultLambda;
  EvalOptions eval;
  std::size_t workers = 1;
  // Records held in memory at once.
  std::size_t batch_size = 32;
};

// Induces a tree for every (sentence, layer, head) and scores each head over
// the corpus. Records are matched to gold sentences by id and must carry the
// same words; a record without gold or with different words throws
// InputError naming the sentence. Gold sentences without a record are not
// scored. The result does not depend on `workers`.
HeadGrid head_grid(CorpusReader& corpus, std::span<const GoldSentence> gold, const GridOptions& options);

std::vector<double> layer_means(const HeadGrid& grid);

// after - before, elementwise; recall categories present in both. Throws
// std::invalid_argument on a dimension mismatch.
HeadGrid grid_delta(const HeadGrid& after, const HeadGrid& before);

enum class MaskMode { top, bottom };

const char* to_string(MaskMode mode) noexcept;
MaskMode parse_mask_mode(std::string_view text);

struct MaskList {
  std::size_t k = 0;
  MaskMode mode = MaskMode::top;
  std::vector<std::pair<std::size_t, std::size_t>> heads;  // 0-based (layer, head)
};

// Heads of one layer, best first: descending S-F1, lower index first on ties.
std::vector<std::size_t> rank_heads(const HeadGrid& grid, std::size_t layer);

// The k first (top) or k last (bottom) heads of every layer's ranking.
// Throws std::out_of_range unless 1 <= k <= num_heads - 1.
MaskList mask_lists(const HeadGrid& grid, std::size_t k, MaskMode mode);

std::string grid_json(const HeadGrid& grid, std::string_view config_json);
HeadGrid grid_from_json(std::string_view text);
// One row per head: layer,head,s_f1,<categories...>
std::string grid_csv(const HeadGrid& grid, const std::vector<std::string>& categories);
std::string layer_means_csv(const HeadGrid& grid);
// {"k":..,"mode":..,"heads":[[layer,head],...],"config":{...}}
std::string mask_json(const MaskList& masks, std::string_view config_json);

}  // namespace attnparse
