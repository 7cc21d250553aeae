#include "attnparse/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "attnparse/error.hpp"
#include "json.hpp"

namespace attnparse {

using json = nlohmann::json;

namespace {

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::string words_preview(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < 8; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  if (words.size() > 8) out += " ...";
  return out;
}

}  // namespace

HeadGrid head_grid(CorpusReader& corpus, std::span<const GoldSentence> gold, const GridOptions& options) {
  const Manifest& manifest = corpus.manifest();
  const std::size_t num_layers = manifest.num_layers;
  const std::size_t num_heads = manifest.num_heads;
  const std::size_t cells = num_layers * num_heads;

  std::unordered_map<std::size_t, const GoldSentence*> by_id;
  for (const auto& g : gold) by_id.emplace(g.sentence_id, &g);

  std::vector<EvalAccumulator> acc(cells, EvalAccumulator(options.eval));
  std::vector<AttentionRecord> batch;
  std::vector<const GoldSentence*> batch_gold;
  const std::size_t batch_size = std::max<std::size_t>(options.batch_size, 1);

  auto flush = [&] {
    parallel_for(cells, options.workers, [&](std::size_t cell) {
      const std::size_t layer = cell / num_heads;
      const std::size_t head = cell % num_heads;
      for (std::size_t s = 0; s < batch.size(); ++s) {
        acc[cell].add(induce(merge_subwords(batch[s], layer, head), options.lambda), *batch_gold[s]);
      }
    });
    batch.clear();
    batch_gold.clear();
  };

  corpus.rewind();
  while (auto record = corpus.next()) {
    auto it = by_id.find(record->sentence_id);
    if (it == by_id.end()) {
      throw InputError(fmt::format("sentence {}: present in the dump but not in the treebank", record->sentence_id));
    }
    if (record->words != it->second->words) {
      throw InputError(fmt::format("sentence {}: dump words \"{}\" differ from treebank words \"{}\"",
                                   record->sentence_id, words_preview(record->words),
                                   words_preview(it->second->words)));
    }
    batch.push_back(std::move(*record));
    batch_gold.push_back(it->second);
    if (batch.size() == batch_size) flush();
  }
  if (!batch.empty()) flush();

  HeadGrid grid;
  grid.model_tag = manifest.model;
  grid.num_layers = num_layers;
  grid.num_heads = num_heads;
  grid.s_f1.resize(cells);
  std::vector<EvalResult> results;
  results.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    results.push_back(acc[c].result());
    grid.s_f1[c] = results.back().corpus_s_f1;
  }
  for (const auto& cat : options.eval.categories) {
    if (cells == 0 || results.front().counts.at(cat).gold == 0) continue;
    auto& values = grid.recalls[cat];
    values.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) values[c] = 100.0 * *results[c].counts.at(cat).recall();
  }
  return grid;
}

std::vector<double> layer_means(const HeadGrid& grid) {
  std::vector<double> means(grid.num_layers, 0.0);
  for (std::size_t l = 0; l < grid.num_layers; ++l) {
    const auto row = grid.layer(l);
    means[l] = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(grid.num_heads);
  }
  return means;
}

HeadGrid grid_delta(const HeadGrid& after, const HeadGrid& before) {
  if (after.num_layers != before.num_layers || after.num_heads != before.num_heads) {
    throw std::invalid_argument(fmt::format("grid_delta: {}x{} grid minus {}x{} grid", after.num_layers,
                                            after.num_heads, before.num_layers, before.num_heads));
  }
  HeadGrid d;
  d.model_tag = after.model_tag + " - " + before.model_tag;
  d.num_layers = after.num_layers;
  d.num_heads = after.num_heads;
  d.s_f1.resize(after.s_f1.size());
  for (std::size_t i = 0; i < d.s_f1.size(); ++i) d.s_f1[i] = after.s_f1[i] - before.s_f1[i];
  for (const auto& [cat, values] : after.recalls) {
    auto it = before.recalls.find(cat);
    if (it == before.recalls.end()) continue;
    auto& out = d.recalls[cat];
    out.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - it->second[i];
  }
  return d;
}

const char* to_string(MaskMode mode) noexcept { return mode == MaskMode::top ? "top" : "bottom"; }

MaskMode parse_mask_mode(std::string_view text) {
  if (text == "top") return MaskMode::top;
  if (text == "bottom") return MaskMode::bottom;
  throw std::invalid_argument(fmt::format("unknown mask mode \"{}\" (expected top or bottom)", text));
}

std::vector<std::size_t> rank_heads(const HeadGrid& grid, std::size_t layer) {
  const auto row = grid.layer(layer);
  std::vector<std::size_t> order(grid.num_heads);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  return order;
}

MaskList mask_lists(const HeadGrid& grid, std::size_t k, MaskMode mode) {
  if (k < 1 || k + 1 > grid.num_heads) {
    throw std::out_of_range(fmt::format("k out of range: k = {} but must lie in [1, {}]", k,
                                        grid.num_heads == 0 ? 0 : grid.num_heads - 1));
  }
  MaskList m;
  m.k = k;
  m.mode = mode;
  for (std::size_t l = 0; l < grid.num_layers; ++l) {
    auto order = rank_heads(grid, l);
    auto first = mode == MaskMode::top ? order.begin() : order.end() - static_cast<std::ptrdiff_t>(k);
    std::vector<std::size_t> chosen(first, first + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());
    for (auto h : chosen) m.heads.emplace_back(l, h);
  }
  return m;
}

std::string grid_json(const HeadGrid& grid, std::string_view config_json) {
  json recalls = json::object();
  for (const auto& [cat, values] : grid.recalls) recalls[cat] = values;
  const json doc = {
      {"model", grid.model_tag},
      {"num_layers", grid.num_layers},
      {"num_heads", grid.num_heads},
      {"layout", "row-major [layer][head]"},
      {"s_f1", grid.s_f1},
      {"recalls", recalls},
      {"layer_means", layer_means(grid)},
      {"config", json::parse(config_json)},
  };
  return doc.dump(2) + "\n";
}

HeadGrid grid_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("grid file is not valid JSON: {}", e.what()));
  }
  HeadGrid g;
  try {
    g.model_tag = doc.at("model").get<std::string>();
    g.num_layers = doc.at("num_layers").get<std::size_t>();
    g.num_heads = doc.at("num_heads").get<std::size_t>();
    g.s_f1 = doc.at("s_f1").get<std::vector<double>>();
    if (auto it = doc.find("recalls"); it != doc.end()) {
      for (const auto& [cat, values] : it->items()) g.recalls[cat] = values.get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw InputError(fmt::format("grid file: {}", e.what()));
  }
  const std::size_t cells = g.num_layers * g.num_heads;
  if (g.s_f1.size() != cells) {
    throw InputError(fmt::format("grid file: s_f1 has {} values for a {}x{} grid", g.s_f1.size(), g.num_layers,
                                 g.num_heads));
  }
  for (const auto& [cat, values] : g.recalls) {
    if (values.size() != cells) throw InputError(fmt::format("grid file: recalls.{} has {} values", cat, values.size()));
  }
  return g;
}

std::string grid_csv(const HeadGrid& grid, const std::vector<std::string>& categories) {
  std::string out = eval_csv_header(categories) + "\n";
  for (std::size_t l = 0; l < grid.num_layers; ++l) {
    for (std::size_t h = 0; h < grid.num_heads; ++h) {
      const std::size_t c = l * grid.num_heads + h;
      out += fmt::format("{},{},{:.4f}", l, h, grid.s_f1[c]);
      for (const auto& cat : categories) {
        out += ',';
        if (auto it = grid.recalls.find(cat); it != grid.recalls.end()) out += fmt::format("{:.4f}", it->second[c]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string layer_means_csv(const HeadGrid& grid) {
  std::string out = "layer,mean_s_f1\n";
  const auto means = layer_means(grid);
  for (std::size_t l = 0; l < means.size(); ++l) out += fmt::format("{},{:.4f}\n", l, means[l]);
  return out;
}

std::string mask_json(const MaskList& masks, std::string_view config_json) {
  json heads = json::array();
  for (const auto& [l, h] : masks.heads) heads.push_back({l, h});
  const json doc = {
      {"k", masks.k},
      {"mode", to_string(masks.mode)},
      {"heads", heads},
      {"config", json::parse(config_json)},
  };
  return doc.dump(2) + "\n";
}

}  // namespace attnparse
