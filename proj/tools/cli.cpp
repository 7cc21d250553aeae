#include "cli.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "attnparse/error.hpp"
#include "json.hpp"

namespace attnparse::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw InputError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// CSV outputs start with the effective configuration as a comment line.
std::string csv_preamble(const RunConfig& config) { return "# config: " + config_json(config) + "\n"; }

Treebank load_gold(const RunConfig& config) {
  Treebank tb = load_treebank(config.treebank, config.punct_tags);
  for (auto id : tb.dropped_ids) fmt::print(stderr, "note: tree {} has no words after normalization; dropped\n", id);
  return tb;
}

GridOptions grid_options(const RunConfig& config) {
  GridOptions o;
  o.lambda = config.lambda;
  o.eval = eval_options(config);
  o.workers = config.workers;
  return o;
}

HeadGrid compute_grid(const RunConfig& config) {
  const Treebank tb = load_gold(config);
  CorpusReader reader(config.dump);
  return head_grid(reader, tb.sentences, grid_options(config));
}

void report_skips(const char* what, const EvalResult& r) {
  if (r.skipped_short) {
    fmt::print(stderr, "{}: {} sentences shorter than the minimum length were not scored\n", what, r.skipped_short);
  }
  for (auto id : r.mismatched_ids) fmt::print(stderr, "{}: sentence {} skipped, word count mismatch\n", what, id);
}

}  // namespace

std::string config_json(const RunConfig& config) {
  const json doc = {
      {"lambda", config.lambda},
      {"punct_tags", config.punct_tags},
      {"f1_drop_full_span", config.f1_drop_full_span},
      {"recall_uses_full_span", config.recall_uses_full_span},
      {"min_words", config.min_words},
      {"categories", config.categories},
      {"treebank", config.treebank.generic_string()},
      {"dump", config.dump.generic_string()},
  };
  return doc.dump();
}

EvalOptions eval_options(const RunConfig& config) {
  EvalOptions o;
  o.min_words = config.min_words;
  o.categories = config.categories;
  o.f1_drop_full_span = config.f1_drop_full_span;
  o.recall_uses_full_span = config.recall_uses_full_span;
  return o;
}

void validate(const RunConfig& config, const std::vector<std::string>& required_paths) {
  if (!(config.lambda >= 0.0)) throw ConfigError("lambda", fmt::format("{} is negative", config.lambda));
  if (config.min_words < 1) throw ConfigError("min-words", "must be at least 1");
  if (config.workers < 1) throw ConfigError("workers", "must be at least 1");
  for (const auto& name : required_paths) {
    if (name == "treebank") {
      if (config.treebank.empty()) throw ConfigError("treebank", "path is required");
      if (!fs::exists(config.treebank)) throw ConfigError("treebank", config.treebank.string() + " does not exist");
    } else if (name == "dump") {
      if (config.dump.empty()) throw ConfigError("dump", "path is required");
      if (!fs::is_directory(config.dump)) throw ConfigError("dump", config.dump.string() + " is not a directory");
    } else if (name == "out") {
      if (config.out.empty()) throw ConfigError("out", "path is required");
    }
  }
}

void cmd_baseline(const RunConfig& config) {
  validate(config, {"treebank", "out"});
  const Treebank tb = load_gold(config);
  const EvalOptions options = eval_options(config);

  EvalAccumulator left(options);
  EvalAccumulator right(options);
  for (const auto& g : tb.sentences) {
    if (g.words.empty()) continue;
    left.add(left_branching(g.words.size()), g);
    right.add(right_branching(g.words.size()), g);
  }
  const EvalResult l = left.result();
  const EvalResult r = right.result();
  report_skips("baseline", r);

  fs::create_directories(config.out);
  const std::string cfg = config_json(config);
  write_file(config.out / "baseline_left.json", eval_result_json(l, cfg));
  write_file(config.out / "baseline_right.json", eval_result_json(r, cfg));
  std::string csv = csv_preamble(config) + "baseline," + eval_csv_header(config.categories) + "\n";
  csv += "left," + eval_csv_row("", "", l, config.categories) + "\n";
  csv += "right," + eval_csv_row("", "", r, config.categories) + "\n";
  write_file(config.out / "baseline.csv", csv);
}

HeadGrid cmd_grid(const RunConfig& config) {
  validate(config, {"treebank", "dump", "out"});
  HeadGrid grid = compute_grid(config);
  fs::create_directories(config.out);
  write_file(config.out / "grid.json", grid_json(grid, config_json(config)));
  write_file(config.out / "grid.csv", csv_preamble(config) + grid_csv(grid, config.categories));
  write_file(config.out / "layer_means.csv", csv_preamble(config) + layer_means_csv(grid));
  return grid;
}

HeadGrid cmd_delta(const RunConfig& config, const fs::path& before, const fs::path& after) {
  validate(config, {"out"});
  if (!fs::exists(before)) throw ConfigError("before", before.string() + " does not exist");
  if (!fs::exists(after)) throw ConfigError("after", after.string() + " does not exist");
  const HeadGrid b = grid_from_json(read_file(before));
  const HeadGrid a = grid_from_json(read_file(after));
  if (a.num_layers != b.num_layers || a.num_heads != b.num_heads) {
    throw InputError(fmt::format("grid dimensions differ: {}x{} vs {}x{}", a.num_layers, a.num_heads, b.num_layers,
                                 b.num_heads));
  }
  HeadGrid delta = grid_delta(a, b);

  json cfg = json::parse(config_json(config));
  cfg["before"] = before.generic_string();
  cfg["after"] = after.generic_string();
  const std::string cfg_text = cfg.dump();
  const std::string preamble = "# config: " + cfg_text + "\n";

  fs::create_directories(config.out);
  write_file(config.out / "delta.json", grid_json(delta, cfg_text));
  write_file(config.out / "delta.csv", preamble + grid_csv(delta, config.categories));
  write_file(config.out / "delta_layer_means.csv", preamble + layer_means_csv(delta));
  return delta;
}

std::vector<MaskList> cmd_masks(const RunConfig& config, std::size_t k, const std::vector<MaskMode>& modes,
                                const std::optional<fs::path>& grid_file) {
  HeadGrid grid;
  json cfg = json::parse(config_json(config));
  if (grid_file) {
    validate(config, {"out"});
    if (!fs::exists(*grid_file)) throw ConfigError("grid", grid_file->string() + " does not exist");
    grid = grid_from_json(read_file(*grid_file));
    cfg["grid"] = grid_file->generic_string();
  } else {
    validate(config, {"treebank", "dump", "out"});
    grid = compute_grid(config);
  }
  if (k < 1 || k + 1 > grid.num_heads) {
    throw ConfigError("k", fmt::format("k out of range: {} not in [1, {}]", k, grid.num_heads - 1));
  }
  const std::string cfg_text = cfg.dump();

  fs::create_directories(config.out);
  std::vector<MaskList> lists;
  for (auto mode : modes) {
    lists.push_back(mask_lists(grid, k, mode));
    write_file(config.out / fmt::format("masks_{}_{}.json", to_string(mode), k), mask_json(lists.back(), cfg_text));
  }
  return lists;
}

std::string cmd_parse(const RunConfig& config, std::size_t sentence_id, std::size_t layer, std::size_t head) {
  validate(config, {"dump"});
  const Manifest manifest = read_manifest(config.dump);
  if (layer >= manifest.num_layers) {
    throw ConfigError("layer", fmt::format("{} out of range, the dump has {} layers", layer, manifest.num_layers));
  }
  if (head >= manifest.num_heads) {
    throw ConfigError("head", fmt::format("{} out of range, the dump has {} heads", head, manifest.num_heads));
  }
  for (std::size_t i = 0; i < manifest.sentences.size(); ++i) {
    if (manifest.sentences[i].id != sentence_id) continue;
    const AttentionRecord record = load_record(config.dump, manifest, i);
    return to_bracketed(induce(merge_subwords(record, layer, head), config.lambda));
  }
  throw ConfigError("sentence-id", fmt::format("no sentence {} in {}", sentence_id, config.dump.string()));
}

}  // namespace attnparse::cli
