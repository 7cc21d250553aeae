#pragma once

// Subcommands of the attnparse tool, callable without going through argv.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "attnparse/analysis.hpp"

namespace attnparse::cli {

struct RunConfig {
  double lambda = kDefaultLambda;
  std::set<std::string> punct_tags = default_punct_tags();
  bool f1_drop_full_span = true;
  bool recall_uses_full_span = true;
  std::size_t min_words = 3;
  std::vector<std::string> categories = default_categories();
  std::filesystem::path treebank;
  std::filesystem::path dump;
  std::filesystem::path out;
  std::size_t workers = 1;
};

// Fields that shape results, as a JSON object; paths are included, the
// worker count is not since results do not depend on it.
std::string config_json(const RunConfig& config);

EvalOptions eval_options(const RunConfig& config);

// Throws ConfigError naming the first bad field. Only the paths listed in
// `required_paths` ("treebank", "dump", "out") are checked.
void validate(const RunConfig& config, const std::vector<std::string>& required_paths);

// baseline_left.json, baseline_right.json, baseline.csv
void cmd_baseline(const RunConfig& config);

// grid.json, grid.csv, layer_means.csv
HeadGrid cmd_grid(const RunConfig& config);

// delta.json, delta.csv, delta_layer_means.csv from two grid.json files.
HeadGrid cmd_delta(const RunConfig& config, const std::filesystem::path& before, const std::filesystem::path& after);

// masks_<mode>_<k>.json for each requested mode. The ranking comes from
// `grid_file` when given, otherwise a grid is computed from treebank + dump.
std::vector<MaskList> cmd_masks(const RunConfig& config, std::size_t k, const std::vector<MaskMode>& modes,
                                const std::optional<std::filesystem::path>& grid_file);

// Bracketed induced tree for one sentence of the dump, e.g. "(1 (2 3))".
std::string cmd_parse(const RunConfig& config, std::size_t sentence_id, std::size_t layer, std::size_t head);

}  // namespace attnparse::cli
