// attnparse: induce constituency trees from attention dumps and score them.
//
// Exit codes: 0 success, 1 input or configuration error, 2 internal error.

#include <cstdio>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "attnparse/error.hpp"
#include "cli.hpp"

int main(int argc, char** argv) {
  using namespace attnparse;

  cli::RunConfig config;
  config.workers = std::max(1u, std::thread::hardware_concurrency());

  CLI::App app{"Constituency trees from transformer attention heads"};
  app.set_config("--config", "", "INI/TOML file with option defaults; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  std::string treebank, dump, out;
  std::vector<std::string> punct(config.punct_tags.begin(), config.punct_tags.end());
  bool keep_full_span_f1 = false;
  bool no_full_span_recall = false;

  app.add_option("--treebank", treebank, "Bracketed treebank file or directory");
  app.add_option("--dump", dump, "Attention dump directory (manifest.json + tensors)");
  app.add_option("--out", out, "Output directory");
  app.add_option("--lambda", config.lambda, "Right-skew bias weight")->capture_default_str();
  app.add_option("--min-words", config.min_words, "Shortest sentence that is scored")->capture_default_str();
  app.add_option("--punct-tags", punct, "Comma-separated POS tags removed before scoring")->delimiter(',');
  app.add_option("--categories", config.categories, "Comma-separated phrase labels for recall")
      ->delimiter(',')
      ->capture_default_str();
  app.add_flag("--keep-full-span-f1", keep_full_span_f1, "Count the full-sentence span in F1");
  app.add_flag("--no-full-span-recall", no_full_span_recall,
               "Do not let the predicted full-sentence span match gold constituents");
  app.add_option("--workers", config.workers, "Worker threads")->capture_default_str();

  auto* baseline = app.add_subcommand("baseline", "Score left- and right-branching trees");
  auto* grid = app.add_subcommand("grid", "Score every attention head");

  std::string before, after;
  auto* delta = app.add_subcommand("delta", "Difference of two grids (after - before)");
  delta->add_option("--before", before, "grid.json of the reference model")->required();
  delta->add_option("--after", after, "grid.json of the fine-tuned model")->required();

  std::size_t k = 1;
  std::string mode = "both";
  std::string grid_file;
  auto* masks = app.add_subcommand("masks", "Per-layer top-k / bottom-k head lists");
  masks->add_option("--k", k, "Heads per layer")->required();
  masks->add_option("--mode", mode, "top, bottom or both")->check(CLI::IsMember({"top", "bottom", "both"}))
      ->capture_default_str();
  masks->add_option("--grid", grid_file, "Rank heads from this grid.json instead of recomputing");

  std::size_t sentence_id = 0, layer = 0, head = 0;
  auto* parse = app.add_subcommand("parse", "Print the induced tree of one sentence");
  parse->add_option("--sentence-id", sentence_id, "Sentence id in the dump")->required();
  parse->add_option("--layer", layer, "0-based layer")->required();
  parse->add_option("--head", head, "0-based head")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  config.treebank = treebank;
  config.dump = dump;
  config.out = out;
  config.punct_tags = {punct.begin(), punct.end()};
  config.f1_drop_full_span = !keep_full_span_f1;
  config.recall_uses_full_span = !no_full_span_recall;

  try {
    if (baseline->parsed()) {
      cli::cmd_baseline(config);
    } else if (grid->parsed()) {
      cli::cmd_grid(config);
    } else if (delta->parsed()) {
      cli::cmd_delta(config, before, after);
    } else if (masks->parsed()) {
      std::vector<MaskMode> modes;
      if (mode != "bottom") modes.push_back(MaskMode::top);
      if (mode != "top") modes.push_back(MaskMode::bottom);
      std::optional<std::filesystem::path> from;
      if (!grid_file.empty()) from = grid_file;
      cli::cmd_masks(config, k, modes, from);
    } else if (parse->parsed()) {
      fmt::print("{}\n", cli::cmd_parse(config, sentence_id, layer, head));
    }
  } catch (const InputError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return 2;
  }
  return 0;
}
