#pragma once

// Shared test helpers: synthetic attention dumps and independent oracles.
// Nothing here calls into the code paths it is used to check.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/induction.hpp"
#include "attnparse/treebank.hpp"

namespace attnparse::testing {

std::filesystem::path data_dir();
std::filesystem::path synthetic_treebank_path();

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

// Random probability vector; with `sparsity` > 0 some entries are exactly 0.
std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double sparsity = 0.0);

// Words longer than `split_above` characters become two tokens ("xx", "##yy").
struct DumpSpec {
  std::size_t num_layers = 2;
  std::size_t num_heads = 3;
  std::size_t split_above = 6;
  std::uint64_t seed = 7;
};

// One record per gold sentence with random row-stochastic slices.
std::vector<AttentionRecord> synthetic_records(const std::vector<GoldSentence>& gold, const DumpSpec& spec);

// Record for `words`, one token per word, every slice equal to `rows`.
AttentionRecord record_from_rows(std::size_t sentence_id, const std::vector<std::string>& words,
                                 const std::vector<std::vector<double>>& rows, std::size_t num_layers = 1,
                                 std::size_t num_heads = 1);

// JSD through entropies: sqrt(H(M) - (H(P) + H(Q)) / 2).
double entropy_jsd(const std::vector<double>& p, const std::vector<double>& q);

// Word matrix as R * A * C with explicit averaging matrices, then row
// renormalization.
std::vector<std::vector<double>> matrix_merge(const std::vector<std::vector<double>>& token_rows,
                                              const std::vector<TokenSegment>& alignment);

// Every binary tree over words first..last.
std::vector<BinaryTree> all_binary_trees(std::size_t first, std::size_t last);

// The tree (among all binary trees over 1..n) in which every internal node's
// split distance exceeds those of all of its descendants. Requires distinct
// distances; throws if the number of such trees is not exactly one.
BinaryTree brute_force_tree(std::size_t n, const std::vector<double>& d);

}  // namespace attnparse::testing
