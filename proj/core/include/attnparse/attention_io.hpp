#pragma once

// On-disk attention dumps (ATNX) and subword-to-word merging.
//
// An ATNX dump is a directory holding manifest.json plus one raw tensor file
// per sentence. Each tensor is [layers, heads, T, T] float32, little-endian,
// row-major, without header; T is the number of tokens left after the
// extractor removed special tokens.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attnparse {

inline constexpr double kRowSumTolerance = 1e-4;

// Tokens of one word, 1-based inclusive.
struct TokenSegment {
  std::size_t first = 0;
  std::size_t last = 0;

  friend bool operator==(const TokenSegment&, const TokenSegment&) = default;
};

struct AttentionRecord {
  std::size_t sentence_id = 0;
  std::vector<std::string> tokens;
  std::vector<std::string> words;
  std::vector<TokenSegment> alignment;  // one per word
  std::size_t num_layers = 0;
  std::size_t num_heads = 0;
  std::vector<float> tensor;  // [num_layers][num_heads][T][T]

  std::size_t token_count() const noexcept { return tokens.size(); }

  // T*T row-major slice; throws std::out_of_range.
  std::span<const float> slice(std::size_t layer, std::size_t head) const;
};

struct ManifestEntry {
  std::size_t id = 0;
  std::vector<std::string> tokens;
  std::vector<std::string> words;
  std::vector<TokenSegment> alignment;
  std::string tensor_file;
};

struct Manifest {
  std::string model;
  std::size_t num_layers = 0;
  std::size_t num_heads = 0;
  std::vector<ManifestEntry> sentences;  // sorted by id
};

Manifest read_manifest(const std::filesystem::path& dump_dir);

// Throws AttentionFormatError(alignment) unless the segments are in order,
// contiguous and cover exactly 1..token_count.
void validate_alignment(std::span<const TokenSegment> alignment, std::size_t token_count, long long sentence_id);

// Throws AttentionFormatError(row_sum) if any row of any slice has a negative
// entry or does not sum to 1 within kRowSumTolerance.
void validate_rows(const AttentionRecord& record);

AttentionRecord load_record(const std::filesystem::path& dump_dir, const Manifest& manifest, std::size_t index);

// Yields the records of a dump in sentence_id order, validating the tensor
// byte length, the alignment and every row sum on the way.
class CorpusReader {
 public:
  explicit CorpusReader(std::filesystem::path dump_dir);

  const Manifest& manifest() const noexcept { return manifest_; }
  std::size_t size() const noexcept { return manifest_.sentences.size(); }

  std::optional<AttentionRecord> next();
  void rewind() noexcept { cursor_ = 0; }

 private:
  std::filesystem::path dir_;
  Manifest manifest_;
  std::size_t cursor_ = 0;
};

// Writes a dump in the same format. Tensor files are named "<id>.bin".
void write_corpus(const std::filesystem::path& dump_dir, const std::string& model, std::size_t num_layers,
                  std::size_t num_heads, std::span<const AttentionRecord> records);

// n x n word-level attention, rows renormalized to sum to 1.
struct WordAttentionMatrix {
  std::vector<std::string> words;
  std::size_t size = 0;
  std::vector<double> values;  // row-major

  std::span<const double> row(std::size_t i) const { return {values.data() + i * size, size}; }
  double at(std::size_t i, std::size_t j) const { return values[i * size + j]; }
};

// Averages the token rows of each word, then the token columns of each word,
// then renormalizes rows. Throws std::out_of_range for a bad layer or head.
WordAttentionMatrix merge_subwords(const AttentionRecord& record, std::size_t layer, std::size_t head);

}  // namespace attnparse
