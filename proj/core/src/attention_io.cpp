#include "attnparse/attention_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "attnparse/error.hpp"
#include "json.hpp"

namespace attnparse {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Kind = AttentionFormatError::Kind;

namespace {

std::size_t slice_size(std::size_t t) { return t * t; }

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

void decode_le_floats(const std::vector<char>& bytes, std::vector<float>& out) {
  out.resize(bytes.size() / sizeof(float));
  std::memcpy(out.data(), bytes.data(), out.size() * sizeof(float));
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : out) f = std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(f)));
  }
}

std::vector<char> encode_le_floats(std::span<const float> values) {
  std::vector<char> bytes(values.size() * sizeof(float));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::uint32_t v = byteswap32(std::bit_cast<std::uint32_t>(values[i]));
      std::memcpy(bytes.data() + i * sizeof(float), &v, sizeof v);
    }
  } else {
    std::memcpy(bytes.data(), values.data(), bytes.size());
  }
  return bytes;
}

template <typename T>
T required(const json& obj, const char* key, long long sentence_id) {
  auto it = obj.find(key);
  if (it == obj.end()) throw AttentionFormatError(Kind::manifest, sentence_id, fmt::format("missing field \"{}\"", key));
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw AttentionFormatError(Kind::manifest, sentence_id, fmt::format("field \"{}\": {}", key, e.what()));
  }
}

}  // namespace

std::span<const float> AttentionRecord::slice(std::size_t layer, std::size_t head) const {
  if (layer >= num_layers || head >= num_heads) {
    throw std::out_of_range(fmt::format("layer/head ({}, {}) out of range for a {}x{} record", layer, head,
                                        num_layers, num_heads));
  }
  const std::size_t s = slice_size(token_count());
  return std::span<const float>(tensor).subspan((layer * num_heads + head) * s, s);
}

Manifest read_manifest(const fs::path& dump_dir) {
  const fs::path path = dump_dir / "manifest.json";
  std::ifstream in(path);
  if (!in) throw AttentionFormatError(Kind::missing_file, -1, path.string());

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw AttentionFormatError(Kind::manifest, -1, fmt::format("{}: {}", path.string(), e.what()));
  }

  Manifest m;
  m.model = required<std::string>(doc, "model", -1);
  m.num_layers = required<std::size_t>(doc, "num_layers", -1);
  m.num_heads = required<std::size_t>(doc, "num_heads", -1);
  if (m.num_layers == 0 || m.num_heads == 0) {
    throw AttentionFormatError(Kind::shape, -1, "num_layers and num_heads must be positive");
  }

  for (const auto& s : required<json>(doc, "sentences", -1)) {
    ManifestEntry e;
    e.id = required<std::size_t>(s, "id", -1);
    const auto sid = static_cast<long long>(e.id);
    e.tokens = required<std::vector<std::string>>(s, "tokens", sid);
    e.words = required<std::vector<std::string>>(s, "words", sid);
    for (const auto& pair : required<std::vector<std::vector<long long>>>(s, "alignment", sid)) {
      if (pair.size() != 2 || pair[0] < 1 || pair[1] < 1) {
        throw AttentionFormatError(Kind::alignment, sid, "alignment entries must be [first, last] with 1-based indices");
      }
      e.alignment.push_back({static_cast<std::size_t>(pair[0]), static_cast<std::size_t>(pair[1])});
    }
    e.tensor_file = required<std::string>(s, "tensor_file", sid);
    if (e.alignment.size() != e.words.size()) {
      throw AttentionFormatError(Kind::alignment, sid,
                                 fmt::format("{} alignment segments for {} words", e.alignment.size(), e.words.size()));
    }
    m.sentences.push_back(std::move(e));
  }

  std::stable_sort(m.sentences.begin(), m.sentences.end(),
                   [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < m.sentences.size(); ++i) {
    if (m.sentences[i].id == m.sentences[i - 1].id) {
      throw AttentionFormatError(Kind::manifest, static_cast<long long>(m.sentences[i].id), "duplicate sentence id");
    }
  }
  return m;
}

void validate_alignment(std::span<const TokenSegment> alignment, std::size_t token_count, long long sentence_id) {
  std::size_t expected = 1;
  for (std::size_t w = 0; w < alignment.size(); ++w) {
    const auto& seg = alignment[w];
    if (seg.first > seg.last) {
      throw AttentionFormatError(Kind::alignment, sentence_id,
                                 fmt::format("word {} has empty segment [{}, {}]", w + 1, seg.first, seg.last));
    }
    if (seg.first < expected) {
      throw AttentionFormatError(Kind::alignment, sentence_id,
                                 fmt::format("word {} segment [{}, {}] overlaps the previous word", w + 1, seg.first,
                                             seg.last));
    }
    if (seg.first > expected) {
      throw AttentionFormatError(Kind::alignment, sentence_id,
                                 fmt::format("gap before word {}: tokens {}..{} are unassigned", w + 1, expected,
                                             seg.first - 1));
    }
    expected = seg.last + 1;
  }
  if (expected != token_count + 1) {
    throw AttentionFormatError(Kind::alignment, sentence_id,
                               fmt::format("segments cover tokens 1..{} but the sentence has {} tokens", expected - 1,
                                           token_count));
  }
}

void validate_rows(const AttentionRecord& record) {
  const std::size_t t = record.token_count();
  for (std::size_t l = 0; l < record.num_layers; ++l) {
    for (std::size_t h = 0; h < record.num_heads; ++h) {
      const auto s = record.slice(l, h);
      for (std::size_t i = 0; i < t; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
          const float v = s[i * t + j];
          if (!(v >= 0.0f) || !std::isfinite(v)) {
            throw AttentionFormatError(Kind::row_sum, static_cast<long long>(record.sentence_id),
                                       fmt::format("layer {} head {} row {}: invalid entry {}", l, h, i + 1, v));
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) {
          throw AttentionFormatError(Kind::row_sum, static_cast<long long>(record.sentence_id),
                                     fmt::format("layer {} head {} row {} sums to {:.6f}", l, h, i + 1, sum));
        }
      }
    }
  }
}

AttentionRecord load_record(const fs::path& dump_dir, const Manifest& manifest, std::size_t index) {
  const ManifestEntry& e = manifest.sentences.at(index);
  const auto sid = static_cast<long long>(e.id);

  AttentionRecord r;
  r.sentence_id = e.id;
  r.tokens = e.tokens;
  r.words = e.words;
  r.alignment = e.alignment;
  r.num_layers = manifest.num_layers;
  r.num_heads = manifest.num_heads;
  if (r.tokens.empty()) throw AttentionFormatError(Kind::shape, sid, "sentence has no tokens");
  validate_alignment(r.alignment, r.token_count(), sid);

  const fs::path path = dump_dir / e.tensor_file;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AttentionFormatError(Kind::missing_file, sid, path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const std::size_t expected = r.num_layers * r.num_heads * slice_size(r.token_count()) * sizeof(float);
  if (bytes.size() != expected) {
    throw AttentionFormatError(Kind::byte_length, sid,
                               fmt::format("{} has {} bytes, expected {} for [{}, {}, {}, {}] float32",
                                           path.filename().string(), bytes.size(), expected, r.num_layers,
                                           r.num_heads, r.token_count(), r.token_count()));
  }
  decode_le_floats(bytes, r.tensor);
  validate_rows(r);
  return r;
}

CorpusReader::CorpusReader(fs::path dump_dir) : dir_(std::move(dump_dir)), manifest_(read_manifest(dir_)) {}

std::optional<AttentionRecord> CorpusReader::next() {
  if (cursor_ >= manifest_.sentences.size()) return std::nullopt;
  return load_record(dir_, manifest_, cursor_++);
}

void write_corpus(const fs::path& dump_dir, const std::string& model, std::size_t num_layers, std::size_t num_heads,
                  std::span<const AttentionRecord> records) {
  fs::create_directories(dump_dir);
  json sentences = json::array();
  for (const auto& r : records) {
    const std::size_t expected = num_layers * num_heads * slice_size(r.token_count());
    if (r.tensor.size() != expected) {
      throw InvariantError(fmt::format("sentence {}: tensor holds {} values, expected {}", r.sentence_id,
                                       r.tensor.size(), expected));
    }
    const std::string file = fmt::format("{}.bin", r.sentence_id);
    json alignment = json::array();
    for (const auto& seg : r.alignment) alignment.push_back({seg.first, seg.last});
    sentences.push_back({{"id", r.sentence_id},
                         {"tokens", r.tokens},
                         {"words", r.words},
                         {"alignment", alignment},
                         {"tensor_file", file}});

    const auto bytes = encode_le_floats(r.tensor);
    std::ofstream out(dump_dir / file, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("cannot write " + (dump_dir / file).string());
  }
  const json doc = {{"model", model}, {"num_layers", num_layers}, {"num_heads", num_heads}, {"sentences", sentences}};
  std::ofstream out(dump_dir / "manifest.json", std::ios::trunc);
  out << doc.dump(1) << '\n';
  if (!out) throw InputError("cannot write " + (dump_dir / "manifest.json").string());
}

WordAttentionMatrix merge_subwords(const AttentionRecord& record, std::size_t layer, std::size_t head) {
  const auto slice = record.slice(layer, head);
  const std::size_t t = record.token_count();
  const std::size_t n = record.alignment.size();

  // Row merge: n x T.
  std::vector<double> rows(n * t, 0.0);
  for (std::size_t w = 0; w < n; ++w) {
    const auto [first, last] = record.alignment[w];
    const double inv = 1.0 / static_cast<double>(last - first + 1);
    for (std::size_t tok = first - 1; tok < last; ++tok) {
      for (std::size_t j = 0; j < t; ++j) rows[w * t + j] += slice[tok * t + j];
    }
    for (std::size_t j = 0; j < t; ++j) rows[w * t + j] *= inv;
  }

  // Column merge: n x n.
  WordAttentionMatrix m;
  m.words = record.words;
  m.size = n;
  m.values.assign(n * n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto [first, last] = record.alignment[v];
    const double inv = 1.0 / static_cast<double>(last - first + 1);
    for (std::size_t w = 0; w < n; ++w) {
      double acc = 0.0;
      for (std::size_t tok = first - 1; tok < last; ++tok) acc += rows[w * t + tok];
      m.values[w * n + v] = acc * inv;
    }
  }

  for (std::size_t w = 0; w < n; ++w) {
    double sum = 0.0;
    for (std::size_t v = 0; v < n; ++v) sum += m.values[w * n + v];
    if (!(sum > 0.0)) {
      throw InvariantError(fmt::format("sentence {}: merged row {} has no attention mass", record.sentence_id, w + 1));
    }
    for (std::size_t v = 0; v < n; ++v) m.values[w * n + v] /= sum;
  }
  return m;
}

}  // namespace attnparse
