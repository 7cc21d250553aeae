#include "attnparse/error.hpp"

#include <fmt/format.h>

namespace attnparse {

ParseError::ParseError(std::string detail, std::size_t line, std::size_t column, std::string file)
    : InputError(file.empty() ? fmt::format("{}:{}: {}", line, column, detail)
                              : fmt::format("{}:{}:{}: {}", file, line, column, detail)),
      detail_(std::move(detail)),
      line_(line),
      column_(column),
      file_(std::move(file)) {}

AttentionFormatError::AttentionFormatError(Kind kind, long long sentence_id, const std::string& detail)
    : InputError(sentence_id < 0
                     ? fmt::format("{}: {}", to_string(kind), detail)
                     : fmt::format("sentence {}: {}: {}", sentence_id, to_string(kind), detail)),
      kind_(kind),
      sentence_id_(sentence_id) {}

const char* to_string(AttentionFormatError::Kind kind) noexcept {
  switch (kind) {
    case AttentionFormatError::Kind::missing_file: return "missing file";
    case AttentionFormatError::Kind::manifest: return "manifest error";
    case AttentionFormatError::Kind::shape: return "shape mismatch";
    case AttentionFormatError::Kind::byte_length: return "byte-length mismatch";
    case AttentionFormatError::Kind::row_sum: return "row-sum violation";
    case AttentionFormatError::Kind::alignment: return "alignment error";
  }
  return "attention format error";
}

ConfigError::ConfigError(std::string field, const std::string& detail)
    : InputError(fmt::format("invalid {}: {}", field, detail)), field_(std::move(field)) {}

}  // namespace attnparse
