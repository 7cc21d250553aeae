#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace attnparse {

// Bad or inconsistent input data: malformed files, shape mismatches, bad
// configuration. Command-line tools map this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed bracketed treebank text. Line and column are 1-based.
class ParseError : public InputError {
 public:
  ParseError(std::string detail, std::size_t line, std::size_t column, std::string file = {});

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& file() const noexcept { return file_; }

 private:
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
  std::string file_;
};

// Problems found while reading an attention dump.
class AttentionFormatError : public InputError {
 public:
  enum class Kind {
    missing_file,
    manifest,
    shape,
    byte_length,
    row_sum,
    alignment,
  };

  // sentence_id is -1 for manifest-level problems.
  AttentionFormatError(Kind kind, long long sentence_id, const std::string& detail);

  Kind kind() const noexcept { return kind_; }
  long long sentence_id() const noexcept { return sentence_id_; }

 private:
  Kind kind_;
  long long sentence_id_;
};

const char* to_string(AttentionFormatError::Kind kind) noexcept;

// Invalid configuration value; field() names the offending setting.
class ConfigError : public InputError {
 public:
  ConfigError(std::string field, const std::string& detail);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A computed result broke one of its own invariants. Exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace attnparse
