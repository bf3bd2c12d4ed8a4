#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy shared by every module. All library failures derive from
// seq2api::error so the CLI can map them to a single exit class.

namespace seq2api {

class error : public std::runtime_error {
 public:
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension or shape disagreement between numeric operands.
class shape_error : public error {
 public:
  using error::error;
};

// Invalid argument value or empty input where content is required.
class value_error : public error {
 public:
  using error::error;
};

// Token/array index outside the valid range.
class index_error : public error {
 public:
  using error::error;
};

// Source-text syntax problem, with 1-based position.
class parse_error : public error {
 public:
  parse_error(const std::string& msg, int line, int col)
      : error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// Malformed data file (corpus, vocabulary, checkpoint payload).
class format_error : public error {
 public:
  using error::error;
};

// Checkpoint written by an incompatible format version.
class version_error : public format_error {
 public:
  using format_error::format_error;
};

// File ended before the advertised payload was complete.
class truncated_error : public format_error {
 public:
  using format_error::format_error;
};

// Stored content hash disagrees with the data actually loaded.
class hash_error : public format_error {
 public:
  using format_error::format_error;
};

// Filesystem-level failure (missing path, unwritable output).
class io_error : public error {
 public:
  using error::error;
};

// Bad key or unparsable value in a key=value config file.
class config_error : public error {
 public:
  using error::error;
};

}  // namespace seq2api
