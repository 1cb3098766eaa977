#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simhaystack {

// Caller handed us something outside an operation's contract (length
// mismatch, parameter not in the allowed set, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A file or record on disk could not be read or did not parse.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : DataError(what + " (at byte offset " + std::to_string(offset) + ")"),
        message_(what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t offset_;
};

class MissingEmbedding : public DataError {
 public:
  explicit MissingEmbedding(const std::string& image_id)
      : DataError("no embedding loaded for image id '" + image_id + "'"), image_id_(image_id) {}

  const std::string& image_id() const noexcept { return image_id_; }

 private:
  std::string image_id_;
};

}  // namespace simhaystack
