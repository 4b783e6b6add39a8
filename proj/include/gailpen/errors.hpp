#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gailpen {

// Raised when an operation needs a free slot but the state already holds
// horizon() points.
class episode_complete : public std::logic_error {
 public:
  explicit episode_complete(const std::string& what) : std::logic_error(what) {}
};

// Input text could not be parsed; line() is 1-based.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class io_error : public std::runtime_error {
 public:
  io_error(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A training update produced a non-finite loss or target.
class train_error : public std::runtime_error {
 public:
  explicit train_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gailpen
