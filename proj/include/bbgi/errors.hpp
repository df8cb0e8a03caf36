#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bbgi {

class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyLanguage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedInput : public std::runtime_error {
 public:
  MalformedInput(const std::string& what, std::size_t line, std::size_t offset)
      : std::runtime_error("line " + std::to_string(line) + ", offset " + std::to_string(offset) +
                           ": " + what),
        line_(line),
        offset_(offset) {}

  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

class EmptyCorpus : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bbgi
