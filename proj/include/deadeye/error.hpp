#pragma once

#include <stdexcept>
#include <string>

namespace deadeye {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document. `path` is a JSON-pointer-like location such as
// "blocks[2].trials[5].condition.set_size".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace deadeye
