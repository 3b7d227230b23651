// Copyright 2026 The biasgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BIASGEN_ERROR_HPP_
#define BIASGEN_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace biasgen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem / stream failures. CLI exit code 4.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invalid records, invariant breaches, exhausted pools. CLI exit code 3.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed file content, reported with path and 1-based line number.
class SchemaError : public DataError {
 public:
  SchemaError(const std::string& path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Bad or inconsistent pipeline configuration. CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace biasgen

#endif  // BIASGEN_ERROR_HPP_
