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

#ifndef BIASGEN_IO_HPP_
#define BIASGEN_IO_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace biasgen {

// Line-oriented reader with transparent gzip decompression for paths
// ending in ".gz". Lines are `\n`-terminated; the terminator is stripped.
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  ~LineReader();
  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Returns false at end of input. `line_number()` is 1-based and refers
  // to the last line returned.
  bool next(std::string& line);
  std::size_t line_number() const;
  const std::string& path() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Line-oriented writer, gzip-compressing when the path ends in ".gz".
// Appends a `\n` after every line.
class LineWriter {
 public:
  explicit LineWriter(const std::string& path);
  ~LineWriter();
  LineWriter(LineWriter&&) noexcept;
  LineWriter& operator=(LineWriter&&) noexcept;
  LineWriter(const LineWriter&) = delete;
  LineWriter& operator=(const LineWriter&) = delete;

  void write_line(std::string_view line);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void for_each_line(const std::string& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);
std::uint64_t count_lines(const std::string& path);

// FNV-1a over raw file bytes; used for run manifests and determinism checks.
std::uint64_t file_digest(const std::string& path);
std::string digest_hex(std::uint64_t digest);

// Splits a TSV line on tabs. Empty fields are preserved.
std::vector<std::string_view> split_tsv(std::string_view line);

// Shortest round-trip decimal form of a double (via std::to_chars).
std::string format_double(double value);
double parse_double(std::string_view text, bool& ok);
bool parse_uint64(std::string_view text, std::uint64_t& out);
bool parse_int64(std::string_view text, std::int64_t& out);

// Runs fn(shard_index, begin, end) over shard_count contiguous chunks of
// [0, item_count), one thread per shard. Callers merge per-shard state in
// shard-index order to keep results bit-deterministic.
void parallel_shards(std::size_t item_count, int shard_count,
                     const std::function<void(int, std::size_t, std::size_t)>& fn);

}  // namespace biasgen

#endif  // BIASGEN_IO_HPP_
