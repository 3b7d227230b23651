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

#include "biasgen/io.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>
#include <thread>

#include "biasgen/error.hpp"

namespace biasgen {

namespace {

bool has_gz_suffix(const std::string& path) {
  return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

}  // namespace

struct LineReader::Impl {
  std::string path;
  std::ifstream stream;
  gzFile gz = nullptr;
  std::size_t line_no = 0;
  std::string gz_buffer;

  explicit Impl(const std::string& p) : path(p) {
    if (has_gz_suffix(p)) {
      gz = gzopen(p.c_str(), "rb");
      if (gz == nullptr) throw IoError("cannot open " + p);
    } else {
      stream.open(p, std::ios::binary);
      if (!stream) throw IoError("cannot open " + p);
    }
  }

  ~Impl() {
    if (gz != nullptr) gzclose(gz);
  }

  bool next(std::string& line) {
    if (gz != nullptr) {
      line.clear();
      char buf[4096];
      bool got_any = false;
      while (true) {
        if (gzgets(gz, buf, sizeof(buf)) == nullptr) {
          int err = 0;
          const char* msg = gzerror(gz, &err);
          if (err != 0 && err != Z_STREAM_END) {
            throw IoError("gzip read error in " + path + ": " + msg);
          }
          break;
        }
        got_any = true;
        line.append(buf);
        if (!line.empty() && line.back() == '\n') {
          line.pop_back();
          break;
        }
      }
      if (!got_any) return false;
      ++line_no;
      return true;
    }
    if (!std::getline(stream, line)) {
      if (stream.bad()) throw IoError("read error in " + path);
      return false;
    }
    ++line_no;
    return true;
  }
};

LineReader::LineReader(const std::string& path) : impl_(std::make_unique<Impl>(path)) {}
LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next(std::string& line) { return impl_->next(line); }
std::size_t LineReader::line_number() const { return impl_->line_no; }
const std::string& LineReader::path() const { return impl_->path; }

struct LineWriter::Impl {
  std::string path;
  std::ofstream stream;
  gzFile gz = nullptr;

  explicit Impl(const std::string& p) : path(p) {
    if (has_gz_suffix(p)) {
      gz = gzopen(p.c_str(), "wb");
      if (gz == nullptr) throw IoError("cannot open " + p + " for writing");
    } else {
      stream.open(p, std::ios::binary | std::ios::trunc);
      if (!stream) throw IoError("cannot open " + p + " for writing");
    }
  }

  ~Impl() {
    try {
      close();
    } catch (...) {
      // errors on an unclosed writer surface via explicit close()
    }
  }

  void write_line(std::string_view line) {
    if (gz != nullptr) {
      if (gzwrite(gz, line.data(), static_cast<unsigned>(line.size())) !=
              static_cast<int>(line.size()) ||
          gzwrite(gz, "\n", 1) != 1) {
        throw IoError("gzip write error in " + path);
      }
      return;
    }
    stream.write(line.data(), static_cast<std::streamsize>(line.size()));
    stream.put('\n');
    if (!stream) throw IoError("write error in " + path);
  }

  void close() {
    if (gz != nullptr) {
      gzclose(gz);
      gz = nullptr;
    }
    if (stream.is_open()) {
      stream.close();
      if (stream.fail()) throw IoError("close error in " + path);
    }
  }
};

LineWriter::LineWriter(const std::string& path) : impl_(std::make_unique<Impl>(path)) {}
LineWriter::~LineWriter() = default;
LineWriter::LineWriter(LineWriter&&) noexcept = default;
LineWriter& LineWriter::operator=(LineWriter&&) noexcept = default;

void LineWriter::write_line(std::string_view line) { impl_->write_line(line); }
void LineWriter::close() { impl_->close(); }

void for_each_line(const std::string& path,
                   const std::function<void(std::string_view, std::size_t)>& fn) {
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    fn(line, reader.line_number());
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> lines;
  for_each_line(path, [&](std::string_view line, std::size_t) {
    lines.emplace_back(line);
  });
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  LineWriter writer(path);
  for (const auto& line : lines) writer.write_line(line);
  writer.close();
}

std::uint64_t count_lines(const std::string& path) {
  std::uint64_t n = 0;
  for_each_line(path, [&](std::string_view, std::size_t) { ++n; });
  return n;
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  return h;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return std::string(buf);
}

std::vector<std::string_view> split_tsv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw DataError("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, bool& ok) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  ok = (ec == std::errc() && ptr == text.data() + text.size());
  return value;
}

bool parse_uint64(std::string_view text, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_int64(std::string_view text, std::int64_t& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

void parallel_shards(std::size_t item_count, int shard_count,
                     const std::function<void(int, std::size_t, std::size_t)>& fn) {
  if (shard_count < 1) throw ConfigError("shard_count must be >= 1");
  std::size_t shards = static_cast<std::size_t>(shard_count);
  if (shards > item_count && item_count > 0) shards = item_count;
  if (item_count == 0) return;
  if (shards <= 1) {
    fn(0, 0, item_count);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(shards);
  threads.reserve(shards);
  std::size_t chunk = item_count / shards;
  std::size_t rem = item_count % shards;
  std::size_t begin = 0;
  for (std::size_t s = 0; s < shards; ++s) {
    std::size_t size = chunk + (s < rem ? 1 : 0);
    std::size_t end = begin + size;
    threads.emplace_back([&, s, begin, end] {
      try {
        fn(static_cast<int>(s), begin, end);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : threads) t.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace biasgen
