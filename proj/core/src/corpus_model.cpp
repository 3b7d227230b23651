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

#include "biasgen/corpus_model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "biasgen/error.hpp"
#include "biasgen/io.hpp"

namespace biasgen {

namespace {

constexpr char kKeySeparator = ';';

// Throws DataError; table readers convert to SchemaError with line info.
void check(bool ok, const std::string& msg) {
  if (!ok) throw DataError(msg);
}

std::string encode_tag_rle(const std::vector<int>& tags) {
  std::string out;
  std::size_t i = 0;
  while (i < tags.size()) {
    std::size_t j = i;
    while (j < tags.size() && tags[j] == tags[i]) ++j;
    if (!out.empty()) out.push_back(',');
    out += std::to_string(tags[i]);
    out.push_back('x');
    out += std::to_string(j - i);
    i = j;
  }
  return out;
}

std::vector<int> decode_tag_rle(std::string_view rle) {
  std::vector<int> tags;
  if (rle.empty()) return tags;
  std::size_t start = 0;
  while (start <= rle.size()) {
    std::size_t comma = rle.find(',', start);
    std::string_view run = rle.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    std::size_t x = run.find('x');
    check(x != std::string_view::npos, "malformed tag run '" + std::string(run) + "'");
    std::int64_t value = 0;
    std::uint64_t length = 0;
    check(parse_int64(run.substr(0, x), value) &&
              parse_uint64(run.substr(x + 1), length) && length > 0,
          "malformed tag run '" + std::string(run) + "'");
    tags.insert(tags.end(), length, static_cast<int>(value));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return tags;
}

std::string encode_span(const Span& s) {
  return std::to_string(s.begin) + "-" + std::to_string(s.end);
}

Span decode_span(std::string_view text) {
  std::size_t dash = text.find('-');
  check(dash != std::string_view::npos, "malformed span '" + std::string(text) + "'");
  std::uint64_t b = 0, e = 0;
  check(parse_uint64(text.substr(0, dash), b) &&
            parse_uint64(text.substr(dash + 1), e) && b <= e,
        "malformed span '" + std::string(text) + "'");
  return Span{static_cast<std::size_t>(b), static_cast<std::size_t>(e)};
}

std::string validated_text_field(std::string_view field) {
  check(utf8_decode(field).has_value(), "invalid UTF-8 in text field");
  return std::string(field);
}

CorruptionPair parse_corruption_pair(std::span<const std::string_view> fields) {
  check(fields.size() == 4, "expected 4 columns, got " + std::to_string(fields.size()));
  CorruptionPair rec;
  rec.orig = Phrase::parse(fields[0]);
  rec.recog = Phrase::parse(fields[1]);
  check(parse_uint64(fields[2], rec.count), "invalid count '" + std::string(fields[2]) + "'");
  check(rec.count >= 1, "count must be >= 1");
  rec.source_id = std::string(fields[3]);
  check(is_valid_source_id(rec.source_id), "invalid source_id '" + rec.source_id + "'");
  return rec;
}

ParagraphRecord parse_paragraph_record(std::span<const std::string_view> fields) {
  check(fields.size() == 3, "expected 3 columns, got " + std::to_string(fields.size()));
  std::int64_t id = 0;
  check(parse_int64(fields[0], id), "invalid paragraph_id '" + std::string(fields[0]) + "'");
  std::vector<Phrase> keys;
  std::string_view key_list = fields[1];
  std::size_t start = 0;
  while (start <= key_list.size()) {
    std::size_t pos = key_list.find(kKeySeparator, start);
    std::string_view key = key_list.substr(
        start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    if (!key.empty()) keys.push_back(Phrase::parse(key));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  check(!keys.empty(), "paragraph record with empty key list");
  std::string text = validated_text_field(fields[2]);

  ParagraphRecord rec;
  rec.paragraph_id = id;
  rec.text = text;
  rec.occurrences = find_key_occurrences(rec.text, keys);
  std::set<std::string> found;
  for (const auto& occ : rec.occurrences) found.insert(occ.key.text);
  for (const auto& key : keys) {
    check(found.contains(key.text), "listed key '" + key.text + "' not found in text");
  }
  return rec;
}

RelatedPair parse_related_pair(std::span<const std::string_view> fields) {
  check(fields.size() == 3, "expected 3 columns, got " + std::to_string(fields.size()));
  RelatedPair rec;
  rec.key = Phrase::parse(fields[0]);
  rec.related = Phrase::parse(fields[1]);
  check(rec.key.text != rec.related.text, "key equals related phrase");
  bool ok = false;
  rec.similarity = parse_double(fields[2], ok);
  check(ok, "invalid similarity '" + std::string(fields[2]) + "'");
  check(rec.similarity > 0.0 && rec.similarity < 1.0, "similarity out of (0,1)");
  return rec;
}

FalsePositivePair parse_false_positive(std::span<const std::string_view> fields) {
  check(fields.size() == 3, "expected 3 columns, got " + std::to_string(fields.size()));
  FalsePositivePair rec;
  rec.ngram = Phrase::parse(fields[0]);
  rec.phrase = Phrase::parse(fields[1]);
  check(rec.ngram.text != rec.phrase.text, "ngram equals phrase");
  check(parse_uint64(fields[2], rec.support), "invalid support '" + std::string(fields[2]) + "'");
  check(rec.support >= 1, "support must be >= 1");
  return rec;
}

TrainingExample parse_training_example(std::span<const std::string_view> fields) {
  check(fields.size() >= 5, "expected >= 5 columns, got " + std::to_string(fields.size()));
  TrainingExample ex;
  ex.original_snippet = validated_text_field(fields[0]);
  ex.corrupted_snippet = validated_text_field(fields[1]);

  std::string_view subs = fields[2];
  std::size_t start = 0;
  while (!subs.empty() && start <= subs.size()) {
    std::size_t pos = subs.find(';', start);
    std::string_view item = subs.substr(
        start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    if (!item.empty()) {
      // ostart-oend:cstart-cend:orig:corrupted
      std::vector<std::string_view> parts;
      std::size_t p = 0;
      while (p <= item.size()) {
        std::size_t colon = item.find(':', p);
        parts.push_back(item.substr(
            p, colon == std::string_view::npos ? std::string_view::npos : colon - p));
        if (colon == std::string_view::npos) break;
        p = colon + 1;
      }
      check(parts.size() == 4, "malformed substitution '" + std::string(item) + "'");
      Substitution sub;
      sub.orig_span = decode_span(parts[0]);
      sub.corrupted_span = decode_span(parts[1]);
      sub.orig_phrase = Phrase::parse(parts[2]);
      sub.corrupted_phrase = Phrase::parse(parts[3]);
      ex.substitutions.push_back(std::move(sub));
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }

  for (std::size_t i = 3; i + 1 < fields.size(); ++i) {
    std::string_view col = fields[i];
    std::size_t colon = col.find(':');
    check(colon != std::string_view::npos, "malformed candidate '" + std::string(col) + "'");
    auto label = candidate_label_from_name(col.substr(0, colon));
    check(label.has_value(), "unknown candidate label in '" + std::string(col) + "'");
    ex.candidates.push_back(Candidate{Phrase::parse(col.substr(colon + 1)), *label});
  }

  ex.char_tags = decode_tag_rle(fields.back());
  ex.no_correct_candidate =
      std::none_of(ex.candidates.begin(), ex.candidates.end(), [](const Candidate& c) {
        return c.label == CandidateLabel::kPositive;
      });
  validate_training_example(ex);
  return ex;
}

template <typename Record, typename ParseFn>
void for_each_record(const std::string& path, ParseFn parse,
                     const std::function<void(Record&&)>& fn) {
  LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    try {
      auto fields = split_tsv(line);
      fn(parse(fields));
    } catch (const SchemaError&) {
      throw;
    } catch (const DataError& e) {
      throw SchemaError(path, reader.line_number(), e.what());
    }
  }
}

template <typename Record>
void write_records(const std::string& path, std::span<const Record> records) {
  LineWriter writer(path);
  for (const auto& rec : records) writer.write_line(to_tsv_row(rec));
  writer.close();
}

}  // namespace

Phrase Phrase::parse(std::string_view raw) {
  auto parsed = try_parse(raw);
  if (!parsed) {
    throw DataError("invalid phrase '" + std::string(raw) + "'");
  }
  return std::move(*parsed);
}

std::optional<Phrase> Phrase::try_parse(std::string_view raw) {
  std::string text = ascii_lower_copy(collapse_whitespace(raw));
  if (text.empty()) return std::nullopt;
  int words = 1;
  for (char c : text) {
    auto u = static_cast<char32_t>(static_cast<unsigned char>(c));
    if (!is_phrase_char(u)) return std::nullopt;
    if (c == ' ') ++words;
  }
  return Phrase{std::move(text), words};
}

bool is_valid_source_id(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::vector<Occurrence> find_key_occurrences(std::string_view text,
                                             std::span<const Phrase> keys) {
  std::u32string original = utf8_decode_or_throw(text, "paragraph text");
  std::u32string lowered = ascii_lower_copy(original);
  std::vector<Occurrence> out;
  for (const auto& key : keys) {
    std::u32string pattern = utf8_decode_or_throw(key.text, "key");
    if (pattern.empty() || pattern.size() > lowered.size()) continue;
    std::size_t from = 0;
    while (true) {
      std::size_t pos = lowered.find(pattern, from);
      if (pos == std::u32string::npos) break;
      std::size_t end = pos + pattern.size();
      bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
      bool right_ok = end == lowered.size() || !is_word_char(lowered[end]);
      if (left_ok && right_ok) {
        out.push_back(Occurrence{key, Span{pos, end},
                                 is_ascii_upper_alpha(original[pos])});
      }
      from = pos + 1;
    }
  }
  std::sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    if (a.span.length() != b.span.length()) return a.span.length() > b.span.length();
    return a.key.text < b.key.text;
  });
  return out;
}

ParagraphRecord ParagraphRecord::build(std::int64_t id, std::string_view text,
                                       std::span<const Phrase> keys) {
  ParagraphRecord rec;
  rec.paragraph_id = id;
  rec.text = collapse_whitespace(text);
  rec.occurrences = find_key_occurrences(rec.text, keys);
  return rec;
}

std::vector<Phrase> ParagraphRecord::key_set() const {
  std::set<std::string> seen;
  for (const auto& occ : occurrences) seen.insert(occ.key.text);
  std::vector<Phrase> keys;
  keys.reserve(seen.size());
  for (const auto& text : seen) keys.push_back(Phrase::parse(text));
  return keys;
}

std::string_view candidate_label_name(CandidateLabel label) {
  switch (label) {
    case CandidateLabel::kPositive: return "positive";
    case CandidateLabel::kRandom: return "random";
    case CandidateLabel::kRelated: return "related";
    case CandidateLabel::kFalsePositive: return "false_positive";
  }
  return "random";
}

std::optional<CandidateLabel> candidate_label_from_name(std::string_view name) {
  if (name == "positive") return CandidateLabel::kPositive;
  if (name == "random") return CandidateLabel::kRandom;
  if (name == "related") return CandidateLabel::kRelated;
  if (name == "false_positive") return CandidateLabel::kFalsePositive;
  return std::nullopt;
}

void validate_training_example(const TrainingExample& ex) {
  std::u32string original = utf8_decode_or_throw(ex.original_snippet, "original snippet");
  std::u32string corrupted = utf8_decode_or_throw(ex.corrupted_snippet, "corrupted snippet");

  check(!ex.candidates.empty(), "example without candidates");
  std::unordered_set<std::string> texts;
  bool has_positive = false;
  for (const auto& cand : ex.candidates) {
    check(texts.insert(cand.phrase.text).second,
          "duplicate candidate '" + cand.phrase.text + "'");
    has_positive |= cand.label == CandidateLabel::kPositive;
  }
  check(ex.no_correct_candidate == !has_positive,
        "no_correct_candidate flag inconsistent with candidate labels");

  check(ex.char_tags.size() == corrupted.size(),
        "char_tags length does not match corrupted snippet");
  for (int tag : ex.char_tags) {
    check(tag >= 0 && tag <= static_cast<int>(ex.candidates.size()),
          "char tag out of range");
  }

  std::vector<int> expected(corrupted.size(), 0);
  std::vector<Span> corrupted_spans;
  for (const auto& sub : ex.substitutions) {
    check(sub.orig_span.end <= original.size(), "orig_span out of bounds");
    check(sub.corrupted_span.end <= corrupted.size(), "corrupted_span out of bounds");
    auto orig_slice = ascii_lower_copy(
        std::u32string_view(original).substr(sub.orig_span.begin, sub.orig_span.length()));
    check(utf8_encode(orig_slice) == sub.orig_phrase.text,
          "orig_span text does not match orig_phrase");
    auto corr_slice = ascii_lower_copy(std::u32string_view(corrupted).substr(
        sub.corrupted_span.begin, sub.corrupted_span.length()));
    check(utf8_encode(corr_slice) == sub.corrupted_phrase.text,
          "corrupted_span text does not match corrupted_phrase");
    for (const auto& prev : corrupted_spans) {
      check(!prev.overlaps(sub.corrupted_span), "overlapping substitution spans");
    }
    corrupted_spans.push_back(sub.corrupted_span);

    if (!ex.no_correct_candidate) {
      int tag = 0;
      for (std::size_t i = 0; i < ex.candidates.size(); ++i) {
        if (ex.candidates[i].label == CandidateLabel::kPositive &&
            ex.candidates[i].phrase.text == sub.orig_phrase.text) {
          tag = static_cast<int>(i) + 1;
          break;
        }
      }
      check(tag != 0, "substituted phrase '" + sub.orig_phrase.text +
                          "' missing from positive candidates");
      for (std::size_t p = sub.corrupted_span.begin; p < sub.corrupted_span.end; ++p) {
        expected[p] = tag;
      }
    }
  }
  check(expected == ex.char_tags, "char_tags inconsistent with substitutions");
}

std::optional<double> IdfTable::phrase_idf(std::string_view phrase) const {
  auto it = scores.find(std::string(phrase));
  if (it == scores.end()) return std::nullopt;
  return it->second;
}

std::optional<double> IdfTable::word_idf(std::string_view word) const {
  auto it = word_scores.find(std::string(word));
  if (it == word_scores.end()) return std::nullopt;
  return it->second;
}

void write_idf_table(const std::string& path, const IdfTable& table) {
  LineWriter writer(path);
  writer.write_line("D\t" + std::to_string(table.doc_count));
  std::map<std::string_view, double> sorted(table.scores.begin(), table.scores.end());
  for (const auto& [phrase, score] : sorted) {
    writer.write_line("P\t" + std::string(phrase) + "\t" + format_double(score));
  }
  sorted.clear();
  sorted.insert(table.word_scores.begin(), table.word_scores.end());
  for (const auto& [word, score] : sorted) {
    writer.write_line("W\t" + std::string(word) + "\t" + format_double(score));
  }
  writer.close();
}

IdfTable read_idf_table(const std::string& path) {
  IdfTable table;
  bool saw_doc_count = false;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split_tsv(line);
    try {
      check(fields.size() >= 2, "expected >= 2 columns");
      if (fields[0] == "D") {
        check(parse_uint64(fields[1], table.doc_count), "invalid doc count");
        saw_doc_count = true;
        return;
      }
      check(fields.size() == 3, "expected 3 columns");
      bool ok = false;
      double score = parse_double(fields[2], ok);
      check(ok, "invalid score");
      if (fields[0] == "P") {
        table.scores.emplace(std::string(fields[1]), score);
      } else if (fields[0] == "W") {
        table.word_scores.emplace(std::string(fields[1]), score);
      } else {
        check(false, "unknown row kind '" + std::string(fields[0]) + "'");
      }
    } catch (const DataError& e) {
      throw SchemaError(path, line_no, e.what());
    }
  });
  if (!saw_doc_count) throw SchemaError(path, 0, "missing doc-count row");
  return table;
}

std::string_view table_kind_name(TableKind kind) {
  switch (kind) {
    case TableKind::kKeys2Paragraph: return "keys2paragraph";
    case TableKind::kKeys2Corruptions: return "keys2corruptions";
    case TableKind::kKeys2Related: return "keys2related";
    case TableKind::kFalsePositives: return "falsepositives";
    case TableKind::kExamples: return "examples";
  }
  return "";
}

std::optional<TableKind> table_kind_from_name(std::string_view name) {
  if (name == "keys2paragraph") return TableKind::kKeys2Paragraph;
  if (name == "keys2corruptions") return TableKind::kKeys2Corruptions;
  if (name == "keys2related") return TableKind::kKeys2Related;
  if (name == "falsepositives") return TableKind::kFalsePositives;
  if (name == "examples") return TableKind::kExamples;
  return std::nullopt;
}

std::string to_tsv_row(const CorruptionPair& rec) {
  return rec.orig.text + "\t" + rec.recog.text + "\t" + std::to_string(rec.count) +
         "\t" + rec.source_id;
}

std::string to_tsv_row(const ParagraphRecord& rec) {
  std::string keys;
  for (const auto& key : rec.key_set()) {
    if (!keys.empty()) keys.push_back(kKeySeparator);
    keys += key.text;
  }
  return std::to_string(rec.paragraph_id) + "\t" + keys + "\t" + rec.text;
}

std::string to_tsv_row(const RelatedPair& rec) {
  return rec.key.text + "\t" + rec.related.text + "\t" + format_double(rec.similarity);
}

std::string to_tsv_row(const FalsePositivePair& rec) {
  return rec.ngram.text + "\t" + rec.phrase.text + "\t" + std::to_string(rec.support);
}

std::string to_tsv_row(const TrainingExample& rec) {
  validate_training_example(rec);
  std::string subs;
  for (const auto& sub : rec.substitutions) {
    if (!subs.empty()) subs.push_back(';');
    subs += encode_span(sub.orig_span) + ":" + encode_span(sub.corrupted_span) + ":" +
            sub.orig_phrase.text + ":" + sub.corrupted_phrase.text;
  }
  std::string row = rec.original_snippet + "\t" + rec.corrupted_snippet + "\t" + subs;
  for (const auto& cand : rec.candidates) {
    row += "\t";
    row += candidate_label_name(cand.label);
    row += ":";
    row += cand.phrase.text;
  }
  row += "\t" + encode_tag_rle(rec.char_tags);
  return row;
}

void for_each_corruption_pair(const std::string& path,
                              const std::function<void(CorruptionPair&&)>& fn) {
  for_each_record<CorruptionPair>(path, parse_corruption_pair, fn);
}
void for_each_paragraph_record(const std::string& path,
                               const std::function<void(ParagraphRecord&&)>& fn) {
  for_each_record<ParagraphRecord>(path, parse_paragraph_record, fn);
}
void for_each_related_pair(const std::string& path,
                           const std::function<void(RelatedPair&&)>& fn) {
  for_each_record<RelatedPair>(path, parse_related_pair, fn);
}
void for_each_false_positive(const std::string& path,
                             const std::function<void(FalsePositivePair&&)>& fn) {
  for_each_record<FalsePositivePair>(path, parse_false_positive, fn);
}
void for_each_training_example(const std::string& path,
                               const std::function<void(TrainingExample&&)>& fn) {
  for_each_record<TrainingExample>(path, parse_training_example, fn);
}

std::vector<CorruptionPair> read_corruption_pairs(const std::string& path) {
  std::vector<CorruptionPair> out;
  for_each_corruption_pair(path, [&](CorruptionPair&& rec) { out.push_back(std::move(rec)); });
  return out;
}
std::vector<ParagraphRecord> read_paragraph_records(const std::string& path) {
  std::vector<ParagraphRecord> out;
  for_each_paragraph_record(path, [&](ParagraphRecord&& rec) { out.push_back(std::move(rec)); });
  return out;
}
std::vector<RelatedPair> read_related_pairs(const std::string& path) {
  std::vector<RelatedPair> out;
  for_each_related_pair(path, [&](RelatedPair&& rec) { out.push_back(std::move(rec)); });
  return out;
}
std::vector<FalsePositivePair> read_false_positives(const std::string& path) {
  std::vector<FalsePositivePair> out;
  for_each_false_positive(path, [&](FalsePositivePair&& rec) { out.push_back(std::move(rec)); });
  return out;
}
std::vector<TrainingExample> read_training_examples(const std::string& path) {
  std::vector<TrainingExample> out;
  for_each_training_example(path, [&](TrainingExample&& rec) { out.push_back(std::move(rec)); });
  return out;
}

void write_corruption_pairs(const std::string& path, std::span<const CorruptionPair> recs) {
  write_records(path, recs);
}
void write_paragraph_records(const std::string& path, std::span<const ParagraphRecord> recs) {
  write_records(path, recs);
}
void write_related_pairs(const std::string& path, std::span<const RelatedPair> recs) {
  write_records(path, recs);
}
void write_false_positives(const std::string& path, std::span<const FalsePositivePair> recs) {
  write_records(path, recs);
}
void write_training_examples(const std::string& path, std::span<const TrainingExample> recs) {
  write_records(path, recs);
}

void read_table(const std::string& path, TableKind kind,
                const std::function<void(TableRecord&&)>& sink) {
  switch (kind) {
    case TableKind::kKeys2Corruptions:
      for_each_corruption_pair(path, [&](CorruptionPair&& r) { sink(TableRecord(std::move(r))); });
      break;
    case TableKind::kKeys2Paragraph:
      for_each_paragraph_record(path, [&](ParagraphRecord&& r) { sink(TableRecord(std::move(r))); });
      break;
    case TableKind::kKeys2Related:
      for_each_related_pair(path, [&](RelatedPair&& r) { sink(TableRecord(std::move(r))); });
      break;
    case TableKind::kFalsePositives:
      for_each_false_positive(path, [&](FalsePositivePair&& r) { sink(TableRecord(std::move(r))); });
      break;
    case TableKind::kExamples:
      for_each_training_example(path, [&](TrainingExample&& r) { sink(TableRecord(std::move(r))); });
      break;
  }
}

void write_table(const std::string& path, TableKind kind,
                 std::span<const TableRecord> records) {
  LineWriter writer(path);
  for (const auto& rec : records) {
    const bool kind_ok =
        (kind == TableKind::kKeys2Corruptions && std::holds_alternative<CorruptionPair>(rec)) ||
        (kind == TableKind::kKeys2Paragraph && std::holds_alternative<ParagraphRecord>(rec)) ||
        (kind == TableKind::kKeys2Related && std::holds_alternative<RelatedPair>(rec)) ||
        (kind == TableKind::kFalsePositives && std::holds_alternative<FalsePositivePair>(rec)) ||
        (kind == TableKind::kExamples && std::holds_alternative<TrainingExample>(rec));
    if (!kind_ok) {
      throw DataError(std::string("record type does not match table kind ") +
                      std::string(table_kind_name(kind)));
    }
    writer.write_line(std::visit([](const auto& r) { return to_tsv_row(r); }, rec));
  }
  writer.close();
}

}  // namespace biasgen
