// Copyright 2026 The lexdrift Authors.
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

// Corpus ingestion: JSONL records -> filtered Documents, calendar-month
// segmentation and reproducible sampling.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lexdrift/common.hpp"

namespace lexdrift {

enum class Platform : std::uint8_t { twitter, reddit, facebook, telegram, generic };

inline std::string_view to_string(Platform p) {
  switch (p) {
    case Platform::twitter:
      return "twitter";
    case Platform::reddit:
      return "reddit";
    case Platform::facebook:
      return "facebook";
    case Platform::telegram:
      return "telegram";
    case Platform::generic:
      return "generic";
  }
  return "generic";
}

inline std::optional<Platform> parse_platform(std::string_view s) {
  static constexpr std::array<Platform, 5> kAll = {Platform::twitter, Platform::reddit,
                                                   Platform::facebook, Platform::telegram,
                                                   Platform::generic};
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Platform p : kAll) {
    if (to_string(p) == lower) return p;
  }
  return std::nullopt;
}

using Timestamp = std::chrono::sys_seconds;

// Parses ISO-8601 instants: "YYYY-MM-DD", "YYYY-MM-DDThh:mm[:ss[.fff]]" with
// an optional "Z" or "+hh:mm"/"-hh:mm" suffix (no suffix means UTC). A space
// may replace the 'T'. Fractional seconds are truncated.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  std::size_t pos = 0;
  auto read_int = [&](int digits, int& out) {
    if (pos + digits > s.size()) return false;
    out = 0;
    for (int i = 0; i < digits; ++i) {
      const char c = s[pos + i];
      if (c < '0' || c > '9') return false;
      out = out * 10 + (c - '0');
    }
    pos += digits;
    return true;
  };
  auto expect = [&](char c) {
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  };

  int y, mo, d, h = 0, mi = 0, sec = 0;
  if (!read_int(4, y) || !expect('-') || !read_int(2, mo) || !expect('-') || !read_int(2, d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;

  long offset_seconds = 0;
  if (pos < s.size()) {
    if (!expect('T') && !expect(' ')) return std::nullopt;
    if (!read_int(2, h) || !expect(':') || !read_int(2, mi)) return std::nullopt;
    if (expect(':')) {
      if (!read_int(2, sec)) return std::nullopt;
      if (expect('.')) {
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
      }
    }
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    if (pos < s.size()) {
      if (expect('Z') || expect('z')) {
        // UTC
      } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        ++pos;
        int oh, om = 0;
        if (!read_int(2, oh)) return std::nullopt;
        if (expect(':')) {
          if (!read_int(2, om)) return std::nullopt;
        } else if (pos < s.size() && !read_int(2, om)) {
          return std::nullopt;
        }
        if (oh > 23 || om > 59) return std::nullopt;
        offset_seconds = sign * (oh * 3600L + om * 60L);
      } else {
        return std::nullopt;
      }
    }
    if (pos != s.size()) return std::nullopt;
  }
  const auto day_start = std::chrono::sys_days{ymd};
  return Timestamp{day_start.time_since_epoch()} + std::chrono::hours{h} +
         std::chrono::minutes{mi} + std::chrono::seconds{sec} -
         std::chrono::seconds{offset_seconds};
}

// "YYYY-MM-DDThh:mm:ssZ"
inline std::string format_timestamp(Timestamp ts) {
  const auto day = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                unsigned(ymd.month()), unsigned(ymd.day()), int(hms.hours().count()),
                int(hms.minutes().count()), int(hms.seconds().count()));
  return buf;
}

// Calendar month of a UTC instant, "YYYY-MM".
inline std::string month_label(Timestamp ts) {
  const std::chrono::year_month_day ymd{std::chrono::floor<std::chrono::days>(ts)};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u", int(ymd.year()), unsigned(ymd.month()));
  return buf;
}

struct Document {
  std::string text;
  Timestamp timestamp{};
  Platform platform = Platform::generic;
  bool has_media = false;
  std::uint32_t url_count = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

struct CorpusSegment {
  std::string label;
  std::vector<Document> documents;
};

struct FilterConfig {
  bool drop_media = true;
  bool drop_urls = true;
  std::size_t min_chars = 1;

  static FilterConfig permissive() { return {false, false, 0}; }
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t blank_lines = 0;
  std::size_t emitted = 0;
  std::size_t malformed = 0;
  std::size_t dropped_media = 0;
  std::size_t dropped_urls = 0;
  std::size_t dropped_short = 0;

  IngestStats& operator+=(const IngestStats& o) {
    lines += o.lines;
    blank_lines += o.blank_lines;
    emitted += o.emitted;
    malformed += o.malformed;
    dropped_media += o.dropped_media;
    dropped_urls += o.dropped_urls;
    dropped_short += o.dropped_short;
    return *this;
  }
  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

// A strict-mode ingestion failure; carries the 1-based input line number.
class IngestError : public std::invalid_argument {
 public:
  IngestError(std::size_t line, const std::string& reason)
      : std::invalid_argument("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && is_ascii_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Counts UTF-8 code points (continuation bytes are skipped).
inline std::size_t count_code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace detail

// Streaming ingestion. feed() handles one serialized record and returns the
// Document if it survives the filters; stats() accumulates per-reason counts.
class Ingestor {
 public:
  Ingestor(FilterConfig cfg, bool strict) : cfg_(cfg), strict_(strict) {}

  std::optional<Document> feed(std::string_view line) {
    ++stats_.lines;
    const std::size_t line_no = stats_.lines;
    if (detail::trim_ascii(line).empty()) {
      ++stats_.blank_lines;
      return std::nullopt;
    }
    std::string error;
    std::optional<Document> doc = parse(line, error);
    if (!doc) {
      if (strict_) throw IngestError(line_no, error);
      ++stats_.malformed;
      return std::nullopt;
    }
    if (cfg_.drop_media && doc->has_media) {
      ++stats_.dropped_media;
      return std::nullopt;
    }
    if (cfg_.drop_urls && doc->url_count > 0) {
      ++stats_.dropped_urls;
      return std::nullopt;
    }
    const std::string_view trimmed = detail::trim_ascii(doc->text);
    if (trimmed.empty() || detail::count_code_points(trimmed) < cfg_.min_chars) {
      ++stats_.dropped_short;
      return std::nullopt;
    }
    ++stats_.emitted;
    return doc;
  }

  const IngestStats& stats() const { return stats_; }

 private:
  static std::optional<Document> parse(std::string_view line, std::string& error) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      error = "invalid JSON";
      return std::nullopt;
    }
    if (!j.is_object()) {
      error = "record is not a JSON object";
      return std::nullopt;
    }
    Document doc;
    const auto text = j.find("text");
    if (text == j.end() || !text->is_string()) {
      error = "missing or non-string \"text\" field";
      return std::nullopt;
    }
    doc.text = text->get<std::string>();

    const auto ts = j.find("ts");
    if (ts == j.end() || !ts->is_string()) {
      error = "missing or non-string \"ts\" field";
      return std::nullopt;
    }
    const auto parsed = parse_timestamp(ts->get_ref<const std::string&>());
    if (!parsed) {
      error = "unparseable timestamp '" + ts->get<std::string>() + "'";
      return std::nullopt;
    }
    doc.timestamp = *parsed;

    const auto platform = j.find("platform");
    if (platform == j.end() || !platform->is_string()) {
      error = "missing or non-string \"platform\" field";
      return std::nullopt;
    }
    const auto p = parse_platform(platform->get_ref<const std::string&>());
    if (!p) {
      error = "unknown platform '" + platform->get<std::string>() + "'";
      return std::nullopt;
    }
    doc.platform = *p;

    if (const auto media = j.find("has_media"); media != j.end()) {
      if (!media->is_boolean()) {
        error = "\"has_media\" must be a boolean";
        return std::nullopt;
      }
      doc.has_media = media->get<bool>();
    }
    if (const auto urls = j.find("url_count"); urls != j.end()) {
      if (!urls->is_number_integer() || urls->get<std::int64_t>() < 0 ||
          urls->get<std::int64_t>() > std::int64_t{UINT32_MAX}) {
        error = "\"url_count\" must be a non-negative integer";
        return std::nullopt;
      }
      doc.url_count = static_cast<std::uint32_t>(urls->get<std::int64_t>());
    }
    return doc;
  }

  FilterConfig cfg_;
  bool strict_;
  IngestStats stats_;
};

struct IngestResult {
  std::vector<Document> documents;
  IngestStats stats;
};

inline IngestResult ingest(std::istream& in, const FilterConfig& cfg, bool strict) {
  Ingestor ingestor(cfg, strict);
  IngestResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (auto doc = ingestor.feed(line)) result.documents.push_back(std::move(*doc));
  }
  result.stats = ingestor.stats();
  return result;
}

// Serializes a Document back into the corpus record format.
inline std::string to_jsonl(const Document& doc) {
  nlohmann::json j;
  j["text"] = doc.text;
  j["ts"] = format_timestamp(doc.timestamp);
  j["platform"] = std::string(to_string(doc.platform));
  j["has_media"] = doc.has_media;
  j["url_count"] = doc.url_count;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

// Partitions documents by the UTC calendar month of their timestamp. Input
// order is preserved within each segment.
inline std::map<std::string, CorpusSegment> segment_by_month(std::vector<Document> docs) {
  std::map<std::string, CorpusSegment> segments;
  for (auto& doc : docs) {
    std::string label = month_label(doc.timestamp);
    auto [it, inserted] = segments.try_emplace(label);
    if (inserted) it->second.label = std::move(label);
    it->second.documents.push_back(std::move(doc));
  }
  return segments;
}

// Draws min(n, |segment|) documents uniformly without replacement using a
// seeded partial Fisher-Yates shuffle; the output order is the draw order.
inline CorpusSegment sample(const CorpusSegment& segment, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  const std::size_t size = segment.documents.size();
  const std::size_t take = std::min(n, size);
  std::vector<std::size_t> order(size);
  for (std::size_t i = 0; i < size; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, size - i));
    std::swap(order[i], order[j]);
  }
  CorpusSegment out;
  out.label = segment.label;
  out.documents.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.documents.push_back(segment.documents[order[i]]);
  return out;
}

}  // namespace lexdrift
