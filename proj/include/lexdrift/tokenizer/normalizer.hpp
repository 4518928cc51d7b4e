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

#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace lexdrift {

// U+2581 LOWER ONE EIGHTH BLOCK, the word-boundary marker.
inline constexpr std::string_view kMetaSymbol = "\xE2\x96\x81";

namespace utf8 {

// Byte length of the sequence introduced by lead byte c (1 for stray bytes).
inline int sequence_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c & 0xE0) == 0xC0) return 2;
  if ((c & 0xF0) == 0xE0) return 3;
  if ((c & 0xF8) == 0xF0) return 4;
  return 1;
}

// Byte offsets of every code point start, plus s.size() as a sentinel.
inline std::vector<std::uint32_t> boundaries(std::string_view s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size() + 1);
  std::size_t i = 0;
  while (i < s.size()) {
    out.push_back(static_cast<std::uint32_t>(i));
    const int len = sequence_length(static_cast<unsigned char>(s[i]));
    i = std::min(s.size(), i + static_cast<std::size_t>(len));
  }
  out.push_back(static_cast<std::uint32_t>(s.size()));
  return out;
}

inline std::size_t length(std::string_view s) { return boundaries(s).size() - 1; }

inline char32_t decode_at(std::string_view s, std::size_t& i) {
  const auto c0 = static_cast<unsigned char>(s[i]);
  const int len = sequence_length(c0);
  if (len == 1 || i + len > s.size()) {
    ++i;
    return c0 < 0x80 ? c0 : 0xFFFD;
  }
  char32_t cp = c0 & (0x7F >> len);
  for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
  i += len;
  return cp;
}

inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) out.push_back(decode_at(s, i));
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

}  // namespace utf8

// NFKC, collapse whitespace runs into one space, strip the ends, then spell
// every space as the meta symbol with one more prepended:
//   "a  b" -> "▁a▁b",  "" -> "".
// Case is preserved.
inline std::string normalize(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC normalizer unavailable");
  const icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString composed = nfkc->normalize(source, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC normalization failed");

  std::string out;
  out.reserve(text.size() + 8);
  bool pending_space = true;  // produces the leading marker
  for (int32_t i = 0; i < composed.length();) {
    const UChar32 cp = composed.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isUWhiteSpace(cp)) {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      out.append(kMetaSymbol);
      pending_space = false;
    }
    utf8::append(out, static_cast<char32_t>(cp));
  }
  return out;
}

// True when `s` already has the shape normalize() produces: empty, or led by
// the meta symbol and free of whitespace.
inline bool looks_normalized(std::string_view s) {
  if (s.empty()) return true;
  if (s.substr(0, kMetaSymbol.size()) != kMetaSymbol) return false;
  for (std::size_t i = 0; i < s.size();) {
    if (u_isUWhiteSpace(static_cast<UChar32>(utf8::decode_at(s, i)))) return false;
  }
  return true;
}

// Maps a normalized string back to plain text: meta symbols become spaces and
// the leading one is dropped.
inline std::string denormalize(std::string_view normalized) {
  std::string out;
  out.reserve(normalized.size());
  std::size_t i = 0;
  if (normalized.substr(0, kMetaSymbol.size()) == kMetaSymbol) i = kMetaSymbol.size();
  while (i < normalized.size()) {
    if (normalized.substr(i, kMetaSymbol.size()) == kMetaSymbol) {
      out.push_back(' ');
      i += kMetaSymbol.size();
    } else {
      out.push_back(normalized[i++]);
    }
  }
  return out;
}

}  // namespace lexdrift
