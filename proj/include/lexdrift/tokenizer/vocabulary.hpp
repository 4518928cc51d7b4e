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
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexdrift/common.hpp"
#include "lexdrift/tokenizer/normalizer.hpp"

namespace lexdrift {

inline constexpr std::string_view kUnknownPiece = "<unk>";

enum class PieceKind : std::uint8_t { normal, unknown, byte };

struct Piece {
  std::string text;
  double log_prob = 0.0;
  PieceKind kind = PieceKind::normal;

  bool is_special() const { return kind != PieceKind::normal; }
  friend bool operator==(const Piece&, const Piece&) = default;
};

// "<0xNN>" spelling of a byte piece.
inline std::string byte_piece_text(std::uint8_t b) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string s = "<0x00>";
  s[3] = kHex[b >> 4];
  s[4] = kHex[b & 0xF];
  return s;
}

inline std::optional<std::uint8_t> parse_byte_piece(std::string_view s) {
  if (s.size() != 6 || s.substr(0, 3) != "<0x" || s[5] != '>') return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  const int hi = nibble(s[3]);
  const int lo = nibble(s[4]);
  if (hi < 0 || lo < 0) return std::nullopt;
  return static_cast<std::uint8_t>(hi * 16 + lo);
}

// Strings that may never be learned as ordinary pieces because the vocabulary
// file format gives them a special meaning.
inline bool is_reserved_piece_text(std::string_view s) {
  return s == kUnknownPiece || parse_byte_piece(s).has_value();
}

// Byte-level trie over piece strings.
class PieceTrie {
 public:
  PieceTrie() : nodes_(1) {}

  void insert(std::string_view key, std::int32_t id) {
    std::uint32_t node = 0;
    for (unsigned char c : key) {
      auto& children = nodes_[node].children;
      auto it = std::lower_bound(children.begin(), children.end(), c,
                                 [](const auto& e, unsigned char v) { return e.first < v; });
      if (it != children.end() && it->first == c) {
        node = it->second;
      } else {
        const auto next = static_cast<std::uint32_t>(nodes_.size());
        children.insert(it, {c, next});
        nodes_.emplace_back();
        node = next;
      }
    }
    nodes_[node].id = id;
  }

  // Calls fn(byte_length, id) for every key that is a prefix of text[offset..].
  template <typename Fn>
  void for_each_prefix(std::string_view text, std::size_t offset, Fn&& fn) const {
    std::uint32_t node = 0;
    for (std::size_t i = offset; i < text.size(); ++i) {
      const auto& children = nodes_[node].children;
      const auto c = static_cast<unsigned char>(text[i]);
      auto it = std::lower_bound(children.begin(), children.end(), c,
                                 [](const auto& e, unsigned char v) { return e.first < v; });
      if (it == children.end() || it->first != c) return;
      node = it->second;
      if (nodes_[node].id >= 0) fn(i + 1 - offset, nodes_[node].id);
    }
  }

 private:
  struct Node {
    std::int32_t id = -1;
    std::vector<std::pair<unsigned char, std::uint32_t>> children;
  };
  std::vector<Node> nodes_;
};

// An immutable unigram vocabulary. Piece order is rank order; the id of a
// piece is its index.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<Piece> pieces, std::string meta = std::string(kMetaSymbol))
      : pieces_(std::move(pieces)), meta_(std::move(meta)) {
    byte_ids_.fill(-1);
    std::size_t bytes = 0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& p = pieces_[i];
      const auto id = static_cast<std::int32_t>(i);
      if (p.text.empty()) throw std::invalid_argument("vocabulary: empty piece at rank " + std::to_string(i));
      if (!index_.emplace(p.text, id).second) {
        throw std::invalid_argument("vocabulary: duplicate piece '" + p.text + "'");
      }
      switch (p.kind) {
        case PieceKind::unknown:
          if (unknown_id_) throw std::invalid_argument("vocabulary: more than one unknown piece");
          unknown_id_ = id;
          break;
        case PieceKind::byte: {
          const auto b = parse_byte_piece(p.text);
          if (!b) throw std::invalid_argument("vocabulary: malformed byte piece '" + p.text + "'");
          byte_ids_[*b] = id;
          ++bytes;
          break;
        }
        case PieceKind::normal:
          if (is_reserved_piece_text(p.text)) {
            throw std::invalid_argument("vocabulary: reserved text used as a normal piece: " + p.text);
          }
          if (!std::isfinite(p.log_prob) || p.log_prob > 0.0) {
            throw std::invalid_argument("vocabulary: log_prob of '" + p.text + "' must be finite and <= 0");
          }
          trie_.insert(p.text, id);
          min_log_prob_ = std::min(min_log_prob_, p.log_prob);
          ++normal_count_;
          break;
      }
    }
    if (bytes != 0 && bytes != 256) {
      throw std::invalid_argument("vocabulary: byte pieces must cover all 256 values");
    }
    byte_fallback_ = bytes == 256;
    if (!byte_fallback_ && !unknown_id_) {
      throw std::invalid_argument("vocabulary: needs an unknown piece or 256 byte pieces");
    }
    if (normal_count_ == 0) min_log_prob_ = 0.0;
  }

  std::size_t size() const { return pieces_.size(); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const Piece& piece(std::size_t id) const { return pieces_.at(id); }
  const std::string& meta_symbol() const { return meta_; }
  const PieceTrie& trie() const { return trie_; }

  std::optional<std::int32_t> unknown_id() const { return unknown_id_; }
  bool has_byte_fallback() const { return byte_fallback_; }
  std::int32_t byte_id(std::uint8_t b) const { return byte_ids_[b]; }
  std::size_t normal_count() const { return normal_count_; }
  double min_log_prob() const { return min_log_prob_; }

  std::optional<std::int32_t> find(std::string_view text) const {
    const auto it = index_.find(std::string(text));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Serialized form:
  //   #unigram v1 size=<N> meta=<meta>
  //   <piece>\t<log_prob>      (one per line, rank order)
  void write(std::ostream& out) const {
    out << "#unigram v1 size=" << pieces_.size() << " meta=" << meta_ << '\n';
    for (const Piece& p : pieces_) {
      out << p.text << '\t' << format_double(p.is_special() ? 0.0 : p.log_prob) << '\n';
    }
  }

  std::string serialize() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

  // Content identifier: FNV-1a of the serialized form.
  std::string id() const { return to_hex(fnv1a64(serialize())); }

  static Vocabulary read(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("vocabulary file: missing header");
    constexpr std::string_view kPrefix = "#unigram v1 size=";
    if (line.rfind(kPrefix, 0) != 0) {
      throw std::invalid_argument("vocabulary file: bad header '" + line + "'");
    }
    const auto meta_at = line.find(" meta=");
    if (meta_at == std::string::npos) throw std::invalid_argument("vocabulary file: header lacks meta=");
    std::size_t declared = 0;
    try {
      declared = std::stoull(line.substr(kPrefix.size(), meta_at - kPrefix.size()));
    } catch (const std::exception&) {
      throw std::invalid_argument("vocabulary file: bad size in header");
    }
    std::string meta = line.substr(meta_at + 6);

    std::vector<Piece> pieces;
    pieces.reserve(declared);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos || tab == 0) {
        throw std::invalid_argument("vocabulary file: line " + std::to_string(line_no) + " is not piece<TAB>log_prob");
      }
      Piece p;
      p.text = line.substr(0, tab);
      p.log_prob = parse_double(std::string_view(line).substr(tab + 1));
      if (p.text == kUnknownPiece) {
        p.kind = PieceKind::unknown;
      } else if (parse_byte_piece(p.text)) {
        p.kind = PieceKind::byte;
      }
      if (p.is_special()) p.log_prob = 0.0;
      pieces.push_back(std::move(p));
    }
    if (pieces.size() != declared) {
      throw std::invalid_argument("vocabulary file: header declares " + std::to_string(declared) +
                                  " pieces, found " + std::to_string(pieces.size()));
    }
    return Vocabulary(std::move(pieces), std::move(meta));
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    write(out);
    if (!out) throw IoError(path, "write failed");
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open");
    return read(in);
  }

 private:
  std::vector<Piece> pieces_;
  std::string meta_ = std::string(kMetaSymbol);
  std::unordered_map<std::string, std::int32_t> index_;
  PieceTrie trie_;
  std::optional<std::int32_t> unknown_id_;
  std::array<std::int32_t, 256> byte_ids_{};
  bool byte_fallback_ = false;
  std::size_t normal_count_ = 0;
  double min_log_prob_ = std::numeric_limits<double>::infinity();
};

}  // namespace lexdrift
