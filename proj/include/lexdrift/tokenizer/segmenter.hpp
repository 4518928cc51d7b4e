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

// Maximum-likelihood segmentation over a piece lattice.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lexdrift/tokenizer/normalizer.hpp"
#include "lexdrift/tokenizer/vocabulary.hpp"

namespace lexdrift {

// Score offset below the rarest piece given to an unsegmentable character.
inline constexpr double kUnknownPenalty = 10.0;

// Rendering of the unknown piece in detokenized text.
inline constexpr std::string_view kUnknownSurface = "\xE2\x81\x87";  // U+2047

namespace detail {

struct PathStep {
  std::uint32_t begin;  // char index
  std::uint32_t end;    // char index, exclusive
  std::int32_t id;      // -1 for an unknown character
};

// Best path through a lattice over `n_chars` characters. `edges_from(i, emit)`
// must call emit(end_char, id, score) for every edge leaving character i;
// when no edge of length one leaves i, an unknown edge with `unknown_score`
// is added. Ties on score go to fewer pieces, then to the path whose piece
// sequence is lexicographically smallest. All paths to a position cover the
// same text, so that is the path whose first differing cut comes earliest.
template <typename EdgesFrom>
std::vector<PathStep> best_path(std::size_t n_chars, EdgesFrom&& edges_from, double unknown_score,
                                double* total_score = nullptr) {
  struct Cell {
    double score = -std::numeric_limits<double>::infinity();
    std::uint32_t count = 0;
    std::int64_t prev = -1;
    std::int32_t id = -1;
  };
  std::vector<Cell> best(n_chars + 1);
  best[0].score = 0.0;

  std::vector<std::uint32_t> cuts_a, cuts_b;
  auto cuts_of = [&](std::int64_t pos, std::vector<std::uint32_t>& out) {
    out.clear();
    while (pos > 0) {
      out.push_back(static_cast<std::uint32_t>(pos));
      pos = best[pos].prev;
    }
    std::reverse(out.begin(), out.end());
  };

  for (std::size_t i = 0; i < n_chars; ++i) {
    if (best[i].prev < 0 && i != 0) continue;  // unreachable
    bool has_unit = false;
    auto relax = [&](std::size_t end, std::int32_t id, double score) {
      if (end == i + 1) has_unit = true;
      Cell& cell = best[end];
      const double cand = best[i].score + score;
      const std::uint32_t count = best[i].count + 1;
      bool take = false;
      if (cell.prev < 0 || cand > cell.score) {
        take = true;
      } else if (cand == cell.score) {
        if (count < cell.count) {
          take = true;
        } else if (count == cell.count && static_cast<std::int64_t>(i) != cell.prev) {
          cuts_of(static_cast<std::int64_t>(i), cuts_a);
          cuts_of(cell.prev, cuts_b);
          take = cuts_a < cuts_b;
        }
      }
      if (take) {
        cell.score = cand;
        cell.count = count;
        cell.prev = static_cast<std::int64_t>(i);
        cell.id = id;
      }
    };
    edges_from(i, relax);
    if (!has_unit) relax(i + 1, -1, unknown_score);
  }

  std::vector<PathStep> path;
  for (std::int64_t pos = static_cast<std::int64_t>(n_chars); pos > 0; pos = best[pos].prev) {
    path.push_back({static_cast<std::uint32_t>(best[pos].prev), static_cast<std::uint32_t>(pos),
                    best[pos].id});
  }
  std::reverse(path.begin(), path.end());
  if (total_score) *total_score = best[n_chars].score;
  return path;
}

// Maps the byte offsets produced by utf8::boundaries() back to char indices.
inline std::vector<std::int32_t> byte_to_char_index(const std::vector<std::uint32_t>& bounds) {
  std::vector<std::int32_t> index(bounds.back() + 1, -1);
  for (std::size_t c = 0; c < bounds.size(); ++c) index[bounds[c]] = static_cast<std::int32_t>(c);
  return index;
}

}  // namespace detail

struct Segmentation {
  std::vector<std::int32_t> pieces;  // ids into the vocabulary
  std::string source_normalized;
  double score = 0.0;  // sum of piece log-probs along the chosen path
};

// Segments text that is already in normalize() form.
inline Segmentation viterbi_segment_normalized(const Vocabulary& vocab, std::string_view normalized) {
  Segmentation seg;
  seg.source_normalized = std::string(normalized);
  if (normalized.empty()) return seg;

  const auto bounds = utf8::boundaries(normalized);
  const std::size_t n = bounds.size() - 1;
  const auto char_at = detail::byte_to_char_index(bounds);
  const auto& pieces = vocab.pieces();

  auto edges_from = [&](std::size_t i, auto&& emit) {
    vocab.trie().for_each_prefix(normalized, bounds[i], [&](std::size_t len, std::int32_t id) {
      const std::int32_t end = char_at[bounds[i] + len];
      if (end >= 0) emit(static_cast<std::size_t>(end), id, pieces[id].log_prob);
    });
  };
  const double unknown_score = vocab.min_log_prob() - kUnknownPenalty;
  const auto path = detail::best_path(n, edges_from, unknown_score, &seg.score);

  bool in_unknown_run = false;
  for (const auto& step : path) {
    if (step.id >= 0) {
      seg.pieces.push_back(step.id);
      in_unknown_run = false;
      continue;
    }
    if (vocab.has_byte_fallback()) {
      for (std::uint32_t b = bounds[step.begin]; b < bounds[step.end]; ++b) {
        seg.pieces.push_back(vocab.byte_id(static_cast<std::uint8_t>(normalized[b])));
      }
    } else if (!in_unknown_run) {
      seg.pieces.push_back(*vocab.unknown_id());
      in_unknown_run = true;
    }
  }
  return seg;
}

// Segments raw or normalized text; raw text is normalized first.
inline Segmentation viterbi_segment(const Vocabulary& vocab, std::string_view text) {
  if (looks_normalized(text)) return viterbi_segment_normalized(vocab, text);
  return viterbi_segment_normalized(vocab, normalize(text));
}

// Concatenates piece strings; runs of byte pieces are emitted as raw bytes.
// Round-trips viterbi_segment() whenever no unknown piece was produced.
inline std::string detokenize(const Segmentation& seg, const Vocabulary& vocab) {
  std::string out;
  for (const std::int32_t id : seg.pieces) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw std::invalid_argument("detokenize: piece id " + std::to_string(id) +
                                  " out of range for vocabulary of size " + std::to_string(vocab.size()));
    }
    const Piece& p = vocab.piece(static_cast<std::size_t>(id));
    switch (p.kind) {
      case PieceKind::normal:
        out += p.text;
        break;
      case PieceKind::byte:
        out.push_back(static_cast<char>(*parse_byte_piece(p.text)));
        break;
      case PieceKind::unknown:
        out += kUnknownSurface;
        break;
    }
  }
  return out;
}

}  // namespace lexdrift
