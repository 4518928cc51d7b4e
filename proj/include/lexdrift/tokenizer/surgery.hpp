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
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexdrift/tokenizer/normalizer.hpp"
#include "lexdrift/tokenizer/vocabulary.hpp"

namespace lexdrift {

inline constexpr std::size_t kBytePieceCount = 256;

// Byte-fallback surgery: swaps the 256 rarest multi-character pieces for the
// 256 byte pieces, keeping the vocabulary size. Rarity is the training
// log-prob; single-character pieces are never removed. Byte pieces are placed
// directly after the unknown piece and surviving log-probs are renormalized.
inline Vocabulary byte_fallback_surgery(const Vocabulary& vocab) {
  if (vocab.has_byte_fallback()) {
    throw std::invalid_argument("byte_fallback_surgery: vocabulary already has byte pieces");
  }
  const auto& pieces = vocab.pieces();
  std::vector<std::size_t> removable;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].kind == PieceKind::normal && utf8::length(pieces[i].text) > 1) removable.push_back(i);
  }
  if (removable.size() < kBytePieceCount) {
    throw std::invalid_argument("byte_fallback_surgery: vocabulary has " + std::to_string(removable.size()) +
                                " multi-character pieces; at least 256 are required");
  }
  // Rarest first; among equals the lower-ranked piece goes first.
  std::stable_sort(removable.begin(), removable.end(), [&](std::size_t a, std::size_t b) {
    if (pieces[a].log_prob != pieces[b].log_prob) return pieces[a].log_prob < pieces[b].log_prob;
    return a > b;
  });
  std::vector<char> drop(pieces.size(), 0);
  for (std::size_t k = 0; k < kBytePieceCount; ++k) drop[removable[k]] = 1;

  double mass = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (!drop[i] && pieces[i].kind == PieceKind::normal) mass += std::exp(pieces[i].log_prob);
  }
  const double log_mass = std::log(mass);

  std::vector<Piece> out;
  out.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].kind == PieceKind::unknown) out.push_back(pieces[i]);
  }
  for (std::size_t b = 0; b < kBytePieceCount; ++b) {
    out.push_back({byte_piece_text(static_cast<std::uint8_t>(b)), 0.0, PieceKind::byte});
  }
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (drop[i] || pieces[i].kind != PieceKind::normal) continue;
    Piece p = pieces[i];
    p.log_prob = std::min(0.0, p.log_prob - log_mass);
    out.push_back(std::move(p));
  }
  return Vocabulary(std::move(out), vocab.meta_symbol());
}

}  // namespace lexdrift
