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

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexdrift/common.hpp"
#include "lexdrift/corpus.hpp"
#include "lexdrift/tokenizer/segmenter.hpp"
#include "lexdrift/tokenizer/vocabulary.hpp"

namespace lexdrift {

// Piece counts of one corpus under one vocabulary. total == sum of counts.
struct FrequencyTable {
  std::string vocab_id;
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;

  // Adds another shard counted under the same vocabulary.
  FrequencyTable& operator+=(const FrequencyTable& other) {
    if (!vocab_id.empty() && !other.vocab_id.empty() && vocab_id != other.vocab_id) {
      throw std::invalid_argument("FrequencyTable: cannot merge tables of different vocabularies");
    }
    if (vocab_id.empty()) vocab_id = other.vocab_id;
    for (const auto& [piece, n] : other.counts) counts[piece] += n;
    total += other.total;
    return *this;
  }

  std::size_t nonzero() const {
    std::size_t k = 0;
    for (const auto& kv : counts) k += kv.second > 0;
    return k;
  }

  friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;

  // TSV: header "#freq vocab=<id> total=<n>", then "piece<TAB>count" lines.
  void write(std::ostream& out) const {
    out << "#freq vocab=" << vocab_id << " total=" << total << '\n';
    for (const auto& [piece, n] : counts) out << piece << '\t' << n << '\n';
  }

  static FrequencyTable read(std::istream& in) {
    FrequencyTable t;
    std::string line;
    if (!std::getline(in, line) || line.rfind("#freq vocab=", 0) != 0) {
      throw std::invalid_argument("frequency file: bad header");
    }
    const auto total_at = line.find(" total=");
    if (total_at == std::string::npos) throw std::invalid_argument("frequency file: header lacks total=");
    t.vocab_id = line.substr(12, total_at - 12);
    std::uint64_t declared = 0;
    try {
      declared = std::stoull(line.substr(total_at + 7));
    } catch (const std::exception&) {
      throw std::invalid_argument("frequency file: bad total");
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) throw std::invalid_argument("frequency file: malformed line");
      std::uint64_t n = 0;
      try {
        n = std::stoull(line.substr(tab + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("frequency file: bad count in '" + line + "'");
      }
      t.counts[line.substr(0, tab)] += n;
      t.total += n;
    }
    if (t.total != declared) throw std::invalid_argument("frequency file: total does not match counts");
    return t;
  }
};

// An all-zero table listing every piece of the vocabulary.
inline FrequencyTable empty_frequency_table(const Vocabulary& vocab) {
  FrequencyTable t;
  t.vocab_id = vocab.id();
  for (const auto& p : vocab.pieces()) t.counts.emplace(p.text, 0);
  return t;
}

inline FrequencyTable token_frequencies(const Vocabulary& vocab, const std::vector<std::string>& texts) {
  FrequencyTable table = empty_frequency_table(vocab);
  std::vector<std::uint64_t> by_id(vocab.size(), 0);
  for (const auto& text : texts) {
    for (const std::int32_t id : viterbi_segment_normalized(vocab, normalize(text)).pieces) {
      ++by_id[static_cast<std::size_t>(id)];
    }
  }
  for (std::size_t id = 0; id < by_id.size(); ++id) {
    table.counts[vocab.piece(id).text] += by_id[id];
    table.total += by_id[id];
  }
  return table;
}

inline FrequencyTable token_frequencies(const Vocabulary& vocab, const std::vector<Document>& docs) {
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  return token_frequencies(vocab, texts);
}

}  // namespace lexdrift
