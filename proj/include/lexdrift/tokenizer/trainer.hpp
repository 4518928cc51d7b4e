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

// Unigram language-model vocabulary training.
//
// The corpus is normalized and cut into words at meta symbols, so pieces
// never span a word boundary. Training then proceeds as:
//
//   1. Seed: every covered character plus the substrings (2..max_piece_length
//      chars) with the highest frequency * length, up to seed_factor *
//      target_size candidates, found with a suffix array over the word list.
//   2. EM: the E-step runs forward-backward over each word's piece lattice to
//      get expected piece counts; the M-step renormalizes them.
//   3. Prune: drop the pieces whose removal costs the least likelihood,
//      keeping max(target, shrinking_factor * size) pieces, and go back to 2.
//
// Characters outside the coverage set act as word breaks during training and
// segment to the unknown (or byte) piece afterwards.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexdrift/common.hpp"
#include "lexdrift/corpus.hpp"
#include "lexdrift/tokenizer/normalizer.hpp"
#include "lexdrift/tokenizer/segmenter.hpp"
#include "lexdrift/tokenizer/suffix_array.hpp"
#include "lexdrift/tokenizer/vocabulary.hpp"

namespace lexdrift {

struct TrainParams {
  double character_coverage = 0.9995;
  std::size_t max_piece_length = 16;  // in characters
  std::size_t seed_factor = 8;        // seed candidates = seed_factor * target_size
  std::size_t em_iterations = 2;      // per pruning round
  double shrinking_factor = 0.75;
  std::size_t num_threads = 1;
};

struct PruneRound {
  std::size_t size_before = 0;
  std::size_t size_after = 0;
  double nll_before = 0.0;  // after EM, before pruning
  double nll_after = 0.0;   // after pruning and re-running EM
};

// Diagnostics of one training run. NLL values are the corpus negative
// log-likelihood (marginal over segmentations), in nats.
struct TrainReport {
  std::size_t distinct_words = 0;
  std::size_t required_chars = 0;
  std::size_t seed_size = 0;
  std::vector<double> em_nll;  // after every EM iteration, in order
  std::vector<PruneRound> rounds;
};

namespace detail {

inline double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

struct TrainWord {
  std::string text;
  double count = 0.0;
};

struct TrainPiece {
  std::string text;
  double log_prob = 0.0;
  bool required = false;  // single covered character; never pruned
};

// The piece set being trained plus a trie over it.
class TrainingModel {
 public:
  explicit TrainingModel(std::vector<TrainPiece> pieces) : pieces_(std::move(pieces)) { rebuild(); }

  const std::vector<TrainPiece>& pieces() const { return pieces_; }
  std::vector<TrainPiece>& mutable_pieces() { return pieces_; }
  std::size_t size() const { return pieces_.size(); }

  void rebuild() {
    trie_ = PieceTrie();
    for (std::size_t i = 0; i < pieces_.size(); ++i) trie_.insert(pieces_[i].text, static_cast<std::int32_t>(i));
  }

  // Enumerates lattice edges of `word` as (begin_char, end_char, id).
  template <typename Fn>
  void for_each_edge(std::string_view word, const std::vector<std::uint32_t>& bounds,
                     const std::vector<std::int32_t>& char_at, Fn&& fn) const {
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
      trie_.for_each_prefix(word, bounds[i], [&](std::size_t len, std::int32_t id) {
        const std::int32_t end = char_at[bounds[i] + len];
        if (end >= 0) fn(i, static_cast<std::size_t>(end), id);
      });
    }
  }

  // Viterbi path of `word`, optionally forbidding one piece id.
  std::vector<PathStep> viterbi(std::string_view word, std::int32_t forbidden = -1) const {
    const auto bounds = utf8::boundaries(word);
    const auto char_at = byte_to_char_index(bounds);
    auto edges_from = [&](std::size_t i, auto&& emit) {
      trie_.for_each_prefix(word, bounds[i], [&](std::size_t len, std::int32_t id) {
        if (id == forbidden) return;
        const std::int32_t end = char_at[bounds[i] + len];
        if (end >= 0) emit(static_cast<std::size_t>(end), id, pieces_[id].log_prob);
      });
    };
    return best_path(bounds.size() - 1, edges_from, -1e30);
  }

 private:
  std::vector<TrainPiece> pieces_;
  PieceTrie trie_;
};

// Expected counts and NLL over one contiguous range of words.
inline void expectation_range(const TrainingModel& model, const std::vector<TrainWord>& words,
                              std::size_t begin, std::size_t end, std::vector<double>& expected,
                              double& nll) {
  struct Edge {
    std::uint32_t from, to;
    std::int32_t id;
  };
  std::vector<Edge> edges;
  std::vector<double> alpha, beta;
  const auto& pieces = model.pieces();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (std::size_t w = begin; w < end; ++w) {
    const std::string& text = words[w].text;
    const auto bounds = utf8::boundaries(text);
    const auto char_at = byte_to_char_index(bounds);
    const std::size_t n = bounds.size() - 1;
    edges.clear();
    model.for_each_edge(text, bounds, char_at, [&](std::size_t i, std::size_t j, std::int32_t id) {
      edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), id});
    });
    // Edges arrive sorted by `from`, which is all forward needs.
    alpha.assign(n + 1, kNegInf);
    beta.assign(n + 1, kNegInf);
    alpha[0] = 0.0;
    for (const Edge& e : edges) {
      alpha[e.to] = log_add(alpha[e.to], alpha[e.from] + pieces[e.id].log_prob);
    }
    beta[n] = 0.0;
    for (auto it = edges.rbegin(); it != edges.rend(); ++it) {
      beta[it->from] = log_add(beta[it->from], pieces[it->id].log_prob + beta[it->to]);
    }
    const double z = alpha[n];
    if (z == kNegInf) throw TrainingError("internal: word '" + text + "' has no segmentation");
    const double count = words[w].count;
    nll -= count * z;
    for (const Edge& e : edges) {
      const double lp = alpha[e.from] + pieces[e.id].log_prob + beta[e.to] - z;
      expected[e.id] += count * std::exp(lp);
    }
  }
}

// Fixed chunking (independent of the thread count) keeps results
// bit-identical however many threads run.
inline constexpr std::size_t kExpectationChunks = 8;

inline double expectation(const TrainingModel& model, const std::vector<TrainWord>& words,
                          std::size_t num_threads, std::vector<double>& expected) {
  const std::size_t chunks = std::min(kExpectationChunks, std::max<std::size_t>(1, words.size()));
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(model.size(), 0.0));
  std::vector<double> nll(chunks, 0.0);
  auto run_chunk = [&](std::size_t c) {
    const std::size_t b = words.size() * c / chunks;
    const std::size_t e = words.size() * (c + 1) / chunks;
    expectation_range(model, words, b, e, partial[c], nll[c]);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(num_threads, chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < chunks; c += threads) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }
  expected.assign(model.size(), 0.0);
  double total_nll = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t i = 0; i < model.size(); ++i) expected[i] += partial[c][i];
    total_nll += nll[c];
  }
  return total_nll;
}

// Floor on expected counts so that no log-prob becomes -inf.
inline constexpr double kMinExpectedCount = 1e-9;

inline void maximization(TrainingModel& model, const std::vector<double>& expected) {
  double total = 0.0;
  for (double c : expected) total += std::max(c, kMinExpectedCount);
  const double log_total = std::log(total);
  auto& pieces = model.mutable_pieces();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    pieces[i].log_prob = std::log(std::max(expected[i], kMinExpectedCount)) - log_total;
  }
}

// Keeps the `keep` pieces whose removal would cost the most likelihood.
inline void prune(TrainingModel& model, const std::vector<TrainWord>& words, std::size_t keep) {
  const auto& pieces = model.pieces();
  const std::size_t size = pieces.size();
  if (keep >= size) return;

  // Viterbi frequencies and the weight of words whose best path uses a piece.
  std::vector<double> freq(size, 0.0), word_weight(size, 0.0);
  std::vector<std::int32_t> last_word(size, -1);
  double total_words = 0.0;
  for (std::size_t w = 0; w < words.size(); ++w) {
    total_words += words[w].count;
    for (const auto& step : model.viterbi(words[w].text)) {
      if (step.id < 0) continue;
      freq[step.id] += words[w].count;
      if (last_word[step.id] != static_cast<std::int32_t>(w)) {
        last_word[step.id] = static_cast<std::int32_t>(w);
        word_weight[step.id] += words[w].count;
      }
    }
  }
  double sum = 0.0;
  for (double f : freq) sum += f;
  const double log_sum = std::log(sum);

  struct Candidate {
    std::size_t index;
    double loss;
  };
  std::vector<Candidate> candidates;
  std::vector<char> kept(size, 0);
  std::size_t kept_count = 0;
  for (std::size_t i = 0; i < size; ++i) {
    if (pieces[i].required) {
      kept[i] = 1;
      ++kept_count;
      continue;
    }
    if (freq[i] == 0.0) {
      // Unused by any best path: free to remove.
      candidates.push_back({i, -std::numeric_limits<double>::infinity()});
      continue;
    }
    const auto alternatives = model.viterbi(pieces[i].text, static_cast<std::int32_t>(i));
    bool resolvable = !alternatives.empty();
    for (const auto& step : alternatives) resolvable = resolvable && step.id >= 0;
    if (!resolvable) {
      kept[i] = 1;
      ++kept_count;
      continue;
    }
    // Likelihood change if every use of piece i were re-segmented into its
    // alternatives, with their frequencies bumped accordingly.
    const double logprob_piece = std::log(freq[i]) - log_sum;
    const double log_sum_alt =
        std::log(sum + freq[i] * static_cast<double>(alternatives.size() - 1));
    double logprob_alt = 0.0;
    for (const auto& step : alternatives) logprob_alt += std::log(freq[step.id] + freq[i]) - log_sum_alt;
    const double share = total_words > 0.0 ? word_weight[i] / total_words : 0.0;
    candidates.push_back({i, share * (logprob_piece - logprob_alt)});
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.loss != b.loss) return a.loss > b.loss;
    return pieces[a.index].text < pieces[b.index].text;
  });
  for (const Candidate& c : candidates) {
    if (kept_count >= keep) break;
    kept[c.index] = 1;
    ++kept_count;
  }
  std::vector<TrainPiece> next;
  next.reserve(kept_count);
  for (std::size_t i = 0; i < size; ++i) {
    if (kept[i]) next.push_back(pieces[i]);
  }
  model.mutable_pieces() = std::move(next);
  model.rebuild();
}

}  // namespace detail

// Normalized corpus reduced to weighted words over the covered alphabet.
struct TrainingCorpus {
  std::vector<detail::TrainWord> words;  // sorted by text
  std::vector<std::pair<char32_t, double>> required_chars;  // covered alphabet with counts
};

// Normalizes texts and counts their words. A word is a meta symbol plus the
// text up to the next one.
inline std::map<std::string, double> count_words(const std::vector<std::string>& texts) {
  std::unordered_map<std::string, double> counts;
  for (const std::string& raw : texts) {
    const std::string norm = normalize(raw);
    std::size_t start = 0;
    while (start < norm.size()) {
      std::size_t next = norm.find(kMetaSymbol, start + kMetaSymbol.size());
      if (next == std::string::npos) next = norm.size();
      counts[norm.substr(start, next - start)] += 1.0;
      start = next;
    }
  }
  return {counts.begin(), counts.end()};
}

inline TrainingCorpus prepare_training_corpus(const std::map<std::string, double>& word_counts,
                                              double coverage) {
  if (!(coverage > 0.0 && coverage <= 1.0)) {
    throw std::invalid_argument("character_coverage must be in (0, 1]");
  }
  std::unordered_map<char32_t, double> char_counts;
  for (const auto& [word, count] : word_counts) {
    for (std::size_t i = 0; i < word.size();) char_counts[utf8::decode_at(word, i)] += count;
  }

  std::vector<std::pair<char32_t, double>> chars(char_counts.begin(), char_counts.end());
  std::sort(chars.begin(), chars.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  double total = 0.0;
  for (const auto& c : chars) total += c.second;
  TrainingCorpus out;
  double accumulated = 0.0;
  for (const auto& c : chars) {
    if (!out.required_chars.empty() && accumulated / total >= coverage) break;
    out.required_chars.push_back(c);
    accumulated += c.second;
  }
  std::sort(out.required_chars.begin(), out.required_chars.end());

  auto covered = [&](char32_t cp) {
    return std::binary_search(out.required_chars.begin(), out.required_chars.end(),
                              std::pair<char32_t, double>{cp, 0.0},
                              [](const auto& a, const auto& b) { return a.first < b.first; });
  };
  // Rare characters split words into fragments.
  std::map<std::string, double> fragments;
  for (const auto& [word, count] : word_counts) {
    std::string current;
    for (std::size_t i = 0; i < word.size();) {
      const char32_t cp = utf8::decode_at(word, i);
      if (covered(cp)) {
        utf8::append(current, cp);
      } else if (!current.empty()) {
        fragments[current] += count;
        current.clear();
      }
    }
    if (!current.empty()) fragments[current] += count;
  }
  out.words.reserve(fragments.size());
  for (auto& [text, count] : fragments) out.words.push_back({text, count});
  return out;
}

// Trains a vocabulary of exactly `target_size` pieces (including the unknown
// piece). Throws std::invalid_argument when target_size is below the covered
// alphabet plus the unknown piece, and TrainingError when the corpus cannot
// supply enough distinct candidates.
//
// This overload trains directly on pre-split words with counts; the words are
// used as given (no normalization).
inline Vocabulary train_unigram_words(const std::map<std::string, double>& word_counts,
                                      std::size_t target_size, const TrainParams& params = {},
                                      TrainReport* report = nullptr) {
  if (target_size == 0) throw std::invalid_argument("train_unigram: target_size must be positive");
  if (!(params.shrinking_factor > 0.0 && params.shrinking_factor < 1.0)) {
    throw std::invalid_argument("train_unigram: shrinking_factor must be in (0, 1)");
  }
  if (params.max_piece_length == 0 || params.seed_factor == 0 || params.em_iterations == 0) {
    throw std::invalid_argument("train_unigram: max_piece_length, seed_factor and em_iterations must be positive");
  }

  TrainingCorpus corpus = prepare_training_corpus(word_counts, params.character_coverage);
  if (corpus.words.empty()) throw std::invalid_argument("train_unigram: corpus has no text");
  const std::size_t min_size = corpus.required_chars.size() + 1;
  if (target_size < min_size) {
    throw std::invalid_argument("train_unigram: target_size " + std::to_string(target_size) +
                                " is below the minimum feasible size " + std::to_string(min_size) +
                                " (covered characters + unknown piece)");
  }
  const std::size_t target_normal = target_size - 1;

  // Seeds.
  std::vector<WeightedWord> weighted;
  weighted.reserve(corpus.words.size());
  for (const auto& w : corpus.words) weighted.push_back({utf8::decode(w.text), w.count});
  const std::size_t seed_cap = params.seed_factor * target_size;
  const std::size_t substring_cap = seed_cap > corpus.required_chars.size() ? seed_cap - corpus.required_chars.size() : 0;
  auto substrings = frequent_substrings(weighted, 2, params.max_piece_length, substring_cap + 64);

  std::vector<detail::TrainPiece> seeds;
  double score_total = 0.0;
  for (const auto& [cp, count] : corpus.required_chars) {
    std::string s;
    utf8::append(s, cp);
    if (is_reserved_piece_text(s)) continue;
    seeds.push_back({s, count, true});
    score_total += count;
  }
  std::size_t taken = 0;
  for (const auto& sub : substrings) {
    if (taken >= substring_cap) break;
    std::string s = utf8::encode(sub.text);
    if (is_reserved_piece_text(s)) continue;
    // The meta symbol may only lead a piece.
    if (s.find(kMetaSymbol, 1) != std::string::npos) continue;
    seeds.push_back({std::move(s), sub.score(), false});
    score_total += sub.score();
    ++taken;
  }
  if (seeds.size() < target_normal) {
    throw TrainingError("train_unigram: corpus yields only " + std::to_string(seeds.size() + 1) +
                        " candidate pieces, fewer than target_size " + std::to_string(target_size));
  }
  const double log_total = std::log(score_total);
  for (auto& s : seeds) s.log_prob = std::log(s.log_prob) - log_total;

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};
  rep.distinct_words = corpus.words.size();
  rep.required_chars = corpus.required_chars.size();
  rep.seed_size = seeds.size();

  detail::TrainingModel model(std::move(seeds));
  std::vector<double> expected;
  auto run_em = [&]() {
    double nll = 0.0;
    for (std::size_t it = 0; it < params.em_iterations; ++it) {
      nll = detail::expectation(model, corpus.words, params.num_threads, expected);
      detail::maximization(model, expected);
      rep.em_nll.push_back(nll);
    }
    // Likelihood under the final M-step parameters.
    nll = detail::expectation(model, corpus.words, params.num_threads, expected);
    return nll;
  };

  double nll = run_em();
  while (model.size() > target_normal) {
    PruneRound round;
    round.size_before = model.size();
    round.nll_before = nll;
    const auto shrunk = static_cast<std::size_t>(params.shrinking_factor * static_cast<double>(model.size()));
    detail::prune(model, corpus.words, std::max(target_normal, shrunk));
    if (model.size() == round.size_before) {
      throw TrainingError("train_unigram: pruning stalled at " + std::to_string(model.size()) + " pieces");
    }
    round.size_after = model.size();
    nll = run_em();
    round.nll_after = nll;
    rep.rounds.push_back(round);
  }
  if (model.size() != target_normal) {
    throw TrainingError("train_unigram: could not reach target size " + std::to_string(target_size));
  }

  // Final renormalization of the surviving pieces.
  auto final_pieces = model.pieces();
  std::sort(final_pieces.begin(), final_pieces.end(), [](const auto& a, const auto& b) {
    return a.log_prob != b.log_prob ? a.log_prob > b.log_prob : a.text < b.text;
  });
  std::vector<Piece> pieces;
  pieces.reserve(target_size);
  pieces.push_back({std::string(kUnknownPiece), 0.0, PieceKind::unknown});
  for (const auto& p : final_pieces) pieces.push_back({p.text, p.log_prob, PieceKind::normal});
  return Vocabulary(std::move(pieces));
}

inline Vocabulary train_unigram(const std::vector<std::string>& texts, std::size_t target_size,
                                const TrainParams& params = {}, TrainReport* report = nullptr) {
  if (texts.empty()) throw std::invalid_argument("train_unigram: corpus is empty");
  return train_unigram_words(count_words(texts), target_size, params, report);
}

inline Vocabulary train_unigram(const std::vector<Document>& docs, std::size_t target_size,
                                const TrainParams& params = {}, TrainReport* report = nullptr) {
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  return train_unigram(texts, target_size, params, report);
}

}  // namespace lexdrift
