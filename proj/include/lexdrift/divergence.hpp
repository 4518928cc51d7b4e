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

// Token-distribution divergence between corpora: symmetric KL (a.k.a.
// population stability index), Jaccard distance over token sets, and
// month-to-month drift series.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexdrift/common.hpp"
#include "lexdrift/corpus.hpp"
#include "lexdrift/tokenizer/frequency.hpp"
#include "lexdrift/tokenizer/trainer.hpp"

namespace lexdrift {

inline constexpr double kDefaultFloor = 1e-6;
inline constexpr double kMaxFloor = 1e-3;

// Two distributions over the union of the nonzero tokens of two tables, in
// token order. Zero probabilities are replaced by `floor` before
// renormalization.
struct AlignedDistributions {
  std::vector<std::string> tokens;
  std::vector<double> p;
  std::vector<double> q;
  double floor = kDefaultFloor;
  std::size_t i = 0;  // tokens nonzero in both
  std::size_t u = 0;  // tokens nonzero in either
};

namespace detail {

inline void check_floor(double floor) {
  if (!(floor > 0.0 && floor <= kMaxFloor)) {
    throw std::invalid_argument("floor must be in (0, 1e-3], got " + format_double(floor));
  }
}

inline void floor_and_normalize(std::vector<double>& v, double floor) {
  double sum = 0.0;
  for (double& x : v) {
    if (x == 0.0) x = floor;
    sum += x;
  }
  for (double& x : v) x /= sum;
}

}  // namespace detail

inline AlignedDistributions align_union(const FrequencyTable& fa, const FrequencyTable& fb,
                                        double floor = kDefaultFloor) {
  detail::check_floor(floor);
  if (fa.total == 0 || fb.total == 0) {
    throw std::invalid_argument(fa.total == 0 && fb.total == 0 ? "align_union: both tables are empty"
                                                               : "align_union: a frequency table is empty");
  }
  AlignedDistributions d;
  d.floor = floor;
  const double ta = static_cast<double>(fa.total);
  const double tb = static_cast<double>(fb.total);
  // Both maps iterate in token order; merge them.
  auto a = fa.counts.begin();
  auto b = fb.counts.begin();
  while (a != fa.counts.end() || b != fb.counts.end()) {
    std::uint64_t ca = 0, cb = 0;
    const std::string* token;
    if (b == fb.counts.end() || (a != fa.counts.end() && a->first < b->first)) {
      token = &a->first;
      ca = a->second;
      ++a;
    } else if (a == fa.counts.end() || b->first < a->first) {
      token = &b->first;
      cb = b->second;
      ++b;
    } else {
      token = &a->first;
      ca = a->second;
      cb = b->second;
      ++a;
      ++b;
    }
    if (ca == 0 && cb == 0) continue;
    d.tokens.push_back(*token);
    d.p.push_back(static_cast<double>(ca) / ta);
    d.q.push_back(static_cast<double>(cb) / tb);
    d.i += ca > 0 && cb > 0;
  }
  d.u = d.tokens.size();
  detail::floor_and_normalize(d.p, floor);
  detail::floor_and_normalize(d.q, floor);
  return d;
}

// Σ (p - q)(ln p - ln q). Each term is computed from the pair in a form that
// is exactly antisymmetric in both factors, so swapping p and q gives the
// same bits.
inline double skl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("skl: distributions differ in length");
  double sum = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (!(p[t] > 0.0) || !(q[t] > 0.0)) throw std::invalid_argument("skl: probabilities must be positive");
    sum += (p[t] - q[t]) * (std::log(p[t]) - std::log(q[t]));
  }
  return sum;
}

inline double skl(const AlignedDistributions& d) { return skl(d.p, d.q); }

inline double jaccard(const AlignedDistributions& d) {
  if (d.u == 0) throw std::invalid_argument("jaccard: empty union");
  return 1.0 - static_cast<double>(d.i) / static_cast<double>(d.u);
}

enum class Band : std::uint8_t { little, moderate, significant };

inline std::string_view to_string(Band b) {
  switch (b) {
    case Band::little:
      return "little";
    case Band::moderate:
      return "moderate";
    case Band::significant:
      return "significant";
  }
  return "?";
}

// < 0.1 little, [0.1, 0.25] moderate, > 0.25 significant.
inline Band classify_skl(double v) {
  if (!(v >= 0.0)) throw std::invalid_argument("classify_skl: value must be non-negative, got " + format_double(v));
  if (v < 0.1) return Band::little;
  if (v <= 0.25) return Band::moderate;
  return Band::significant;
}

struct DivergenceReport {
  double skl = 0.0;
  double jaccard = 0.0;
  std::size_t i = 0;
  std::size_t u = 0;
  Band band = Band::little;

  friend bool operator==(const DivergenceReport&, const DivergenceReport&) = default;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["skl"] = skl;
    j["jaccard"] = jaccard;
    j["i"] = i;
    j["u"] = u;
    j["band"] = std::string(to_string(band));
    return j;
  }
};

inline DivergenceReport divergence_report(const AlignedDistributions& d) {
  DivergenceReport r;
  r.skl = skl(d);
  r.jaccard = jaccard(d);
  r.i = d.i;
  r.u = d.u;
  r.band = classify_skl(r.skl);
  return r;
}

inline DivergenceReport compare(const FrequencyTable& fa, const FrequencyTable& fb, double floor = kDefaultFloor) {
  return divergence_report(align_union(fa, fb, floor));
}

struct DriftPair {
  std::string from;
  std::string to;
  DivergenceReport report;
};

struct DriftSeries {
  std::vector<DriftPair> pairs;

  // CSV with header "from,to,skl,jaccard".
  void write_csv(std::ostream& out) const {
    out << "from,to,skl,jaccard\n";
    for (const auto& p : pairs) {
      out << p.from << ',' << p.to << ',' << format_double(p.report.skl) << ',' << format_double(p.report.jaccard)
          << '\n';
    }
  }
};

// One report per adjacent pair. Labels must be strictly increasing, which for
// "YYYY-MM" labels is chronological order.
inline DriftSeries drift(const std::vector<std::pair<std::string, FrequencyTable>>& tables,
                         double floor = kDefaultFloor) {
  if (tables.size() < 2) {
    throw std::invalid_argument("drift: needs at least 2 tables, got " + std::to_string(tables.size()));
  }
  detail::check_floor(floor);
  for (std::size_t k = 1; k < tables.size(); ++k) {
    if (!(tables[k - 1].first < tables[k].first)) {
      throw std::invalid_argument("drift: labels out of order at '" + tables[k].first + "'");
    }
  }
  DriftSeries s;
  for (std::size_t k = 1; k < tables.size(); ++k) {
    s.pairs.push_back({tables[k - 1].first, tables[k].first, compare(tables[k - 1].second, tables[k].second, floor)});
  }
  return s;
}

// ---- corpus-level protocol -------------------------------------------------

// Trains one vocabulary per corpus, counts each corpus under its own
// vocabulary and compares the two count tables.
inline DivergenceReport compare_corpora(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                        std::size_t vocab_size, double floor = kDefaultFloor,
                                        const TrainParams& params = {}) {
  detail::check_floor(floor);
  const Vocabulary va = train_unigram(a, vocab_size, params);
  const Vocabulary vb = train_unigram(b, vocab_size, params);
  return compare(token_frequencies(va, a), token_frequencies(vb, b), floor);
}

// Month-by-month frequency tables of a corpus, each under its own vocabulary.
// Segments are trained concurrently on up to `params.num_threads` threads;
// results do not depend on the thread count.
inline std::vector<std::pair<std::string, FrequencyTable>> monthly_tables(const std::vector<Document>& docs,
                                                                          std::size_t vocab_size,
                                                                          const TrainParams& params = {}) {
  const auto segments = segment_by_month(docs);
  std::vector<const CorpusSegment*> order;
  for (const auto& kv : segments) order.push_back(&kv.second);
  std::vector<std::pair<std::string, FrequencyTable>> out(order.size());
  std::vector<std::exception_ptr> errors(order.size());
  TrainParams inner = params;
  inner.num_threads = 1;
  auto work = [&](std::size_t k) {
    try {
      std::vector<std::string> texts;
      for (const auto& d : order[k]->documents) texts.push_back(d.text);
      const Vocabulary v = train_unigram(texts, vocab_size, inner);
      out[k] = {order[k]->label, token_frequencies(v, texts)};
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(params.num_threads, order.size()));
  if (threads == 1) {
    for (std::size_t k = 0; k < order.size(); ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < order.size(); k += threads) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

inline DriftSeries corpus_drift(const std::vector<Document>& docs, std::size_t vocab_size,
                                double floor = kDefaultFloor, const TrainParams& params = {}) {
  detail::check_floor(floor);
  return drift(monthly_tables(docs, vocab_size, params), floor);
}

// ---- synthetic drift -------------------------------------------------------

// Table-level generator: month 0 is a Zipf table over `base_tokens` tokens;
// each following month moves a fraction `rate` of every count onto
// `novel_per_month` tokens never seen before.
inline std::vector<std::pair<std::string, FrequencyTable>> synthetic_drift_tables(std::size_t months,
                                                                                  double rate,
                                                                                  std::size_t base_tokens = 500,
                                                                                  std::size_t novel_per_month = 50,
                                                                                  double total = 1e6) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("synthetic_drift_tables: rate must be in [0, 1)");
  if (months == 0 || base_tokens == 0 || novel_per_month == 0) {
    throw std::invalid_argument("synthetic_drift_tables: sizes must be positive");
  }
  std::map<std::string, double> mass;
  double h = 0.0;
  for (std::size_t k = 0; k < base_tokens; ++k) h += 1.0 / static_cast<double>(k + 1);
  for (std::size_t k = 0; k < base_tokens; ++k) {
    mass["base" + std::to_string(k)] = total / (static_cast<double>(k + 1) * h);
  }
  double hn = 0.0;
  for (std::size_t k = 0; k < novel_per_month; ++k) hn += 1.0 / static_cast<double>(k + 1);

  std::vector<std::pair<std::string, FrequencyTable>> out;
  for (std::size_t m = 0; m < months; ++m) {
    if (m > 0) {
      for (auto& kv : mass) kv.second *= 1.0 - rate;
      for (std::size_t k = 0; k < novel_per_month; ++k) {
        mass["m" + std::to_string(m) + "_" + std::to_string(k)] =
            total * rate / (static_cast<double>(k + 1) * hn);
      }
    }
    FrequencyTable t;
    t.vocab_id = "synthetic";
    for (const auto& [token, x] : mass) {
      const auto n = static_cast<std::uint64_t>(std::llround(x));
      t.counts[token] = n;
      t.total += n;
    }
    char label[16];
    std::snprintf(label, sizeof(label), "m%03zu", m);
    out.emplace_back(label, std::move(t));
  }
  return out;
}

struct DriftStreamConfig {
  std::size_t months = 5;
  std::size_t docs_per_month = 1500;
  std::size_t words_per_doc = 12;
  std::size_t lexicon = 1500;
  std::size_t novel_per_month = 200;
  double rate = 0.1;  // fraction of word mass moved to novel words each month
  std::uint64_t seed = 1;
  int start_year = 2020;
  unsigned start_month = 4;
  Platform platform = Platform::generic;
};

namespace detail {

inline std::string synthetic_word(Rng& rng) {
  static constexpr std::string_view kOnsets[] = {"b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n",
                                                 "p", "r", "s", "t", "v", "w", "z", "ch", "sh", "th", "br",
                                                 "st", "tr", "pl", "gr"};
  static constexpr std::string_view kNuclei[] = {"a", "e", "i", "o", "u", "ai", "ou", "ee", "y"};
  std::string w;
  const std::size_t syllables = 1 + uniform_below(rng, 3);
  for (std::size_t s = 0; s < syllables; ++s) {
    w += kOnsets[uniform_below(rng, std::size(kOnsets))];
    w += kNuclei[uniform_below(rng, std::size(kNuclei))];
  }
  if (uniform_below(rng, 3) == 0) w += kOnsets[uniform_below(rng, std::size(kOnsets))];
  return w;
}

// Distinct words, drawn from a stream seeded by (seed, salt).
inline std::vector<std::string> synthetic_lexicon(std::uint64_t seed, std::uint64_t salt, std::size_t n,
                                                  std::set<std::string>& taken) {
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w = synthetic_word(rng);
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace detail

// Document-level generator. Month 0 draws words from a Zipf lexicon; every
// later month moves a fraction `rate` of the word mass onto a fresh set of
// novel words (older novel sets decay with the base lexicon). The lexicon and
// novel word sets depend only on `seed`, so two streams that differ only in
// `rate` share their vocabulary universe.
inline std::vector<Document> synthetic_drift_corpus(const DriftStreamConfig& cfg) {
  if (!(cfg.rate >= 0.0 && cfg.rate < 1.0)) throw std::invalid_argument("synthetic_drift_corpus: rate must be in [0, 1)");
  if (cfg.months == 0 || cfg.docs_per_month == 0 || cfg.words_per_doc == 0 || cfg.lexicon == 0 ||
      cfg.novel_per_month == 0) {
    throw std::invalid_argument("synthetic_drift_corpus: sizes must be positive");
  }
  if (cfg.start_month < 1 || cfg.start_month > 12) throw std::invalid_argument("synthetic_drift_corpus: bad start month");

  std::set<std::string> taken;
  std::vector<std::vector<std::string>> sets;
  sets.push_back(detail::synthetic_lexicon(cfg.seed, 0, cfg.lexicon, taken));
  for (std::size_t m = 1; m < cfg.months; ++m) {
    sets.push_back(detail::synthetic_lexicon(cfg.seed, m, cfg.novel_per_month, taken));
  }
  auto zipf_cdf = [](std::size_t n) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) cdf[k] = acc += 1.0 / static_cast<double>(k + 1);
    for (double& c : cdf) c /= acc;
    return cdf;
  };
  const auto base_cdf = zipf_cdf(cfg.lexicon);
  const auto novel_cdf = zipf_cdf(cfg.novel_per_month);

  Rng rng(cfg.seed);
  std::vector<Document> docs;
  docs.reserve(cfg.months * cfg.docs_per_month);
  for (std::size_t m = 0; m < cfg.months; ++m) {
    // Mass per word set in month m.
    std::vector<double> set_cdf(m + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      const double w = k == 0 ? std::pow(1.0 - cfg.rate, static_cast<double>(m))
                              : cfg.rate * std::pow(1.0 - cfg.rate, static_cast<double>(m - k));
      set_cdf[k] = acc += w;
    }
    const unsigned month0 = cfg.start_month - 1 + static_cast<unsigned>(m);
    const std::chrono::year_month ym{std::chrono::year(cfg.start_year + static_cast<int>(month0 / 12)),
                                     std::chrono::month(month0 % 12 + 1)};
    const auto first = std::chrono::sys_days(ym / 1);
    const auto days = static_cast<std::uint64_t>((std::chrono::sys_days((ym + std::chrono::months(1)) / 1) - first).count());
    for (std::size_t d = 0; d < cfg.docs_per_month; ++d) {
      Document doc;
      doc.platform = cfg.platform;
      doc.timestamp = Timestamp(first) + std::chrono::seconds(uniform_below(rng, days * 86400));
      for (std::size_t w = 0; w < cfg.words_per_doc; ++w) {
        const double u = uniform_unit(rng) * acc;
        const std::size_t set = static_cast<std::size_t>(std::lower_bound(set_cdf.begin(), set_cdf.end(), u) - set_cdf.begin());
        const auto& cdf = set == 0 ? base_cdf : novel_cdf;
        const double v = uniform_unit(rng);
        std::size_t idx = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), v) - cdf.begin());
        idx = std::min(idx, cdf.size() - 1);
        if (w) doc.text.push_back(' ');
        doc.text += sets[std::min(set, m)][idx];
      }
      docs.push_back(std::move(doc));
    }
  }
  return docs;
}

}  // namespace lexdrift
