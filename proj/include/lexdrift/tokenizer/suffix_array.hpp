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

// Suffix array + LCP machinery for extracting frequent substrings from a
// weighted word list.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <string>
#include <vector>

namespace lexdrift {

// Suffix array of an integer string by prefix doubling with counting sorts,
// O(n log n). Symbols may be arbitrary (including negative) int32 values.
inline std::vector<std::int32_t> build_suffix_array(std::span<const std::int32_t> s) {
  const std::size_t n = s.size();
  std::vector<std::int32_t> sa(n), rank(n), tmp(n);
  if (n == 0) return sa;

  std::iota(sa.begin(), sa.end(), 0);
  std::sort(sa.begin(), sa.end(), [&](std::int32_t a, std::int32_t b) {
    return s[a] != s[b] ? s[a] < s[b] : a < b;
  });
  std::int32_t classes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && s[sa[i]] != s[sa[i - 1]]) ++classes;
    rank[sa[i]] = classes;
  }
  ++classes;

  std::vector<std::int32_t> order(n), count;
  for (std::size_t k = 1; static_cast<std::size_t>(classes) < n; k <<= 1) {
    // Order by second key: suffixes without a partner first, then by sa.
    std::size_t m = 0;
    for (std::size_t i = n - std::min(k, n); i < n; ++i) order[m++] = static_cast<std::int32_t>(i);
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::size_t>(sa[i]) >= k) order[m++] = sa[i] - static_cast<std::int32_t>(k);
    }
    // Stable counting sort by first key.
    count.assign(classes + 1, 0);
    for (std::size_t i = 0; i < n; ++i) ++count[rank[i] + 1];
    for (std::int32_t c = 0; c < classes; ++c) count[c + 1] += count[c];
    for (std::size_t i = 0; i < n; ++i) sa[count[rank[order[i]]]++] = order[i];

    auto second = [&](std::int32_t i) -> std::int32_t {
      return static_cast<std::size_t>(i) + k < n ? rank[i + k] : -1;
    };
    tmp[sa[0]] = 0;
    classes = 1;
    for (std::size_t i = 1; i < n; ++i) {
      const std::int32_t a = sa[i - 1], b = sa[i];
      if (rank[a] != rank[b] || second(a) != second(b)) ++classes;
      tmp[b] = classes - 1;
    }
    rank.swap(tmp);
  }
  return sa;
}

// Kasai's algorithm. lcp[i] = LCP(suffix sa[i-1], suffix sa[i]); lcp[0] = 0.
inline std::vector<std::int32_t> build_lcp(std::span<const std::int32_t> s,
                                           std::span<const std::int32_t> sa) {
  const std::size_t n = s.size();
  std::vector<std::int32_t> rank(n), lcp(n, 0);
  for (std::size_t i = 0; i < n; ++i) rank[sa[i]] = static_cast<std::int32_t>(i);
  std::size_t h = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rank[i] == 0) {
      h = 0;
      continue;
    }
    const std::size_t j = static_cast<std::size_t>(sa[rank[i] - 1]);
    while (i + h < n && j + h < n && s[i + h] == s[j + h]) ++h;
    lcp[rank[i]] = static_cast<std::int32_t>(h);
    if (h > 0) --h;
  }
  return lcp;
}

struct WeightedWord {
  std::u32string text;
  double weight = 0.0;
};

struct SubstringCount {
  std::u32string text;
  double frequency = 0.0;  // weighted occurrence count
  double score() const { return frequency * static_cast<double>(text.size()); }
};

// Returns the `top_k` distinct substrings of length [min_len, max_len] with
// the highest frequency * length, where frequency counts every occurrence in
// every word times that word's weight. Ties go to the lexicographically
// smaller string; the result is sorted best first.
//
// Words are concatenated with unique separators, so no repeated substring
// crosses a word boundary. Every distinct substring is visited exactly once:
// an LCP interval with depth d and parent depth p owns the lengths (p, d];
// a leaf owns the lengths above its deepest neighbouring LCP.
inline std::vector<SubstringCount> frequent_substrings(const std::vector<WeightedWord>& words,
                                                       std::size_t min_len, std::size_t max_len,
                                                       std::size_t top_k) {
  std::vector<std::int32_t> text;
  std::vector<std::int32_t> word_of;    // word index per position
  std::vector<std::int32_t> remaining;  // chars until the separator
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& t = words[w].text;
    for (std::size_t i = 0; i < t.size(); ++i) {
      text.push_back(static_cast<std::int32_t>(t[i]));
      word_of.push_back(static_cast<std::int32_t>(w));
      remaining.push_back(static_cast<std::int32_t>(t.size() - i));
    }
    text.push_back(-1 - static_cast<std::int32_t>(w));
    word_of.push_back(static_cast<std::int32_t>(w));
    remaining.push_back(0);
  }
  const std::size_t n = text.size();
  if (n == 0 || top_k == 0) return {};

  const auto sa = build_suffix_array(text);
  const auto lcp = build_lcp(text, sa);
  std::vector<double> prefix_weight(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix_weight[i + 1] = prefix_weight[i] + words[word_of[sa[i]]].weight;

  struct Entry {
    double score;
    std::int32_t pos;
    std::int32_t len;
    double freq;
  };
  auto less_text = [&](const Entry& a, const Entry& b) {
    return std::lexicographical_compare(text.begin() + a.pos, text.begin() + a.pos + a.len,
                                        text.begin() + b.pos, text.begin() + b.pos + b.len);
  };
  // Heap top = worst retained entry.
  auto better = [&](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    return less_text(a, b);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(better)> heap(better);

  auto offer = [&](std::int32_t pos, std::size_t from_len, std::size_t to_len, double freq) {
    to_len = std::min(to_len, max_len);
    for (std::size_t len = std::max(from_len, min_len); len <= to_len; ++len) {
      Entry e{freq * static_cast<double>(len), pos, static_cast<std::int32_t>(len), freq};
      if (heap.size() < top_k) {
        heap.push(e);
      } else if (better(e, heap.top())) {
        heap.pop();
        heap.push(e);
      }
    }
  };

  // Internal nodes.
  struct Open {
    std::int32_t depth;
    std::size_t lb;
  };
  std::vector<Open> stack{{0, 0}};
  for (std::size_t i = 1; i <= n; ++i) {
    const std::int32_t cur = i < n ? lcp[i] : 0;
    std::size_t lb = i - 1;
    while (cur < stack.back().depth) {
      const Open top = stack.back();
      stack.pop_back();
      const std::int32_t parent = std::max(cur, stack.back().depth);
      offer(sa[top.lb], static_cast<std::size_t>(parent) + 1, static_cast<std::size_t>(top.depth),
            prefix_weight[i] - prefix_weight[top.lb]);
      lb = top.lb;
    }
    if (cur > stack.back().depth) stack.push_back({cur, lb});
  }
  // Leaves.
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t rem = remaining[sa[i]];
    if (rem == 0) continue;
    const std::int32_t parent = std::max(lcp[i], i + 1 < n ? lcp[i + 1] : 0);
    offer(sa[i], static_cast<std::size_t>(parent) + 1, static_cast<std::size_t>(rem),
          words[word_of[sa[i]]].weight);
  }

  std::vector<SubstringCount> out;
  out.reserve(heap.size());
  while (!heap.empty()) {
    const Entry e = heap.top();
    heap.pop();
    SubstringCount sc;
    sc.text.reserve(e.len);
    for (std::int32_t k = 0; k < e.len; ++k) sc.text.push_back(static_cast<char32_t>(text[e.pos + k]));
    sc.frequency = e.freq;
    out.push_back(std::move(sc));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace lexdrift
