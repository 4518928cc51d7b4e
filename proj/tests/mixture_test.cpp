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

#include "lexdrift/mixture.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace lexdrift {
namespace {

constexpr MixKind kKinds[] = {MixKind::static_mix, MixKind::sequential, MixKind::dynamic};

TEST(Schedule, ParseKind) {
  EXPECT_EQ(parse_mix_kind("static"), MixKind::static_mix);
  EXPECT_EQ(parse_mix_kind("sequence"), MixKind::sequential);
  EXPECT_EQ(parse_mix_kind("sequential"), MixKind::sequential);
  EXPECT_EQ(parse_mix_kind("dynamic"), MixKind::dynamic);
  EXPECT_FALSE(parse_mix_kind("cosine"));
  for (auto k : kKinds) EXPECT_EQ(parse_mix_kind(to_string(k)), k);
}

TEST(Schedule, Errors) {
  EXPECT_THROW(make_schedule(MixKind::static_mix, -0.1, 10), std::invalid_argument);
  EXPECT_THROW(make_schedule(MixKind::static_mix, 1.1, 10), std::invalid_argument);
  EXPECT_THROW(make_schedule(MixKind::static_mix, std::nan(""), 10), std::invalid_argument);
  EXPECT_THROW(make_schedule(MixKind::dynamic, 0.5, 0), std::invalid_argument);
  const auto s = make_schedule(MixKind::static_mix, 0.5, 10);
  EXPECT_THROW(s.fraction(0), std::invalid_argument);
  EXPECT_THROW(s.fraction(11), std::invalid_argument);
  EXPECT_THROW(batch_counts(s, 1, 0), std::invalid_argument);
}

TEST(Schedule, MeanFractionIsRatio) {
  for (auto kind : kKinds) {
    for (double rho : {0.0, 0.2, 0.5, 0.8, 1.0, 0.37}) {
      for (std::uint64_t t : {1ULL, 2ULL, 3ULL, 7ULL, 10ULL, 1000ULL, 131072ULL}) {
        const auto s = make_schedule(kind, rho, t);
        double sum = 0.0;
        for (std::uint64_t k = 1; k <= t; ++k) {
          const double f = s.fraction(k);
          ASSERT_GE(f, 0.0);
          ASSERT_LE(f, 1.0);
          sum += f;
        }
        const double tol = 1.0 / (2.0 * static_cast<double>(t));
        EXPECT_LE(std::abs(sum / static_cast<double>(t) - rho), tol)
            << to_string(kind) << " rho=" << rho << " T=" << t;
        EXPECT_NEAR(s.cumulative(t), sum, 1e-6 * static_cast<double>(t));
      }
    }
  }
}

// Boundary oracle in exact integer arithmetic: rho = num / 100.
TEST(Schedule, SequentialBoundaryIsExactFloor) {
  for (std::uint64_t num : {0ULL, 20ULL, 50ULL, 80ULL, 100ULL, 33ULL, 10ULL, 70ULL, 90ULL}) {
    for (std::uint64_t t = 1; t <= 400; ++t) {
      const auto s = make_schedule(MixKind::sequential, static_cast<double>(num) / 100.0, t);
      EXPECT_EQ(s.boundary(), (100 - num) * t / 100) << num << " " << t;
    }
  }
  const auto big = make_schedule(MixKind::sequential, 0.5, 1ULL << 18);
  EXPECT_EQ(big.boundary(), 1ULL << 17);
}

TEST(Schedule, SequentialPhases) {
  const auto s = make_schedule(MixKind::sequential, 0.8, 100);
  ASSERT_EQ(s.boundary(), 20u);
  EXPECT_EQ(batch_counts(s, 1, 2048), (BatchCounts{2048, 0}));
  EXPECT_EQ(batch_counts(s, 20, 2048), (BatchCounts{2048, 0}));
  EXPECT_EQ(batch_counts(s, 21, 2048), (BatchCounts{0, 2048}));
  EXPECT_EQ(batch_counts(s, 100, 2048), (BatchCounts{0, 2048}));
}

TEST(Schedule, DynamicRampIsLinear) {
  const auto s = make_schedule(MixKind::dynamic, 0.5, 11);
  EXPECT_DOUBLE_EQ(s.fraction(1), 0.0);
  EXPECT_DOUBLE_EQ(s.fraction(6), 0.5);
  EXPECT_DOUBLE_EQ(s.fraction(11), 1.0);
  for (std::uint64_t k = 2; k <= 11; ++k) EXPECT_GE(s.fraction(k), s.fraction(k - 1));
}

TEST(BatchCounts, StaticExamples) {
  const auto half = make_schedule(MixKind::static_mix, 0.5, 50);
  for (std::uint64_t k = 1; k <= 50; ++k) EXPECT_EQ(batch_counts(half, k, 4), (BatchCounts{2, 2}));
  const auto s = make_schedule(MixKind::static_mix, 0.8, 1000);
  for (std::uint64_t k = 1; k <= 1000; ++k) {
    const auto c = batch_counts(s, k, 2048);
    EXPECT_TRUE((c == BatchCounts{410, 1638}) || (c == BatchCounts{409, 1639})) << k;
    EXPECT_LT(std::abs(static_cast<double>(c.n_sm) - 1638.4), 1.0);
  }
}

TEST(BatchCounts, PerStepAndGlobalBounds) {
  for (auto kind : kKinds) {
    for (double rho : {0.2, 0.5, 0.8, 0.123}) {
      for (std::uint64_t b : {1ULL, 3ULL, 64ULL, 2048ULL}) {
        const std::uint64_t t = 257;
        const auto s = make_schedule(kind, rho, t);
        std::uint64_t total_sm = 0;
        for (std::uint64_t k = 1; k <= t; ++k) {
          const auto c = batch_counts(s, k, b);
          ASSERT_EQ(c.n_c4 + c.n_sm, b);
          EXPECT_LT(std::abs(static_cast<double>(c.n_sm) - s.fraction(k) * static_cast<double>(b)), 1.0);
          total_sm += c.n_sm;
        }
        const double want = rho * static_cast<double>(t * b);
        EXPECT_LE(std::abs(static_cast<double>(total_sm) - want), static_cast<double>(b));
      }
    }
  }
}

TEST(Pack, ArithmeticExample) {
  std::vector<std::vector<TokenId>> ex{std::vector<TokenId>(200, 1), std::vector<TokenId>(200, 2),
                                       std::vector<TokenId>(100, 3)};
  const auto out = pack(ex, 512);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].pad_count, 12u);
  EXPECT_EQ(out[0].boundaries, (std::vector<std::uint32_t>{0, 200, 400}));
  EXPECT_EQ(out[0].token_ids.size(), 500u);
}

TEST(Pack, OverflowStartsNewSequence) {
  std::vector<std::vector<TokenId>> ex{std::vector<TokenId>(300, 1), std::vector<TokenId>(300, 2)};
  const auto out = pack(ex, 512);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].pad_count, 212u);
  EXPECT_EQ(out[1].pad_count, 212u);
}

TEST(Pack, LongExampleIsSplit) {
  std::vector<TokenId> ex(1100);
  for (std::size_t k = 0; k < ex.size(); ++k) ex[k] = static_cast<TokenId>(k);
  const auto out = pack({ex}, 512);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].token_ids.size(), 512u);
  EXPECT_EQ(out[1].token_ids.size(), 512u);
  EXPECT_EQ(out[2].token_ids.size(), 76u);
  EXPECT_EQ(out[2].token_ids.front(), 1024u);
}

TEST(Pack, EmptyInput) {
  EXPECT_TRUE(pack({}, 512).empty());
  EXPECT_TRUE(pack({{}, {}}, 512).empty());
  EXPECT_THROW(pack({}, 0), std::invalid_argument);
}

TEST(Pack, ConservesTokensAndRespectsMaxLen) {
  Rng rng(5);
  for (int round = 0; round < 200; ++round) {
    const std::size_t max_len = 1 + uniform_below(rng, 64);
    std::vector<std::vector<TokenId>> ex(uniform_below(rng, 40));
    std::vector<TokenId> flat;
    for (auto& e : ex) {
      e.resize(uniform_below(rng, 100));
      for (auto& t : e) t = static_cast<TokenId>(uniform_below(rng, 1000));
      flat.insert(flat.end(), e.begin(), e.end());
    }
    std::vector<TokenId> got;
    for (const auto& s : pack(ex, max_len)) {
      ASSERT_LE(s.token_ids.size(), max_len);
      ASSERT_FALSE(s.token_ids.empty());
      EXPECT_EQ(s.token_ids.size() + s.pad_count, max_len);
      ASSERT_FALSE(s.boundaries.empty());
      EXPECT_EQ(s.boundaries.front(), 0u);
      for (std::size_t k = 1; k < s.boundaries.size(); ++k) EXPECT_LT(s.boundaries[k - 1], s.boundaries[k]);
      EXPECT_LT(s.boundaries.back(), s.token_ids.size());
      got.insert(got.end(), s.token_ids.begin(), s.token_ids.end());
    }
    // Arrival order is kept, so the concatenation matches exactly.
    EXPECT_EQ(got, flat);
  }
}

TEST(Pack, RecordRoundTrip) {
  std::stringstream buf;
  const std::vector<TokenId> a{1, 2, 0xFFFFFFFFu}, b{};
  write_u32_record(buf, a);
  write_u32_record(buf, b);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 4u + 12u + 4u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[0]), 3u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);
  EXPECT_EQ(read_u32_record(buf), a);
  EXPECT_EQ(read_u32_record(buf), b);
  EXPECT_FALSE(read_u32_record(buf));
}

TEST(Pack, TruncatedRecordThrows) {
  std::stringstream buf;
  write_u32_record(buf, std::vector<TokenId>{1, 2, 3});
  std::string bytes = buf.str();
  bytes.pop_back();
  std::stringstream cut(bytes);
  EXPECT_THROW(read_u32_record(cut), std::exception);
}

constexpr TokenId kBase = 32000;

std::vector<TokenId> random_tokens(Rng& rng, std::size_t n) {
  std::vector<TokenId> out(n);
  for (auto& t : out) t = static_cast<TokenId>(uniform_below(rng, kBase));
  return out;
}

TEST(Corrupt, FifteenOfHundred) {
  Rng rng(1);
  const auto toks = random_tokens(rng, 100);
  const auto ex = span_corrupt(toks, 0.15, 3.0, 9, kBase);
  EXPECT_EQ(ex.noise_tokens, 15u);
  EXPECT_EQ(ex.num_spans, 5u);
  std::size_t in_targets = 0;
  for (TokenId t : ex.targets) in_targets += t < kBase;
  EXPECT_EQ(in_targets, 15u);
  EXPECT_EQ(ex.inputs.size(), 100u - 15u + 5u);
  EXPECT_EQ(ex.targets.back(), kBase + 5);
  EXPECT_EQ(reconstruct(ex, kBase), toks);
}

TEST(Corrupt, IdentityWhenTooShort) {
  for (std::vector<TokenId> toks : {std::vector<TokenId>{}, std::vector<TokenId>{7}, std::vector<TokenId>{7, 8, 9}}) {
    const auto ex = span_corrupt(toks, 0.15, 3.0, 1, kBase);
    EXPECT_EQ(ex.inputs, toks);
    EXPECT_TRUE(ex.targets.empty());
    EXPECT_EQ(ex.num_spans, 0u);
    EXPECT_EQ(reconstruct(ex, kBase), toks);
  }
}

TEST(Corrupt, Errors) {
  const std::vector<TokenId> toks{1, 2, 3, 4};
  EXPECT_THROW(span_corrupt(toks, 0.0, 3.0, 1, kBase), std::invalid_argument);
  EXPECT_THROW(span_corrupt(toks, 1.0, 3.0, 1, kBase), std::invalid_argument);
  EXPECT_THROW(span_corrupt(toks, 0.5, 0.5, 1, kBase), std::invalid_argument);
  EXPECT_THROW(span_corrupt(std::vector<TokenId>{kBase}, 0.5, 3.0, 1, kBase), std::invalid_argument);
}

TEST(Corrupt, DeterministicPerSeed) {
  Rng rng(2);
  const auto toks = random_tokens(rng, 512);
  const auto a = span_corrupt(toks, 0.15, 3.0, 42, kBase);
  const auto b = span_corrupt(toks, 0.15, 3.0, 42, kBase);
  const auto c = span_corrupt(toks, 0.15, 3.0, 43, kBase);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_NE(a.inputs, c.inputs);
}

TEST(Corrupt, InvariantsOnRandomSequences) {
  Rng rng(11);
  for (int round = 0; round < 2000; ++round) {
    const auto toks = random_tokens(rng, uniform_below(rng, 600));
    const double density = 0.01 + 0.98 * uniform_unit(rng);
    const double mean = 1.0 + 9.0 * uniform_unit(rng);
    const auto ex = span_corrupt(toks, density, mean, derive_seed(11, round), kBase);
    ASSERT_EQ(reconstruct(ex, kBase), toks);
    std::vector<TokenId> in_s, tg_s;
    for (TokenId t : ex.inputs) if (t >= kBase) in_s.push_back(t);
    for (TokenId t : ex.targets) if (t >= kBase) tg_s.push_back(t);
    for (std::size_t k = 0; k < in_s.size(); ++k) EXPECT_EQ(in_s[k], kBase + k);
    if (!in_s.empty()) {
      ASSERT_EQ(tg_s.size(), in_s.size() + 1);
      EXPECT_TRUE(std::equal(in_s.begin(), in_s.end(), tg_s.begin()));
      // Non-adjacent: no two sentinels touch in the inputs, and it opens with kept tokens.
      EXPECT_LT(ex.inputs.front(), kBase);
      for (std::size_t k = 1; k < ex.inputs.size(); ++k) {
        EXPECT_FALSE(ex.inputs[k - 1] >= kBase && ex.inputs[k] >= kBase);
      }
      // Every target span is non-empty.
      for (std::size_t k = 1; k < ex.targets.size(); ++k) {
        EXPECT_FALSE(ex.targets[k - 1] >= kBase && ex.targets[k] >= kBase);
      }
      // At least one token is always kept.
      const auto want = static_cast<std::size_t>(std::llround(density * static_cast<double>(toks.size())));
      EXPECT_EQ(ex.noise_tokens, std::min(want, toks.size() - 1));
    }
  }
}

TEST(Corrupt, CorruptionRateAtDefaultDensity) {
  Rng rng(13);
  std::size_t noise = 0, total = 0;
  for (int round = 0; round < 1000; ++round) {
    const auto toks = random_tokens(rng, 512);
    const auto ex = span_corrupt(toks, kDefaultNoiseDensity, kDefaultMeanSpan, derive_seed(13, round), kBase);
    const double rate = static_cast<double>(ex.noise_tokens) / 512.0;
    EXPECT_GE(rate, 0.13);
    EXPECT_LE(rate, 0.17);
    noise += ex.noise_tokens;
    total += 512;
  }
  EXPECT_NEAR(static_cast<double>(noise) / static_cast<double>(total), 0.15, 0.01);
}

}  // namespace
}  // namespace lexdrift
