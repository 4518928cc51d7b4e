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

// Two-corpus pretraining data plumbing: mixing schedules and batch
// composition, next-fit sequence packing, and span corruption.
//
// Throughout, "sm" is the in-domain corpus and "c4" the out-of-domain one;
// a schedule gives the in-domain fraction of every step.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexdrift/common.hpp"

namespace lexdrift {

using TokenId = std::uint32_t;

// ---- schedules -------------------------------------------------------------

enum class MixKind : std::uint8_t { static_mix, sequential, dynamic };

inline std::string_view to_string(MixKind k) {
  switch (k) {
    case MixKind::static_mix:
      return "static";
    case MixKind::sequential:
      return "sequential";
    case MixKind::dynamic:
      return "dynamic";
  }
  return "?";
}

inline std::optional<MixKind> parse_mix_kind(std::string_view s) {
  if (s == "static") return MixKind::static_mix;
  if (s == "sequential" || s == "sequence") return MixKind::sequential;
  if (s == "dynamic") return MixKind::dynamic;
  return std::nullopt;
}

class MixSchedule {
 public:
  MixSchedule(MixKind kind, double ratio_sm, std::uint64_t total_steps)
      : kind_(kind), ratio_(ratio_sm), total_(total_steps) {
    if (!(ratio_sm >= 0.0 && ratio_sm <= 1.0)) {
      throw std::invalid_argument("mix schedule: ratio_sm must be in [0, 1], got " + format_double(ratio_sm));
    }
    if (total_steps == 0) throw std::invalid_argument("mix schedule: total_steps must be at least 1");
    const double out_steps = (1.0 - ratio_) * static_cast<double>(total_);
    double b = std::floor(out_steps);
    // (1 - rho) * T computed in floating point may land just below an integer.
    if (out_steps - b > 1.0 - 1e-9 * std::max(1.0, out_steps)) b += 1.0;
    boundary_ = std::min<std::uint64_t>(static_cast<std::uint64_t>(b), total_);
    boundary_fraction_ = std::clamp(static_cast<double>(boundary_) + 1.0 - out_steps, 0.0, 1.0);
    ramp_start_ = std::max(0.0, 2.0 * ratio_ - 1.0);
    ramp_end_ = std::min(1.0, 2.0 * ratio_);
  }

  MixKind kind() const { return kind_; }
  double ratio_sm() const { return ratio_; }
  std::uint64_t total_steps() const { return total_; }

  // Sequential only: the last purely out-of-domain step,
  // floor((1 - rho) * total_steps). Step boundary() + 1 carries the
  // fractional remainder so that the mean fraction is exactly rho.
  std::uint64_t boundary() const { return boundary_; }

  // In-domain fraction of step `step` (1-based).
  double fraction(std::uint64_t step) const {
    check_step(step);
    switch (kind_) {
      case MixKind::static_mix:
        return ratio_;
      case MixKind::sequential:
        if (step <= boundary_) return 0.0;
        return step == boundary_ + 1 ? boundary_fraction_ : 1.0;
      case MixKind::dynamic:
        if (total_ == 1) return ratio_;
        return ramp_start_ + (ramp_end_ - ramp_start_) * static_cast<double>(step - 1) /
                                 static_cast<double>(total_ - 1);
    }
    return 0.0;
  }

  // Σ fraction(s) for s in [1, step]; step 0 gives 0.
  double cumulative(std::uint64_t step) const {
    if (step == 0) return 0.0;
    check_step(step);
    const auto k = static_cast<double>(step);
    switch (kind_) {
      case MixKind::static_mix:
        return k * ratio_;
      case MixKind::sequential:
        if (step <= boundary_) return 0.0;
        return boundary_fraction_ + static_cast<double>(step - boundary_ - 1);
      case MixKind::dynamic:
        if (total_ == 1) return ratio_;
        return k * ramp_start_ +
               (ramp_end_ - ramp_start_) * (k - 1.0) * k / (2.0 * static_cast<double>(total_ - 1));
    }
    return 0.0;
  }

 private:
  void check_step(std::uint64_t step) const {
    if (step < 1 || step > total_) {
      throw std::invalid_argument("mix schedule: step " + std::to_string(step) + " outside [1, " +
                                  std::to_string(total_) + "]");
    }
  }

  MixKind kind_;
  double ratio_;
  std::uint64_t total_;
  std::uint64_t boundary_ = 0;
  double boundary_fraction_ = 0.0;
  double ramp_start_ = 0.0;
  double ramp_end_ = 0.0;
};

inline MixSchedule make_schedule(MixKind kind, double ratio_sm, std::uint64_t total_steps) {
  return MixSchedule(kind, ratio_sm, total_steps);
}

struct BatchCounts {
  std::uint64_t n_c4 = 0;
  std::uint64_t n_sm = 0;
  friend bool operator==(const BatchCounts&, const BatchCounts&) = default;
};

// Per-step example counts. The in-domain count is the difference of the
// rounded cumulative targets, so rounding error never accumulates: every step
// is within one example of fraction * batch_size and the running total is
// within half an example of the schedule.
inline BatchCounts batch_counts(const MixSchedule& sched, std::uint64_t step, std::uint64_t batch_size) {
  if (batch_size == 0) throw std::invalid_argument("batch_counts: batch_size must be positive");
  if (step < 1 || step > sched.total_steps()) {
    throw std::invalid_argument("batch_counts: step " + std::to_string(step) + " outside [1, " +
                                std::to_string(sched.total_steps()) + "]");
  }
  const auto b = static_cast<double>(batch_size);
  auto target = [&](std::uint64_t s) { return static_cast<std::int64_t>(std::llround(sched.cumulative(s) * b)); };
  std::int64_t sm = target(step) - target(step - 1);
  sm = std::clamp<std::int64_t>(sm, 0, static_cast<std::int64_t>(batch_size));
  return {batch_size - static_cast<std::uint64_t>(sm), static_cast<std::uint64_t>(sm)};
}

// ---- packing ---------------------------------------------------------------

struct PackedSequence {
  std::vector<TokenId> token_ids;      // content, without padding
  std::vector<std::uint32_t> boundaries;  // start offset of each packed example
  std::uint32_t pad_count = 0;         // max_len - token_ids.size()

  friend bool operator==(const PackedSequence&, const PackedSequence&) = default;
};

// Streaming next-fit packer: an example goes into the open sequence if it
// fits, otherwise the open sequence is emitted and a new one started.
// Examples longer than max_len are first cut into max_len pieces.
class Packer {
 public:
  explicit Packer(std::size_t max_len) : max_len_(max_len) {
    if (max_len == 0) throw std::invalid_argument("pack: max_len must be at least 1");
  }

  std::size_t max_len() const { return max_len_; }

  // Adds one example; returns the sequences completed by it.
  std::vector<PackedSequence> add(std::span<const TokenId> example) {
    std::vector<PackedSequence> done;
    for (std::size_t off = 0; off < example.size(); off += max_len_) {
      const auto piece = example.subspan(off, std::min(max_len_, example.size() - off));
      if (open_.token_ids.size() + piece.size() > max_len_) done.push_back(close());
      open_.boundaries.push_back(static_cast<std::uint32_t>(open_.token_ids.size()));
      open_.token_ids.insert(open_.token_ids.end(), piece.begin(), piece.end());
    }
    return done;
  }

  // Emits the open sequence, if any.
  std::optional<PackedSequence> finish() {
    if (open_.token_ids.empty()) return std::nullopt;
    return close();
  }

 private:
  PackedSequence close() {
    PackedSequence out = std::move(open_);
    out.pad_count = static_cast<std::uint32_t>(max_len_ - out.token_ids.size());
    open_ = PackedSequence{};
    return out;
  }

  std::size_t max_len_;
  PackedSequence open_;
};

inline std::vector<PackedSequence> pack(const std::vector<std::vector<TokenId>>& examples, std::size_t max_len) {
  Packer packer(max_len);
  std::vector<PackedSequence> out;
  for (const auto& ex : examples) {
    for (auto& s : packer.add(ex)) out.push_back(std::move(s));
  }
  if (auto last = packer.finish()) out.push_back(std::move(*last));
  return out;
}

// Binary record: u32 LE length, then that many u32 LE token ids. Padding is
// not stored; readers pad to max_len with the sidecar's pad_id.
inline void write_u32_record(std::ostream& out, std::span<const TokenId> ids) {
  auto put = [&](std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                       static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
  };
  put(static_cast<std::uint32_t>(ids.size()));
  for (TokenId id : ids) put(id);
}

// Reads one record; returns nullopt at a clean end of stream.
inline std::optional<std::vector<TokenId>> read_u32_record(std::istream& in) {
  auto get = [&](std::uint32_t& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
    v = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
  };
  std::uint32_t n = 0;
  if (!get(n)) {
    if (in.gcount() == 0) return std::nullopt;
    throw std::invalid_argument("packed record: truncated length prefix");
  }
  std::vector<TokenId> ids(n);
  for (auto& id : ids) {
    if (!get(id)) throw std::invalid_argument("packed record: truncated body");
  }
  return ids;
}

// ---- span corruption -------------------------------------------------------

inline constexpr double kDefaultNoiseDensity = 0.15;
inline constexpr double kDefaultMeanSpan = 3.0;

struct CorruptedExample {
  std::vector<TokenId> inputs;
  std::vector<TokenId> targets;
  std::size_t noise_tokens = 0;
  std::size_t num_spans = 0;
};

namespace detail {

// Splits `n` items into `parts` non-empty runs, uniformly over compositions.
inline std::vector<std::size_t> random_composition(std::size_t n, std::size_t parts, Rng& rng) {
  std::vector<std::size_t> cuts(n - 1);
  for (std::size_t i = 0; i < cuts.size(); ++i) cuts[i] = i + 1;
  for (std::size_t i = 0; i + 1 < parts; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, cuts.size() - i));
    std::swap(cuts[i], cuts[j]);
  }
  cuts.resize(parts - 1);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> sizes;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    sizes.push_back(c - prev);
    prev = c;
  }
  sizes.push_back(n - prev);
  return sizes;
}

}  // namespace detail

// Replaces round(density * |tokens|) tokens, in non-adjacent spans of mean
// length `mean_span`, by sentinels sentinel_base, sentinel_base + 1, ...
// The example starts with uncorrupted tokens. Targets list each sentinel
// followed by the tokens it replaced and end with one more sentinel. Too
// little noise to place a span gives the identity example (no sentinels).
inline CorruptedExample span_corrupt(std::span<const TokenId> tokens, double noise_density, double mean_span,
                                     std::uint64_t seed, TokenId sentinel_base) {
  if (!(noise_density > 0.0 && noise_density < 1.0)) {
    throw std::invalid_argument("span_corrupt: noise_density must be in (0, 1)");
  }
  if (!(mean_span >= 1.0) || !std::isfinite(mean_span)) {
    throw std::invalid_argument("span_corrupt: mean_span must be at least 1");
  }
  for (TokenId t : tokens) {
    if (t >= sentinel_base) {
      throw std::invalid_argument("span_corrupt: token id " + std::to_string(t) + " collides with sentinel range");
    }
  }
  CorruptedExample ex;
  const std::size_t length = tokens.size();
  std::size_t noise = length < 2 ? 0 : static_cast<std::size_t>(std::llround(static_cast<double>(length) * noise_density));
  noise = std::min(noise, length == 0 ? 0 : length - 1);
  if (noise == 0) {
    ex.inputs.assign(tokens.begin(), tokens.end());
    return ex;
  }
  const std::size_t nonnoise = length - noise;
  std::size_t spans = static_cast<std::size_t>(std::llround(static_cast<double>(noise) / mean_span));
  spans = std::clamp<std::size_t>(spans, 1, std::min(noise, nonnoise));
  if (static_cast<std::uint64_t>(sentinel_base) + spans > UINT32_MAX) {
    throw std::invalid_argument("span_corrupt: sentinel ids overflow 32 bits");
  }

  Rng rng(seed);
  const auto noise_sizes = detail::random_composition(noise, spans, rng);
  const auto keep_sizes = detail::random_composition(nonnoise, spans, rng);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < spans; ++k) {
    ex.inputs.insert(ex.inputs.end(), tokens.begin() + pos, tokens.begin() + pos + keep_sizes[k]);
    pos += keep_sizes[k];
    const TokenId sentinel = sentinel_base + static_cast<TokenId>(k);
    ex.inputs.push_back(sentinel);
    ex.targets.push_back(sentinel);
    ex.targets.insert(ex.targets.end(), tokens.begin() + pos, tokens.begin() + pos + noise_sizes[k]);
    pos += noise_sizes[k];
  }
  ex.targets.push_back(sentinel_base + static_cast<TokenId>(spans));
  ex.noise_tokens = noise;
  ex.num_spans = spans;
  return ex;
}

// Splices targets back into inputs at matching sentinels.
inline std::vector<TokenId> reconstruct(const CorruptedExample& ex, TokenId sentinel_base) {
  // Target span of sentinel k: between its occurrence and the next sentinel.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::vector<TokenId> order;
  for (std::size_t i = 0; i < ex.targets.size(); ++i) {
    if (ex.targets[i] >= sentinel_base) {
      if (!spans.empty()) spans.back().second = i;
      order.push_back(ex.targets[i]);
      spans.push_back({i + 1, ex.targets.size()});
    }
  }
  std::vector<TokenId> out;
  std::size_t next = 0;
  for (TokenId t : ex.inputs) {
    if (t < sentinel_base) {
      out.push_back(t);
      continue;
    }
    if (next >= order.size() || order[next] != t) {
      throw std::invalid_argument("reconstruct: sentinel " + std::to_string(t) + " has no matching target span");
    }
    out.insert(out.end(), ex.targets.begin() + spans[next].first, ex.targets.begin() + spans[next].second);
    ++next;
  }
  return out;
}

}  // namespace lexdrift
