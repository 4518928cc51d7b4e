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

// Benchmark scoring: per-task metrics (macro/binary F1, macro recall,
// accuracy, ROUGE-1), performance scores on a 0-100 scale and the task-,
// platform- and Twitter-task-averaged summaries.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace lexdrift {

enum class BenchPlatform : std::uint8_t { twitter, civil_comments, yelp, reddit };

inline std::string_view to_string(BenchPlatform p) {
  switch (p) {
    case BenchPlatform::twitter:
      return "twitter";
    case BenchPlatform::civil_comments:
      return "civil_comments";
    case BenchPlatform::yelp:
      return "yelp";
    case BenchPlatform::reddit:
      return "reddit";
  }
  return "?";
}

inline std::optional<BenchPlatform> parse_bench_platform(std::string_view s) {
  for (auto p : {BenchPlatform::twitter, BenchPlatform::civil_comments, BenchPlatform::yelp, BenchPlatform::reddit}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

enum class Metric : std::uint8_t { macro_f1, binary_f1, macro_recall, nonneutral_macro_f1, acc_and_f1, rouge1 };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::macro_f1:
      return "macro_f1";
    case Metric::binary_f1:
      return "binary_f1";
    case Metric::macro_recall:
      return "macro_recall";
    case Metric::nonneutral_macro_f1:
      return "nonneutral_macro_f1";
    case Metric::acc_and_f1:
      return "acc_and_f1";
    case Metric::rouge1:
      return "rouge1";
  }
  return "?";
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  for (auto m : {Metric::macro_f1, Metric::binary_f1, Metric::macro_recall, Metric::nonneutral_macro_f1,
                 Metric::acc_and_f1, Metric::rouge1}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

struct TaskSpec {
  std::string name;
  BenchPlatform platform = BenchPlatform::twitter;
  Metric metric = Metric::macro_f1;
  std::vector<std::string> label_space;  // empty for generation tasks
  std::string positive_label;            // binary_f1, acc_and_f1
  std::string neutral_label;             // nonneutral_macro_f1

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

// The eleven benchmark tasks, in reporting order.
inline const std::vector<TaskSpec>& canonical_tasks() {
  static const std::vector<TaskSpec> tasks = [] {
    std::vector<std::string> emoji;
    for (int k = 0; k < 20; ++k) emoji.push_back(std::to_string(k));
    using P = BenchPlatform;
    using M = Metric;
    return std::vector<TaskSpec>{
        {"te_emoji", P::twitter, M::macro_f1, emoji, "", ""},
        {"te_emotion", P::twitter, M::macro_f1, {"anger", "joy", "optimism", "sadness"}, "", ""},
        {"te_hate", P::twitter, M::macro_f1, {"non-hate", "hate"}, "", ""},
        {"te_irony", P::twitter, M::binary_f1, {"non_irony", "irony"}, "irony", ""},
        {"te_offense", P::twitter, M::macro_f1, {"non-offensive", "offensive"}, "", ""},
        {"te_sentiment", P::twitter, M::macro_recall, {"negative", "neutral", "positive"}, "", ""},
        {"te_stance", P::twitter, M::nonneutral_macro_f1, {"none", "against", "favor"}, "", "none"},
        {"cct", P::civil_comments, M::acc_and_f1, {"non_toxic", "toxic"}, "toxic", ""},
        {"yrp", P::yelp, M::acc_and_f1, {"negative", "positive"}, "positive", ""},
        {"rtifu", P::reddit, M::rouge1, {}, "", ""},
        {"ge", P::reddit, M::macro_f1,
         {"admiration", "amusement", "anger", "annoyance", "approval", "caring", "confusion",
          "curiosity", "desire", "disappointment", "disapproval", "disgust", "embarrassment", "excitement",
          "fear", "gratitude", "grief", "joy", "love", "nervousness", "optimism", "pride", "realization",
          "relief", "remorse", "sadness", "surprise", "neutral"},
         "", ""},
    };
  }();
  return tasks;
}

inline const TaskSpec* find_canonical_task(std::string_view name) {
  for (const auto& t : canonical_tasks()) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

using RawMetrics = std::map<std::string, double>;

// ---- ROUGE-1 ---------------------------------------------------------------

namespace detail {

// Lowercase, then split on anything outside [a-z0-9].
inline std::vector<std::string> rouge_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    const auto lc = static_cast<unsigned char>(c < 0x80 ? std::tolower(c) : c);
    if ((lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9')) {
      cur.push_back(static_cast<char>(lc));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

}  // namespace detail

// Unigram-overlap F-measure with clipped counts. Both sides without tokens
// score 1, exactly one side without tokens scores 0.
inline double rouge1(std::string_view gold, std::string_view pred) {
  const auto g = detail::rouge_tokens(gold);
  const auto p = detail::rouge_tokens(pred);
  if (g.empty() && p.empty()) return 1.0;
  if (g.empty() || p.empty()) return 0.0;
  std::unordered_map<std::string, std::int64_t> gc;
  for (const auto& t : g) ++gc[t];
  std::int64_t overlap = 0;
  for (const auto& t : p) {
    auto it = gc.find(t);
    if (it != gc.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

// ---- classification metrics ------------------------------------------------

namespace detail {

struct ClassCounts {
  std::int64_t tp = 0, fp = 0, fn = 0;
  double f1() const { return safe_div(2.0 * static_cast<double>(tp), static_cast<double>(2 * tp + fp + fn)); }
  double recall() const { return safe_div(static_cast<double>(tp), static_cast<double>(tp + fn)); }
};

}  // namespace detail

inline RawMetrics compute_metric(const TaskSpec& spec, const std::vector<std::string>& golds,
                                 const std::vector<std::string>& preds) {
  if (golds.size() != preds.size()) {
    throw std::invalid_argument(spec.name + ": " + std::to_string(golds.size()) + " golds but " +
                                std::to_string(preds.size()) + " predictions");
  }
  if (golds.empty()) throw std::invalid_argument(spec.name + ": no predictions");
  RawMetrics out;
  const auto n = static_cast<double>(golds.size());

  if (spec.metric == Metric::rouge1) {
    double sum = 0.0;
    for (std::size_t k = 0; k < golds.size(); ++k) sum += rouge1(golds[k], preds[k]);
    out["rouge1"] = sum / n;
    return out;
  }

  if (spec.label_space.empty()) throw std::invalid_argument(spec.name + ": classification task without labels");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < spec.label_space.size(); ++c) {
    if (!index.emplace(spec.label_space[c], c).second) {
      throw std::invalid_argument(spec.name + ": duplicate label '" + spec.label_space[c] + "'");
    }
  }
  auto lookup = [&](const std::string& label, const char* what) {
    const auto it = index.find(label);
    if (it == index.end()) throw std::invalid_argument(spec.name + ": unknown " + what + " label '" + label + "'");
    return it->second;
  };
  std::vector<detail::ClassCounts> counts(spec.label_space.size());
  std::int64_t correct = 0;
  for (std::size_t k = 0; k < golds.size(); ++k) {
    const std::size_t g = lookup(golds[k], "gold");
    const std::size_t p = lookup(preds[k], "predicted");
    if (g == p) {
      ++counts[g].tp;
      ++correct;
    } else {
      ++counts[p].fp;
      ++counts[g].fn;
    }
  }
  auto class_of = [&](const std::string& label, const char* role) {
    if (label.empty()) throw std::invalid_argument(spec.name + ": metric needs a " + role + " label");
    return lookup(label, role);
  };
  auto mean_over = [&](auto&& value, std::optional<std::size_t> skip) {
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (skip && c == *skip) continue;
      sum += value(counts[c]);
      ++k;
    }
    return detail::safe_div(sum, static_cast<double>(k));
  };
  const auto f1 = [](const detail::ClassCounts& c) { return c.f1(); };
  const auto recall = [](const detail::ClassCounts& c) { return c.recall(); };

  switch (spec.metric) {
    case Metric::macro_f1:
      out["macro_f1"] = mean_over(f1, std::nullopt);
      break;
    case Metric::binary_f1:
      out["binary_f1"] = counts[class_of(spec.positive_label, "positive")].f1();
      break;
    case Metric::macro_recall:
      out["macro_recall"] = mean_over(recall, std::nullopt);
      break;
    case Metric::nonneutral_macro_f1:
      out["nonneutral_macro_f1"] = mean_over(f1, class_of(spec.neutral_label, "neutral"));
      break;
    case Metric::acc_and_f1:
      out["accuracy"] = static_cast<double>(correct) / n;
      out["f1"] = counts[class_of(spec.positive_label, "positive")].f1();
      break;
    case Metric::rouge1:
      break;
  }
  return out;
}

// ---- scores ----------------------------------------------------------------

struct TaskResult {
  TaskSpec task;
  RawMetrics raw_metrics;
  double performance_score = 0.0;
};

inline TaskResult task_score(const TaskSpec& spec, const RawMetrics& raw) {
  auto get = [&](const std::string& key) {
    const auto it = raw.find(key);
    if (it == raw.end()) throw std::invalid_argument(spec.name + ": missing metric '" + key + "'");
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw std::invalid_argument(spec.name + ": metric '" + key + "' outside [0, 1]");
    }
    return it->second;
  };
  TaskResult r;
  r.task = spec;
  if (spec.metric == Metric::acc_and_f1) {
    const double acc = get("accuracy");
    const double f1 = get("f1");
    r.raw_metrics = {{"accuracy", acc}, {"f1", f1}};
    r.performance_score = 100.0 * (acc + f1) / 2.0;
  } else {
    const std::string key(to_string(spec.metric));
    const double v = get(key);
    r.raw_metrics = {{key, v}};
    r.performance_score = 100.0 * v;
  }
  return r;
}

struct SummaryScores {
  double tema = 0.0;
  double pma = 0.0;
  double tma = 0.0;
  std::map<std::string, double> per_platform;
  std::map<std::string, double> per_task;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tema"] = tema;
    j["pma"] = pma;
    j["tma"] = tma;
    j["per_platform"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : per_platform) j["per_platform"][k] = v;
    j["per_task"] = nlohmann::ordered_json::object();
    for (const auto& t : canonical_tasks()) {
      if (auto it = per_task.find(t.name); it != per_task.end()) j["per_task"][t.name] = it->second;
    }
    return j;
  }
};

// Requires exactly the eleven canonical tasks. Sums run in canonical order,
// so the result does not depend on the input order.
inline SummaryScores summarize(const std::vector<TaskResult>& results) {
  std::map<std::string, const TaskResult*> by_name;
  std::vector<std::string> unknown, duplicate, missing;
  for (const auto& r : results) {
    const TaskSpec* canon = find_canonical_task(r.task.name);
    if (!canon) {
      unknown.push_back(r.task.name);
    } else if (canon->platform != r.task.platform || canon->metric != r.task.metric) {
      unknown.push_back(r.task.name + " (platform/metric mismatch)");
    } else if (!by_name.emplace(r.task.name, &r).second) {
      duplicate.push_back(r.task.name);
    }
  }
  for (const auto& t : canonical_tasks()) {
    if (!by_name.count(t.name)) missing.push_back(t.name);
  }
  if (!unknown.empty() || !duplicate.empty() || !missing.empty()) {
    std::string msg = "summarize:";
    auto list = [&](const char* what, const std::vector<std::string>& names) {
      if (names.empty()) return;
      msg += std::string(" ") + what + " [";
      for (std::size_t k = 0; k < names.size(); ++k) msg += (k ? ", " : "") + names[k];
      msg += "]";
    };
    list("missing", missing);
    list("duplicate", duplicate);
    list("unknown", unknown);
    throw std::invalid_argument(msg);
  }

  SummaryScores s;
  std::map<std::string, std::pair<double, int>> platform_sum;
  double total = 0.0;
  for (const auto& t : canonical_tasks()) {
    const double v = by_name.at(t.name)->performance_score;
    s.per_task[t.name] = v;
    total += v;
    auto& ps = platform_sum[std::string(to_string(t.platform))];
    ps.first += v;
    ++ps.second;
  }
  s.tma = total / static_cast<double>(canonical_tasks().size());
  double platform_total = 0.0;
  for (auto p : {BenchPlatform::twitter, BenchPlatform::civil_comments, BenchPlatform::yelp, BenchPlatform::reddit}) {
    const auto& ps = platform_sum.at(std::string(to_string(p)));
    const double mean = ps.first / ps.second;
    s.per_platform[std::string(to_string(p))] = mean;
    platform_total += mean;
  }
  s.pma = platform_total / 4.0;
  s.tema = s.per_platform.at("twitter");
  return s;
}

// ---- files -----------------------------------------------------------------

// Predictions JSONL: {"gold": string, "pred": string} per line; blank lines
// are skipped.
struct Predictions {
  std::vector<std::string> golds;
  std::vector<std::string> preds;
};

inline Predictions read_predictions(std::istream& in) {
  Predictions out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("gold") || !j.contains("pred") ||
        !j["gold"].is_string() || !j["pred"].is_string()) {
      throw std::invalid_argument("predictions line " + std::to_string(line_no) +
                                  ": expected {\"gold\": string, \"pred\": string}");
    }
    out.golds.push_back(j["gold"].get<std::string>());
    out.preds.push_back(j["pred"].get<std::string>());
  }
  return out;
}

inline nlohmann::ordered_json to_json(const TaskSpec& t) {
  nlohmann::ordered_json j;
  j["name"] = t.name;
  j["platform"] = std::string(to_string(t.platform));
  j["metric"] = std::string(to_string(t.metric));
  j["label_space"] = t.label_space;
  if (!t.positive_label.empty()) j["positive_label"] = t.positive_label;
  if (!t.neutral_label.empty()) j["neutral_label"] = t.neutral_label;
  return j;
}

// Task registry: JSON list of task specs. Fields other than name default to
// the canonical task of that name.
inline std::vector<TaskSpec> parse_registry(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("registry: expected a JSON list of tasks");
  std::vector<TaskSpec> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("name") || !e["name"].is_string()) {
      throw std::invalid_argument("registry: every task needs a string \"name\"");
    }
    TaskSpec t;
    t.name = e["name"].get<std::string>();
    if (const TaskSpec* canon = find_canonical_task(t.name)) t = *canon;
    try {
      if (e.contains("platform")) {
        const auto p = parse_bench_platform(e["platform"].get<std::string>());
        if (!p) throw std::invalid_argument("unknown platform");
        t.platform = *p;
      }
      if (e.contains("metric")) {
        const auto m = parse_metric(e["metric"].get<std::string>());
        if (!m) throw std::invalid_argument("unknown metric");
        t.metric = *m;
      }
      if (e.contains("label_space")) t.label_space = e["label_space"].get<std::vector<std::string>>();
      if (e.contains("positive_label")) t.positive_label = e["positive_label"].get<std::string>();
      if (e.contains("neutral_label")) t.neutral_label = e["neutral_label"].get<std::string>();
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument("registry: task '" + t.name + "': " + ex.what());
    } catch (const std::invalid_argument& ex) {
      throw std::invalid_argument("registry: task '" + t.name + "': " + ex.what());
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace lexdrift
