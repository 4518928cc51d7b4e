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

#include "lexdrift/benchmark.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "lexdrift/common.hpp"

namespace lexdrift {
namespace {

TaskSpec canon(const std::string& name) {
  const TaskSpec* t = find_canonical_task(name);
  EXPECT_NE(t, nullptr) << name;
  return *t;
}

TEST(Tasks, CanonicalRegistry) {
  const auto& tasks = canonical_tasks();
  ASSERT_EQ(tasks.size(), 11u);
  std::map<BenchPlatform, int> per_platform;
  for (const auto& t : tasks) ++per_platform[t.platform];
  EXPECT_EQ(per_platform[BenchPlatform::twitter], 7);
  EXPECT_EQ(per_platform[BenchPlatform::civil_comments], 1);
  EXPECT_EQ(per_platform[BenchPlatform::yelp], 1);
  EXPECT_EQ(per_platform[BenchPlatform::reddit], 2);
  EXPECT_EQ(canon("te_irony").metric, Metric::binary_f1);
  EXPECT_EQ(canon("te_sentiment").metric, Metric::macro_recall);
  EXPECT_EQ(canon("te_stance").metric, Metric::nonneutral_macro_f1);
  EXPECT_EQ(canon("cct").metric, Metric::acc_and_f1);
  EXPECT_EQ(canon("yrp").metric, Metric::acc_and_f1);
  EXPECT_EQ(canon("rtifu").metric, Metric::rouge1);
  EXPECT_TRUE(canon("rtifu").label_space.empty());
  EXPECT_EQ(canon("ge").metric, Metric::macro_f1);
  EXPECT_EQ(canon("ge").label_space.size(), 28u);
  EXPECT_EQ(canon("te_emoji").label_space.size(), 20u);
  EXPECT_EQ(find_canonical_task("nope"), nullptr);
}

TEST(Tasks, RegistryRoundTrip) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& t : canonical_tasks()) j.push_back(nlohmann::json::parse(to_json(t).dump()));
  EXPECT_EQ(parse_registry(j), canonical_tasks());
  EXPECT_EQ(parse_registry(nlohmann::json::parse(R"([{"name":"te_hate"}])")).front(), canon("te_hate"));
  EXPECT_THROW(parse_registry(nlohmann::json::parse(R"([{"name":"x","metric":"bleu"}])")), std::invalid_argument);
  EXPECT_THROW(parse_registry(nlohmann::json::parse(R"({"name":"x"})")), std::invalid_argument);
}

TEST(Metric, PerfectPredictions) {
  for (const auto& t : canonical_tasks()) {
    std::vector<std::string> golds;
    if (t.metric == Metric::rouge1) {
      golds = {"a short summary", "another one"};
    } else {
      golds = t.label_space;
    }
    const auto r = task_score(t, compute_metric(t, golds, golds));
    EXPECT_DOUBLE_EQ(r.performance_score, 100.0) << t.name;
  }
}

TEST(Metric, BinaryHandExample) {
  const auto t = canon("cct");
  const auto raw = compute_metric(t, {"toxic", "toxic", "non_toxic", "non_toxic"},
                                  {"toxic", "non_toxic", "non_toxic", "non_toxic"});
  EXPECT_DOUBLE_EQ(raw.at("accuracy"), 0.75);
  EXPECT_NEAR(raw.at("f1"), 2.0 / 3.0, 1e-15);
}

TEST(Metric, StanceAllNeutralIsZero) {
  TaskSpec t{"stance3", BenchPlatform::twitter, Metric::nonneutral_macro_f1, {"favor", "against", "neutral"}, "", "neutral"};
  const auto raw = compute_metric(t, {"favor", "against", "neutral", "favor"},
                                  {"neutral", "neutral", "neutral", "neutral"});
  EXPECT_EQ(raw.at("nonneutral_macro_f1"), 0.0);
}

TEST(Metric, AbsentClassesCountAsZero) {
  const auto t = canon("te_hate");
  const auto raw = compute_metric(t, {"hate", "hate"}, {"hate", "hate"});
  EXPECT_DOUBLE_EQ(raw.at("macro_f1"), 0.5);
}

TEST(Metric, Errors) {
  const auto t = canon("te_hate");
  EXPECT_THROW(compute_metric(t, {"hate"}, {}), std::invalid_argument);
  EXPECT_THROW(compute_metric(t, {}, {}), std::invalid_argument);
  EXPECT_THROW(compute_metric(t, {"hate"}, {"love"}), std::invalid_argument);
  EXPECT_THROW(compute_metric(t, {"love"}, {"hate"}), std::invalid_argument);
}

// Reference: full confusion matrix, then per-class precision and recall.
struct Reference {
  std::vector<std::vector<int>> m;  // m[gold][pred]
  std::size_t k;

  Reference(std::size_t classes, const std::vector<int>& g, const std::vector<int>& p)
      : m(classes, std::vector<int>(classes, 0)), k(classes) {
    for (std::size_t i = 0; i < g.size(); ++i) ++m[g[i]][p[i]];
  }
  double f1(std::size_t c) const {
    double tp = m[c][c], pred = 0, gold = 0;
    for (std::size_t o = 0; o < k; ++o) {
      pred += m[o][c];
      gold += m[c][o];
    }
    const double prec = pred > 0 ? tp / pred : 0.0;
    const double rec = gold > 0 ? tp / gold : 0.0;
    return prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  double recall(std::size_t c) const {
    double gold = 0;
    for (std::size_t o = 0; o < k; ++o) gold += m[c][o];
    return gold > 0 ? m[c][c] / gold : 0.0;
  }
  double accuracy() const {
    double diag = 0, all = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        all += m[a][b];
        if (a == b) diag += m[a][b];
      }
    }
    return diag / all;
  }
};

TEST(Metric, MatchesConfusionMatrixReference) {
  Rng rng(29);
  for (int round = 0; round < 500; ++round) {
    const std::size_t k = 2 + uniform_below(rng, 5);
    const std::size_t n = 1 + uniform_below(rng, 30);
    TaskSpec t{"rand", BenchPlatform::twitter, Metric::macro_f1, {}, "", ""};
    for (std::size_t c = 0; c < k; ++c) t.label_space.push_back("c" + std::to_string(c));
    std::vector<int> gi(n), pi(n);
    std::vector<std::string> gs(n), ps(n);
    for (std::size_t i = 0; i < n; ++i) {
      gi[i] = static_cast<int>(uniform_below(rng, k));
      pi[i] = static_cast<int>(uniform_below(rng, k));
      gs[i] = t.label_space[gi[i]];
      ps[i] = t.label_space[pi[i]];
    }
    const Reference ref(k, gi, pi);
    double mf1 = 0, mrec = 0, nn = 0;
    for (std::size_t c = 0; c < k; ++c) {
      mf1 += ref.f1(c);
      mrec += ref.recall(c);
      if (c != 0) nn += ref.f1(c);
    }
    t.metric = Metric::macro_f1;
    EXPECT_NEAR(compute_metric(t, gs, ps).at("macro_f1"), mf1 / k, 1e-12);
    t.metric = Metric::macro_recall;
    EXPECT_NEAR(compute_metric(t, gs, ps).at("macro_recall"), mrec / k, 1e-12);
    t.metric = Metric::nonneutral_macro_f1;
    t.neutral_label = "c0";
    EXPECT_NEAR(compute_metric(t, gs, ps).at("nonneutral_macro_f1"), nn / (k - 1), 1e-12);
    t.metric = Metric::binary_f1;
    t.positive_label = "c1";
    EXPECT_NEAR(compute_metric(t, gs, ps).at("binary_f1"), ref.f1(1), 1e-12);
    t.metric = Metric::acc_and_f1;
    const auto raw = compute_metric(t, gs, ps);
    EXPECT_NEAR(raw.at("accuracy"), ref.accuracy(), 1e-12);
    EXPECT_NEAR(raw.at("f1"), ref.f1(1), 1e-12);
  }
}

TEST(Rouge, Examples) {
  EXPECT_DOUBLE_EQ(rouge1("the cat sat", "the cat sat"), 1.0);
  EXPECT_NEAR(rouge1("the cat sat", "the cat"), 0.8, 1e-15);
  EXPECT_EQ(rouge1("the cat", "a dog"), 0.0);
  EXPECT_EQ(rouge1("", ""), 1.0);
  EXPECT_EQ(rouge1("", "x"), 0.0);
  EXPECT_EQ(rouge1("x", "  "), 0.0);
  EXPECT_DOUBLE_EQ(rouge1("The CAT, sat!", "the cat sat"), 1.0);
  // Clipped counts: "the the the" against one "the".
  EXPECT_NEAR(rouge1("the cat", "the the the"), 2 * (1.0 / 3) * 0.5 / (1.0 / 3 + 0.5), 1e-15);
}

TEST(Rouge, CorpusMean) {
  const auto t = canon("rtifu");
  const auto raw = compute_metric(t, {"the cat sat", "a b"}, {"the cat", "c d"});
  EXPECT_NEAR(raw.at("rouge1"), 0.4, 1e-15);
}

TEST(Score, AccAndF1Examples) {
  EXPECT_NEAR(task_score(canon("cct"), {{"accuracy", 0.8174}, {"f1", 0.6869}}).performance_score, 75.215, 1e-9);
  EXPECT_NEAR(task_score(canon("yrp"), {{"accuracy", 0.9756}, {"f1", 0.9755}}).performance_score, 97.555, 1e-9);
  EXPECT_EQ(task_score(canon("te_hate"), {{"macro_f1", 0.0}}).performance_score, 0.0);
}

TEST(Score, Errors) {
  EXPECT_THROW(task_score(canon("cct"), {{"accuracy", 0.5}}), std::invalid_argument);
  EXPECT_THROW(task_score(canon("te_hate"), {{"binary_f1", 0.5}}), std::invalid_argument);
  EXPECT_THROW(task_score(canon("te_hate"), {{"macro_f1", 1.5}}), std::invalid_argument);
}

struct Row {
  // te_emoji, te_emotion, te_hate, te_irony, te_offense, te_sentiment, te_stance
  std::vector<double> twitter;
  double cct_acc, cct_f1, yrp_acc, yrp_f1, rtifu, ge;
};

std::vector<TaskResult> results_for(const Row& row) {
  static const char* kTwitter[] = {"te_emoji", "te_emotion", "te_hate", "te_irony",
                                   "te_offense", "te_sentiment", "te_stance"};
  std::vector<TaskResult> out;
  for (std::size_t k = 0; k < 7; ++k) {
    const auto t = canon(kTwitter[k]);
    out.push_back(task_score(t, {{std::string(to_string(t.metric)), row.twitter[k] / 100.0}}));
  }
  out.push_back(task_score(canon("cct"), {{"accuracy", row.cct_acc / 100.0}, {"f1", row.cct_f1 / 100.0}}));
  out.push_back(task_score(canon("yrp"), {{"accuracy", row.yrp_acc / 100.0}, {"f1", row.yrp_f1 / 100.0}}));
  out.push_back(task_score(canon("rtifu"), {{"rouge1", row.rtifu / 100.0}}));
  out.push_back(task_score(canon("ge"), {{"macro_f1", row.ge / 100.0}}));
  return out;
}

const Row kAdapted{{37.42, 83.52, 50, 78.7, 78.49, 74.35, 73.15}, 81.74, 68.69, 97.56, 97.55, 29, 55.55};
const Row kBase{{31.25, 75.65, 40.99, 69.96, 77.68, 72.33, 67.98}, 81.58, 65.19, 97.39, 97.39, 28.79, 50.91};

TEST(Summary, PublishedRows) {
  const auto a = summarize(results_for(kAdapted));
  EXPECT_NEAR(a.tema, 67.95, 0.01);
  EXPECT_NEAR(a.pma, 70.75, 0.01);
  EXPECT_NEAR(a.tma, 66.63, 0.01);
  const auto b = summarize(results_for(kBase));
  EXPECT_NEAR(b.tema, 62.26, 0.01);
  EXPECT_NEAR(b.pma, 68.22, 0.01);
  EXPECT_NEAR(b.tma, 62.39, 0.01);
}

TEST(Summary, Constant) {
  auto rs = results_for(kAdapted);
  for (auto& r : rs) r.performance_score = 42.5;
  const auto s = summarize(rs);
  EXPECT_DOUBLE_EQ(s.tema, 42.5);
  EXPECT_DOUBLE_EQ(s.pma, 42.5);
  EXPECT_DOUBLE_EQ(s.tma, 42.5);
}

TEST(Summary, PermutationInvariantAndBounded) {
  Rng rng(31);
  for (int round = 0; round < 200; ++round) {
    auto rs = results_for(kBase);
    for (auto& r : rs) r.performance_score = 100.0 * uniform_unit(rng);
    const auto s = summarize(rs);
    for (std::size_t i = rs.size() - 1; i > 0; --i) std::swap(rs[i], rs[uniform_below(rng, i + 1)]);
    const auto t = summarize(rs);
    EXPECT_EQ(s.tma, t.tma);
    EXPECT_EQ(s.pma, t.pma);
    EXPECT_EQ(s.tema, t.tema);
    double lo = 100, hi = 0, tlo = 100, thi = 0, psum = 0;
    for (const auto& r : rs) {
      lo = std::min(lo, r.performance_score);
      hi = std::max(hi, r.performance_score);
      if (r.task.platform == BenchPlatform::twitter) {
        tlo = std::min(tlo, r.performance_score);
        thi = std::max(thi, r.performance_score);
      }
    }
    for (const auto& [p, v] : s.per_platform) psum += v;
    EXPECT_LE(lo, s.tma);
    EXPECT_LE(s.tma, hi);
    EXPECT_LE(tlo, s.tema);
    EXPECT_LE(s.tema, thi);
    EXPECT_NEAR(s.pma, psum / 4.0, 1e-12);
  }
}

TEST(Summary, MissingAndDuplicateTasks) {
  auto rs = results_for(kAdapted);
  rs.pop_back();
  try {
    summarize(rs);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("missing [ge]"), std::string::npos) << e.what();
  }
  rs = results_for(kAdapted);
  rs.push_back(rs.front());
  try {
    summarize(rs);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate [te_emoji]"), std::string::npos) << e.what();
  }
}

TEST(Predictions, ReadJsonl) {
  std::istringstream in("{\"gold\":\"a\",\"pred\":\"b\"}\n\n{\"gold\":\"c\",\"pred\":\"c\"}\n");
  const auto p = read_predictions(in);
  EXPECT_EQ(p.golds, (std::vector<std::string>{"a", "c"}));
  EXPECT_EQ(p.preds, (std::vector<std::string>{"b", "c"}));
  std::istringstream bad("{\"gold\":\"a\",\"pred\":\"b\"}\n{\"gold\":1}\n");
  try {
    read_predictions(bad);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace lexdrift
