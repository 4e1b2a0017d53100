/*
 * Copyright 2026 The Brainet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "brainet/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "brainet/error.h"
#include "brainet/metrics.h"
#include "brainet/random.h"
#include "brainet/splits.h"
#include "gtest/gtest.h"

namespace brainet::evaluation {
namespace {

BiomarkerMatrix Separable(std::uint64_t seed, std::size_t per_group, std::size_t p, double shift) {
  Rng rng(seed);
  BiomarkerMatrix m;
  const auto n = static_cast<Eigen::Index>(2 * per_group);
  m.values.resize(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index r = 0; r < n; ++r) {
    const int label = r < static_cast<Eigen::Index>(per_group) ? 1 : 0;
    m.labels.push_back(label);
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
      m.values(r, c) = rng.Normal() + (c == 0 ? (label ? shift : -shift) : 0.0);
    }
  }
  for (std::size_t j = 0; j < p; ++j) m.feature_names.push_back("f" + std::to_string(j));
  return m;
}

TEST(SplitsTest, StratifiedCounts) {
  const std::size_t balanced[] = {10, 10};
  EXPECT_EQ(splits::StratifiedTestCounts(balanced, 0.2), (std::vector<std::size_t>{2, 2}));
  const std::size_t skewed[] = {9, 11};
  EXPECT_EQ(splits::StratifiedTestCounts(skewed, 0.2), (std::vector<std::size_t>{2, 2}));
}

TEST(SplitsTest, PartitionIsDisjointSeededAndStratified) {
  std::vector<int> labels(37);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 3 == 0 ? 1 : 0;
  splits::SplitSpec spec;
  spec.base_seed = 5;
  for (int it = 0; it < 10; ++it) {
    const splits::TrainTest split = splits::StratifiedSplit(labels, spec, it);
    std::vector<std::size_t> all = split.train;
    all.insert(all.end(), split.test.begin(), split.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(labels.size());
    std::iota(expected.begin(), expected.end(), 0);
    EXPECT_EQ(all, expected);
    EXPECT_TRUE(std::is_sorted(split.test.begin(), split.test.end()));
    const auto cases = std::count_if(split.test.begin(), split.test.end(),
                                     [&](std::size_t i) { return labels[i] == 1; });
    EXPECT_GE(cases, 1);
    EXPECT_LT(cases, static_cast<long>(split.test.size()));
    const splits::TrainTest again = splits::StratifiedSplit(labels, spec, it);
    EXPECT_EQ(split.test, again.test);
  }
  EXPECT_NE(splits::StratifiedSplit(labels, spec, 0).test, splits::StratifiedSplit(labels, spec, 1).test);
}

TEST(SplitsTest, KFoldCoversBothClasses) {
  std::vector<int> labels(25);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i < 10 ? 1 : 0;
  const std::vector<int> folds = splits::StratifiedKFold(labels, 5, 3);
  for (int f = 0; f < 5; ++f) {
    std::set<int> classes;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (folds[i] == f) classes.insert(labels[i]);
    }
    EXPECT_EQ(classes.size(), 2u) << "fold " << f;
  }
  const std::vector<int> tiny = {1, 1, 0, 0, 0, 0};
  EXPECT_THROW(splits::StratifiedKFold(tiny, 5, 0), DataError);
}

TEST(MetricsTest, HandCase) {
  const std::vector<int> y = {1, 1, 0, 0, 1};
  const std::vector<double> p = {0.9, 0.4, 0.6, 0.2, 0.7};
  const metrics::MetricReport m = metrics::ComputeMetrics(y, p);
  EXPECT_EQ(m.confusion.true_positive, 2u);
  EXPECT_EQ(m.confusion.false_negative, 1u);
  EXPECT_EQ(m.confusion.false_positive, 1u);
  EXPECT_EQ(m.confusion.true_negative, 1u);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  EXPECT_DOUBLE_EQ(m.micro_f1, 0.6);
  EXPECT_DOUBLE_EQ(m.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.sensitivity, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.specificity, 0.5);
  EXPECT_DOUBLE_EQ(m.auc, 5.0 / 6.0);
}

TEST(MetricsTest, ZeroDenominators) {
  const std::vector<int> y = {0, 0, 0};
  const std::vector<double> p = {0.1, 0.2, 0.3};
  const metrics::MetricReport m = metrics::ComputeMetrics(y, p);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.specificity, 1.0);
  EXPECT_TRUE(std::isnan(m.auc));
}

TEST(AucTest, HandCase) {
  const std::vector<int> y = {0, 0, 1, 1};
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  const metrics::RocResult roc = metrics::RocAuc(y, s);
  EXPECT_DOUBLE_EQ(roc.auc, 0.75);
  EXPECT_EQ(roc.curve.front().false_positive_rate, 0.0);
  EXPECT_EQ(roc.curve.back().true_positive_rate, 1.0);
}

TEST(AucTest, MatchesPairCountingWithTies) {
  Rng rng(21);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 5 + rng.UniformIndex(40);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.UniformIndex(2));
      s[i] = static_cast<double>(rng.UniformIndex(6)) / 5.0;
    }
    y[0] = 1;
    y[1] = 0;
    long twice_wins = 0;
    long pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] != 1 || y[j] != 0) continue;
        ++pairs;
        twice_wins += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
      }
    }
    const double oracle = static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs));
    EXPECT_NEAR(metrics::RocAuc(y, s).auc, oracle, 1e-15);
  }
}

std::vector<ModelSearch> SmallSearches() {
  std::vector<ModelSearch> searches;
  searches.push_back({models::ModelKind::kElasticNetLogistic,
                      models::HyperparameterGrid{{{"lambda", {0.01, 0.1}}}}});
  searches.push_back({models::ModelKind::kGradientBoostedTrees,
                      models::HyperparameterGrid{{{"rounds", {10}}, {"max_depth", {2}}}}});
  searches.push_back({models::ModelKind::kShallowMlp,
                      models::HyperparameterGrid{{{"hidden_units", {4}}, {"epochs", {80}}}}});
  return searches;
}

BootstrapOptions SmallOptions(int jobs) {
  BootstrapOptions options;
  options.background_size = 8;
  options.explain_options.n_coalitions = 16;
  options.jobs = jobs;
  return options;
}

TEST(BootstrapTest, SingleIteration) {
  const BiomarkerMatrix m = Separable(1, 20, 3, 3.0);
  splits::SplitSpec spec;
  spec.bootstrap_iterations = 1;
  spec.folds = 3;
  const BootstrapResult result = BootstrapRun(m, SmallSearches(), spec, SmallOptions(1));
  ASSERT_EQ(result.records.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    ASSERT_EQ(result.records[k].size(), 1u);
    const IterationRecord& r = result.records[k][0];
    EXPECT_EQ(r.train_size + r.test_size, 40u);
    EXPECT_EQ(r.test_size, 8u);
    EXPECT_GE(r.metrics.auc, 0.9);
    ASSERT_EQ(result.attributions[k].size(), 1u);
    EXPECT_EQ(result.attributions[k][0].values.rows(), 8);
  }
  const nlohmann::ordered_json summary = SummaryJson(result);
  EXPECT_EQ(summary["iterations"], 1);
  EXPECT_EQ(summary["models"]["elastic_net_logistic"]["auc"]["n"], 1);
}

TEST(BootstrapTest, JobInvariance) {
  const BiomarkerMatrix m = Separable(2, 18, 4, 1.0);
  splits::SplitSpec spec;
  spec.bootstrap_iterations = 4;
  spec.folds = 3;
  spec.base_seed = 9;
  const BootstrapResult a = BootstrapRun(m, SmallSearches(), spec, SmallOptions(1));
  const BootstrapResult b = BootstrapRun(m, SmallSearches(), spec, SmallOptions(3));
  const BootstrapResult c = BootstrapRun(m, SmallSearches(), spec, SmallOptions(8));
  EXPECT_EQ(MetricsCsv(a), MetricsCsv(b));
  EXPECT_EQ(MetricsCsv(a), MetricsCsv(c));
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t it = 0; it < 4; ++it) {
      EXPECT_EQ(a.attributions[k][it].values, b.attributions[k][it].values);
      EXPECT_EQ(a.attributions[k][it].values, c.attributions[k][it].values);
    }
  }
}

TEST(BootstrapTest, ErrorsCarryIterationAndModel) {
  const BiomarkerMatrix m = Separable(3, 10, 2, 1.0);
  splits::SplitSpec spec;
  spec.bootstrap_iterations = 2;
  spec.folds = 2;
  std::vector<ModelSearch> searches = {
      {models::ModelKind::kGradientBoostedTrees, models::HyperparameterGrid{{{"bogus", {1}}}}}};
  try {
    BootstrapRun(m, searches, spec, SmallOptions(1));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_NE(std::string(e.what()).find("model gradient_boosted_trees"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("bootstrap iteration"), std::string::npos) << e.what();
  }
}

TEST(SummarizeTest, TypeSevenQuantiles) {
  const std::vector<double> v = {4, 1, 3, 2, std::nan("")};
  const Spread s = Summarize(v);
  EXPECT_EQ(s.count, 4u);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
}

}  // namespace
}  // namespace brainet::evaluation
