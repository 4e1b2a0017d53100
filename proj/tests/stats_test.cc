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

#include "brainet/stats.h"

#include <cmath>
#include <filesystem>
#include <vector>

#include "brainet/error.h"
#include "brainet/random.h"
#include "brainet/special_functions.h"
#include "gtest/gtest.h"

namespace brainet::stats {
namespace {

// Centred product-moment coefficient.
double ProductMoment(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k] / n;
    my += y[k] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

BiomarkerMatrix Matrix(const std::vector<std::vector<double>>& cols) {
  BiomarkerMatrix m;
  const std::size_t n = cols.front().size();
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    m.feature_names.push_back("c" + std::to_string(j));
    for (std::size_t r = 0; r < n; ++r) {
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cols[j][r];
    }
  }
  for (std::size_t r = 0; r < n; ++r) m.labels.push_back(static_cast<int>(r % 2));
  return m;
}

TEST(PearsonTest, HandValues) {
  EXPECT_EQ(Pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}), 0.5);
  EXPECT_DOUBLE_EQ(Pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 1.0);
  EXPECT_DOUBLE_EQ(Pearson(std::vector<double>{1, 5, 2, 8}, std::vector<double>{-1, -5, -2, -8}), -1.0);
}

TEST(PearsonTest, ConstantInputIsUndefined) {
  try {
    Pearson(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("undefined correlation"), std::string::npos);
  }
}

TEST(PearsonTest, RawSumFormEqualsProductMoment) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.UniformIndex(200);
    const double offset = rng.Uniform(-1000, 1000);
    const double scale = std::exp(rng.Uniform(-5, 5));
    std::vector<double> x(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = offset + scale * rng.Normal();
      y[k] = rng.Uniform(-0.9, 0.9) * x[k] + rng.Normal();
    }
    EXPECT_NEAR(Pearson(x, y), ProductMoment(x, y), 1e-12);
  }
}

TEST(CorrelationMatrixTest, SingleAndDuplicated) {
  const BiomarkerMatrix m = Matrix({{1, 2, 4, 3}, {1, 2, 4, 3}, {0, 1, 0, 2}});
  const std::vector<std::string> one = {"c0"};
  const CorrelationMatrix single = ComputeCorrelationMatrix(m, one);
  ASSERT_EQ(single.r.rows(), 1);
  EXPECT_EQ(single.r(0, 0), 1.0);
  const std::vector<std::string> all = {"c0", "c1", "c2"};
  const CorrelationMatrix c = ComputeCorrelationMatrix(m, all);
  EXPECT_NEAR(c.r(0, 1), 1.0, 1e-15);
  EXPECT_EQ(c.r(1, 2), c.r(2, 1));
  EXPECT_NO_THROW(c.Validate());
}

TEST(CorrelationMatrixTest, ConstantColumnFails) {
  const BiomarkerMatrix m = Matrix({{1, 2, 3}, {4, 4, 4}});
  const std::vector<std::string> all = {"c0", "c1"};
  EXPECT_THROW(ComputeCorrelationMatrix(m, all), DataError);
}

TEST(CorrelationMatrixTest, AffineInvariance) {
  Rng rng(6);
  std::vector<std::vector<double>> cols(4, std::vector<double>(80));
  for (auto& col : cols) {
    for (auto& v : col) v = rng.Normal();
  }
  for (std::size_t k = 0; k < 80; ++k) cols[1][k] += cols[0][k];
  const BiomarkerMatrix m = Matrix(cols);
  BiomarkerMatrix shifted = m;
  for (int j = 0; j < 4; ++j) shifted.values.col(j) = 7.5 * shifted.values.col(j).array() + 3.0 * (j + 1);
  const std::vector<std::string> all = {"c0", "c1", "c2", "c3"};
  const auto a = ComputeCorrelationMatrix(m, all);
  const auto b = ComputeCorrelationMatrix(shifted, all);
  EXPECT_LT((a.r - b.r).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CorrelationMatrixTest, IndependentNoiseNearZero) {
  Rng rng(10);
  std::vector<std::vector<double>> cols(3, std::vector<double>(10000));
  for (auto& col : cols) {
    for (auto& v : col) v = rng.Normal();
  }
  const std::vector<std::string> all = {"c0", "c1", "c2"};
  const auto c = ComputeCorrelationMatrix(Matrix(cols), all, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) EXPECT_LE(std::fabs(c.r(i, j)), 0.05);
    }
  }
}

TEST(CorrelationMatrixTest, CsvRoundTrip) {
  const BiomarkerMatrix m = Matrix({{1, 2, 4, 3}, {0.5, 2, 1, 3}, {0, 1, 0, 2}});
  const std::vector<std::string> all = {"c0", "c1", "c2"};
  const auto c = ComputeCorrelationMatrix(m, all);
  const auto path = std::filesystem::temp_directory_path() / "brainet_corr_test.csv";
  WriteCorrelationCsv(c, path);
  const auto back = ReadCorrelationCsv(path);
  EXPECT_EQ(back.names, c.names);
  EXPECT_EQ(back.r, c.r);
  std::filesystem::remove(path);
}

TEST(AnovaTest, HandExample) {
  const AnovaResult r = AnovaOneway({{1, 2, 3}, {2, 3, 4}});
  EXPECT_NEAR(r.f_stat, 1.5, 1e-9);
  EXPECT_EQ(r.df_between, 1);
  EXPECT_EQ(r.df_within, 4);
  EXPECT_NEAR(r.p_value, special::FDistributionUpperTail(1.5, 1, 4), 1e-15);
  EXPECT_GT(r.p_value, 0.05);
}

TEST(AnovaTest, IdenticalGroups) {
  const AnovaResult r = AnovaOneway({{1, 2, 3}, {1, 2, 3}});
  EXPECT_EQ(r.f_stat, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  const AnovaResult flat = AnovaOneway({{5, 5}, {5, 5}, {5, 5}});
  EXPECT_EQ(flat.f_stat, 0.0);
  EXPECT_EQ(flat.p_value, 1.0);
}

TEST(AnovaTest, ScaleInvarianceAndShift) {
  const AnovaResult a = AnovaOneway({{1.2, 2.5, 3.1, 0.4}, {2.2, 3.9, 4.4}, {0.1, 0.3, 2.0}});
  const AnovaResult b = AnovaOneway({{12, 25, 31, 4}, {22, 39, 44}, {1, 3, 20}});
  EXPECT_NEAR(a.f_stat, b.f_stat, 1e-9);
  EXPECT_GE(a.p_value, 0.0);
  EXPECT_LE(a.p_value, 1.0);
  const AnovaResult far = AnovaOneway({{1, 2, 3}, {101, 102, 103}});
  EXPECT_LT(far.p_value, 0.05);
}

TEST(AnovaTest, TooSmallGroups) {
  EXPECT_THROW(AnovaOneway({{1}, {2, 3}}), DataError);
  EXPECT_THROW(AnovaOneway({{1, 2}}), DataError);
}

BiomarkerMatrix LogisticCohort(Rng& rng, std::size_t n, double effect) {
  BiomarkerMatrix m;
  m.feature_names = {"signal", "noise"};
  m.values.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t r = 0; r < n; ++r) {
    const double x = rng.Normal();
    const double p = 1.0 / (1.0 + std::exp(-effect * x));
    m.values(static_cast<Eigen::Index>(r), 0) = x;
    m.values(static_cast<Eigen::Index>(r), 1) = rng.Normal();
    m.labels.push_back(rng.Uniform() < p ? 1 : 0);
  }
  return m;
}

TEST(LogisticTest, StrongFeatureIsSignificant) {
  Rng rng(8);
  const BiomarkerMatrix m = LogisticCohort(rng, 500, 1.5);
  const std::vector<std::string> features = {"signal", "noise"};
  const auto tests = LogisticCoefficientPValues(m, features);
  ASSERT_EQ(tests.size(), 2u);
  EXPECT_EQ(tests[0].name, "signal");
  EXPECT_LT(tests[0].p_value, 0.001);
  EXPECT_NEAR(tests[0].z, tests[0].estimate / tests[0].std_error, 1e-12);
}

TEST(LogisticTest, NoiseRejectionRateNearNominal) {
  Rng rng(12);
  int rejections = 0;
  const int replicates = 300;
  for (int rep = 0; rep < replicates; ++rep) {
    const BiomarkerMatrix m = LogisticCohort(rng, 500, 0.0);
    const std::vector<std::string> features = {"noise"};
    if (LogisticCoefficientPValues(m, features)[0].p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / replicates;
  EXPECT_GT(rate, 0.01);
  EXPECT_LT(rate, 0.10);
}

TEST(LogisticTest, CovariateAdjustmentRaisesPValue) {
  Rng rng(13);
  const std::size_t n = 400;
  BiomarkerMatrix m;
  m.feature_names = {"feature", "age"};
  m.values.resize(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    const int label = r % 2 == 0 ? 1 : 0;
    const double age = (label ? 0.5 : -0.5) + rng.Normal();
    m.values(static_cast<Eigen::Index>(r), 1) = age;
    m.values(static_cast<Eigen::Index>(r), 0) = 0.9 * age + std::sqrt(1 - 0.81) * rng.Normal();
    m.labels.push_back(label);
  }
  const std::vector<std::string> feature = {"feature"};
  const std::vector<std::string> age = {"age"};
  const double unadjusted = LogisticCoefficientPValues(m, feature)[0].p_value;
  const double adjusted = LogisticCoefficientPValues(m, feature, age)[0].p_value;
  EXPECT_LT(unadjusted, 0.05);
  EXPECT_GT(adjusted, unadjusted);
}

TEST(LogisticTest, SeparationIsReported) {
  const BiomarkerMatrix m = Matrix({{-3, -2, -1, 1, 2, 3}});
  BiomarkerMatrix sep = m;
  sep.labels = {0, 0, 0, 1, 1, 1};
  const std::vector<std::string> features = {"c0"};
  try {
    LogisticCoefficientPValues(sep, features);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("complete separation"), std::string::npos);
  }
}

}  // namespace
}  // namespace brainet::stats
