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

#include "brainet/special_functions.h"

#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "brainet/error.h"
#include "brainet/random.h"
#include "gtest/gtest.h"

namespace brainet::special {
namespace {

TEST(IncompleteBetaTest, MatchesBoost) {
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = 0.05 + 60.0 * rng.Uniform();
    const double b = 0.05 + 60.0 * rng.Uniform();
    const double x = rng.Uniform();
    EXPECT_NEAR(RegularizedIncompleteBeta(a, b, x), boost::math::ibeta(a, b, x), 1e-12)
        << "a=" << a << " b=" << b << " x=" << x;
  }
}

TEST(IncompleteBetaTest, ClosedForms) {
  EXPECT_EQ(RegularizedIncompleteBeta(2, 3, 0.0), 0.0);
  EXPECT_EQ(RegularizedIncompleteBeta(2, 3, 1.0), 1.0);
  // I_x(1, 1) = x; I_x(a, 1) = x^a.
  EXPECT_NEAR(RegularizedIncompleteBeta(1, 1, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(RegularizedIncompleteBeta(2.5, 1, 0.4), std::pow(0.4, 2.5), 1e-14);
  EXPECT_THROW(RegularizedIncompleteBeta(0, 1, 0.5), NumericError);
}

TEST(FDistributionTest, MatchesBoost) {
  for (const double d1 : {1.0, 2.0, 3.0, 10.0}) {
    for (const double d2 : {4.0, 20.0, 118.0}) {
      const boost::math::fisher_f_distribution<double> dist(d1, d2);
      for (const double f : {0.0, 0.1, 1.0, 1.5, 4.0, 25.0}) {
        EXPECT_NEAR(FDistributionUpperTail(f, d1, d2), boost::math::cdf(boost::math::complement(dist, f)),
                    1e-12);
      }
    }
  }
}

TEST(FDistributionTest, MonotoneInStatistic) {
  double previous = 1.0;
  for (double f = 0.0; f < 30.0; f += 0.25) {
    const double p = FDistributionUpperTail(f, 1, 4);
    EXPECT_LE(p, previous);
    previous = p;
  }
}

TEST(NormalTest, KnownValues) {
  EXPECT_NEAR(NormalCdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(NormalCdf(1.959963984540054), 0.975, 1e-13);
  EXPECT_NEAR(TwoSidedNormalPValue(1.959963984540054), 0.05, 1e-13);
  EXPECT_NEAR(TwoSidedNormalPValue(-1.959963984540054), 0.05, 1e-13);
  EXPECT_EQ(TwoSidedNormalPValue(0.0), 1.0);
}

}  // namespace
}  // namespace brainet::special
