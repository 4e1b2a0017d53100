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

#ifndef BRAINET_SPECIAL_FUNCTIONS_H_
#define BRAINET_SPECIAL_FUNCTIONS_H_

namespace brainet::special {

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double RegularizedIncompleteBeta(double a, double b, double x);

// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
double FDistributionUpperTail(double f, double d1, double d2);

// Standard normal CDF.
double NormalCdf(double z);

// Two-sided normal tail probability 2 * P(Z > |z|).
double TwoSidedNormalPValue(double z);

}  // namespace brainet::special

#endif  // BRAINET_SPECIAL_FUNCTIONS_H_
