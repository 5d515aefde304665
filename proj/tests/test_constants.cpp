//
// Copyright 2026 The idblind Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#include <cmath>

#include <gtest/gtest.h>

#include "idblind/constants.hpp"

namespace {

using namespace idblind;

// Frozen at 30 digits by an arbitrary-precision solve of the same equations.
constexpr double kLambda = 0.244869377485644396892826964867;
constexpr double kRho = 0.513172840379022005629365678594;
constexpr double kGamma = 0.562283661396550258178148080789;
constexpr double kMuDet = 0.341276204811593856250018374312;
constexpr double kMuDetBound = 0.518086954356921463649962818962;
constexpr double kMuSingle = 0.446432978428279634500730428843;

// Independent route: the interior minimizer of h(lambda, .) is a root of the
// numerical derivative, located by scan plus bisection.
double oracle_inner_min(double lambda) {
  auto d = [lambda](double r) {
    const double e = 1e-7;
    return (gap_ratio_bound(lambda, r + e) - gap_ratio_bound(lambda, r - e)) / (2 * e);
  };
  double lo = lambda + 1e-6, hi = 1.0 - 1e-6;
  // First sign change from negative to positive.
  const int N = 4000;
  double prev = lo;
  for (int i = 1; i <= N; ++i) {
    const double x = lambda + (1.0 - lambda) * i / N;
    if (d(prev) < 0 && d(x) >= 0) {
      lo = prev;
      hi = x;
      break;
    }
    prev = x;
  }
  for (int it = 0; it < 100; ++it) {
    const double m = 0.5 * (lo + hi);
    (d(m) < 0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

TEST(Constants, GapConstantsMatchFrozenValues) {
  const GapConstants c = solve_lambda_rho_gamma();
  EXPECT_NEAR(c.lambda_star, kLambda, 1e-8);
  EXPECT_NEAR(c.rho_star, kRho, 1e-6);
  EXPECT_NEAR(c.gamma_star, kGamma, 1e-8);
  EXPECT_NEAR(c.residual, 0.0, 1e-9);
}

TEST(Constants, StatedRoundedValues) {
  const GapConstants& c = gap_constants();
  EXPECT_NEAR(c.lambda_star, 0.245, 1e-3);
  EXPECT_NEAR(c.rho_star, 0.513, 1e-3);
  EXPECT_NEAR(c.gamma_star, 0.562, 1e-3);
  EXPECT_NEAR(solve_mu_deterministic().mu, 0.341, 1e-3);
  EXPECT_NEAR(solve_mu_single_threshold().x, 0.4464, 1e-3);
  EXPECT_NEAR(golden_bound(), 0.618034, 1e-6);
}

TEST(Constants, InnerMinAgreesWithDerivativeRoot) {
  for (double lambda : {0.1, 0.2, kLambda, 0.3}) {
    const InnerMin m = inner_rho_min(lambda);
    EXPECT_NEAR(m.rho, oracle_inner_min(lambda), 1e-5) << lambda;
    EXPECT_NEAR(m.value, gap_ratio_bound(lambda, oracle_inner_min(lambda)), 1e-9);
  }
}

TEST(Constants, InnerMinAgreesWithGridScanAtPointThree) {
  const double lambda = 0.3;
  double best = 1e9, arg = 0;
  const int N = 1'000'000;
  for (int i = 0; i <= N; ++i) {
    const double r = lambda + (1.0 - lambda) * i / N;
    const double v = gap_ratio_bound(lambda, r);
    if (v < best) {
      best = v;
      arg = r;
    }
  }
  EXPECT_NEAR(inner_rho_min(lambda).rho, arg, 1e-5);
}

TEST(Constants, InnerMinNearOneSitsOnBoundary) {
  const InnerMin m = inner_rho_min(1.0 - 1e-9);
  EXPECT_NEAR(m.rho, 1.0, 1e-6);
  EXPECT_NEAR(m.value, 0.0, 1e-6);
}

TEST(Constants, CrossingIsUniqueOnTheBracket) {
  // g changes sign exactly once on (0, 1/e).
  auto g = [](double l) { return inner_rho_min(l).value - gamma_curve(l); };
  int changes = 0;
  double prev = g(1e-4);
  for (int i = 1; i <= 400; ++i) {
    const double l = 1e-4 + (inv_e() - 1e-3 - 1e-4) * i / 400;
    const double cur = g(l);
    if ((prev < 0) != (cur < 0)) ++changes;
    prev = cur;
  }
  EXPECT_EQ(changes, 1);
}

TEST(Constants, GammaCurveAtLambdaStarEqualsInnerMinimum) {
  const GapConstants& c = gap_constants();
  EXPECT_NEAR(gamma_curve(c.lambda_star), inner_rho_min(c.lambda_star).value, 1e-9);
  EXPECT_NEAR(gap_ratio_bound(c.lambda_star, c.rho_star), c.gamma_star, 1e-9);
}

TEST(Constants, MuDeterministic) {
  const MuBound m = solve_mu_deterministic();
  EXPECT_NEAR(m.mu, kMuDet, 1e-8);
  EXPECT_NEAR(m.bound, kMuDetBound, 1e-8);
  const double l = std::log(1.0 / m.mu);
  EXPECT_NEAR(m.mu / (1 - m.mu), l / (l + 1), 1e-9);
}

TEST(Constants, MuSingleThreshold) {
  const Root r = solve_mu_single_threshold();
  EXPECT_NEAR(r.x, kMuSingle, 1e-8);
  EXPECT_NEAR(r.residual, 0.0, 1e-9);
}

TEST(Constants, BisectRejectsBracketWithoutSignChange) {
  EXPECT_THROW(bisect([](double x) { return x * x + 1; }, -1, 1, 1e-9), RootBracketError);
}

TEST(Constants, BisectRejectsNonMonotoneWhenMonotoneRequired) {
  // One sign change at 0.1; the double root at 2 makes f turn around.
  auto f = [](double x) { return (x - 0.1) * (x - 2.0) * (x - 2.0); };
  EXPECT_THROW(bisect(f, 0.0, 3.0, 1e-9, /*monotone=*/true), RootBracketError);
  EXPECT_NEAR(bisect([](double x) { return x - 0.1; }, 0.0, 1.0, 1e-12).x, 0.1, 1e-10);
}

TEST(Constants, BisectRejectsMultipleRoots) {
  auto f = [](double x) { return std::sin(x); };
  EXPECT_THROW(bisect(f, -1.0, 7.0, 1e-9, /*monotone=*/false), RootBracketError);
}

TEST(Constants, GoldenSectionFindsQuadraticMinimum) {
  auto [x, fx] = golden_section_min([](double x) { return (x - 0.3) * (x - 0.3) + 2; }, 0, 1, 1e-10);
  EXPECT_NEAR(x, 0.3, 1e-6);
  EXPECT_NEAR(fx, 2.0, 1e-12);
}

}  // namespace
