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

#ifndef IDBLIND_CONSTANTS_HPP
#define IDBLIND_CONSTANTS_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

namespace idblind {

inline double inv_e() { return std::exp(-1.0); }

class RootBracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Root {
  double x;
  double residual;  // f(x)
  int iterations;
};

namespace detail {

inline int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace detail

/// Bisection for the unique root of `f` on [lo, hi].
///
/// Before bisecting, `f` is sampled on a `grid`-point grid; the root is only
/// accepted when the samples change sign exactly once. When `monotone` is set
/// the samples must also be strictly monotone.
inline Root bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
                   bool monotone = true, int grid = 1000) {
  double flo = f(lo), fhi = f(hi);
  if (detail::sign(flo) * detail::sign(fhi) >= 0)
    throw RootBracketError("bisection bracket has no sign change");
  int changes = 0;
  int last_sign = detail::sign(flo);  // last nonzero sample sign
  double prev = flo, prev_x = lo;
  int direction = 0;
  for (int i = 1; i <= grid; ++i) {
    const double x = lo + (hi - lo) * i / grid;
    const double fx = i == grid ? fhi : f(x);
    if (detail::sign(fx) != 0) {
      if (detail::sign(fx) != last_sign) ++changes;
      last_sign = detail::sign(fx);
    }
    if (monotone) {
      const int d = detail::sign(fx - prev);
      if (d == 0 || (direction != 0 && d != direction))
        throw RootBracketError("objective is not strictly monotone on the bracket near x=" +
                               std::to_string(prev_x));
      direction = d;
    }
    prev = fx;
    prev_x = x;
  }
  if (changes != 1) throw RootBracketError("bracket does not isolate a unique root");

  int it = 0;
  while (hi - lo > tol && it < 400) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if (detail::sign(fm) == detail::sign(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    ++it;
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x), it};
}

/// Golden-section minimization of a unimodal `f` on [lo, hi].
inline std::pair<double, double> golden_section_min(const std::function<double(double)>& f, double lo,
                                                    double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; hi - lo > tol && it < 500; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  double x = 0.5 * (lo + hi), fx = f(x);
  // The minimum may sit on a bracket endpoint.
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe < fx) {
      x = e;
      fx = fe;
    }
  }
  return {x, fx};
}

/// (lambda ln(1/rho) + rho - lambda) / (lambda + 1 - lambda/rho), the
/// optimal-online bound against a lambda-threshold when the optimal policy
/// agrees with the threshold with probability rho.
inline double gap_ratio_bound(double lambda, double rho) {
  return (lambda * std::log(1.0 / rho) + rho - lambda) / (lambda + 1.0 - lambda / rho);
}

/// lambda ln(1/lambda) / (lambda + 1/e).
inline double gamma_curve(double lambda) { return lambda * std::log(1.0 / lambda) / (lambda + inv_e()); }

struct InnerMin {
  double rho;
  double value;
};

/// min over rho in [lambda, 1] of gap_ratio_bound(lambda, rho).
inline InnerMin inner_rho_min(double lambda) {
  if (!(lambda > 0.0) || !(lambda < 1.0)) throw std::invalid_argument("inner_rho_min needs 0 < lambda < 1");
  auto [rho, value] =
      golden_section_min([lambda](double rho) { return gap_ratio_bound(lambda, rho); }, lambda, 1.0, 1e-12);
  return {rho, value};
}

struct GapConstants {
  double lambda_star;
  double rho_star;
  double gamma_star;
  double residual;  // inner minimum minus gamma_curve at lambda_star
};

/// Solves min_{rho >= lambda} gap_ratio_bound(lambda, rho) = gamma_curve(lambda)
/// for lambda in (0, 1/e).
inline GapConstants solve_lambda_rho_gamma() {
  auto g = [](double lambda) { return inner_rho_min(lambda).value - gamma_curve(lambda); };
  // g dips before it rises, so only a single crossing is required.
  const Root r = bisect(g, 1e-6, inv_e() - 1e-9, 1e-10, /*monotone=*/false);
  const InnerMin inner = inner_rho_min(r.x);
  return {r.x, inner.rho, gamma_curve(r.x), r.residual};
}

/// Cached copy; the solve runs once per process.
inline const GapConstants& gap_constants() {
  static const GapConstants c = solve_lambda_rho_gamma();
  return c;
}

struct MuBound {
  double mu;
  double bound;
  double residual;
};

/// mu/(1-mu) = ln(1/mu)/(ln(1/mu)+1); bound = mu/(1-mu).
inline double mu_deterministic_equation(double mu) {
  const double l = std::log(1.0 / mu);
  return mu / (1.0 - mu) - l / (l + 1.0);
}

inline MuBound solve_mu_deterministic() {
  const Root r = bisect(mu_deterministic_equation, 1e-6, 1.0 - 1e-6, 1e-10);
  return {r.x, r.x / (1.0 - r.x), r.residual};
}

/// mu = ln(1/mu)/(1+ln(1/mu)).
inline double mu_single_threshold_equation(double mu) {
  const double l = std::log(1.0 / mu);
  return mu - l / (1.0 + l);
}

inline Root solve_mu_single_threshold() { return bisect(mu_single_threshold_equation, 1e-6, 1.0 - 1e-6, 1e-10); }

/// 1/phi.
inline double golden_bound() { return 2.0 / (1.0 + std::sqrt(5.0)); }

}  // namespace idblind

#endif  // IDBLIND_CONSTANTS_HPP
