// Copyright 2026 The greensched Authors
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

#pragma once

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace greensched {

/** Indicator used by the power model: 1 if the argument is positive, else 0. */
inline double sign01(double x) { return x > 0.0 ? 1.0 : 0.0; }

/**
 * Bits delivered in one slot of length dt_s over bandwidth w_hz when
 * transmitting power p_w against equivalent channel gain g (1/W):
 * w * log2(1 + g p) * dt.  Uses log1p for accuracy at small g*p.
 * Returns 0 for non-positive power, gain, or bandwidth.
 */
inline double shannon_bits(double g, double p_w, double w_hz, double dt_s) {
    if (p_w <= 0.0 || g <= 0.0 || w_hz <= 0.0) return 0.0;
    return w_hz * dt_s * std::log1p(g * p_w) / std::numbers::ln2;
}

/**
 * Inverse of shannon_bits in the power argument: the power needed to push
 * exactly `bits` through one slot.  Uses expm1 for accuracy when the target
 * is a small fraction of a slot's capacity.  Returns 0 for a non-positive
 * target; throws if gain or bandwidth make the target unreachable.
 */
inline double power_for_bits(double bits, double g, double w_hz, double dt_s) {
    if (bits <= 0.0) return 0.0;
    if (g <= 0.0 || w_hz <= 0.0 || dt_s <= 0.0)
        throw std::invalid_argument(
            "power_for_bits: positive bits demand a positive gain, bandwidth, and slot length");
    return std::expm1(bits * std::numbers::ln2 / (w_hz * dt_s)) / g;
}

/**
 * Locates x in [lo, hi] with f(x) = target for a nondecreasing f, assuming
 * f(lo) <= target <= f(hi).  Pure interval halving; stops when the bracket
 * shrinks below x_rel_tol relative to its magnitude (or after max_iter
 * halvings) and returns the midpoint.
 */
template <class F>
double bisect_nondecreasing(F&& f, double lo, double hi, double target,
                            double x_rel_tol = 1e-12, int max_iter = 200) {
    assert(lo <= hi);
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= x_rel_tol * std::max({std::fabs(lo), std::fabs(hi), 1.0})) break;
    }
    return 0.5 * (lo + hi);
}

/**
 * Maximizes a unimodal function on [lo, hi] by golden-section search and
 * returns the maximizing argument.  The bracket shrinks by the golden ratio
 * each step, so ~90 iterations reach relative width 1e-12 from any start.
 */
template <class F>
double golden_section_max(F&& f, double lo, double hi,
                          double x_rel_tol = 1e-10, int max_iter = 200) {
    assert(lo <= hi);
    constexpr double inv_phi = 0.6180339887498949;  // 1/phi
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        if (b - a <= x_rel_tol * std::max({std::fabs(a), std::fabs(b), 1.0})) break;
    }
    return 0.5 * (a + b);
}

/**
 * Upper binomial tail P[X >= k] for X ~ Binomial(n, q), evaluated in log
 * space with lgamma so it stays finite and accurate for n in the thousands.
 * Edge cases: k <= 0 gives 1, k > n gives 0, and degenerate q short-circuits.
 */
inline double binomial_upper_tail(long long n, long long k, double q) {
    if (n < 0) throw std::invalid_argument("binomial_upper_tail: negative trial count");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("binomial_upper_tail: q outside [0, 1]");
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (q == 0.0) return 0.0;  // k >= 1 here
    if (q == 1.0) return 1.0;  // all mass at X = n >= k
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
    double tail = 0.0;
    for (long long j = k; j <= n; ++j) {
        const double log_term = lg_n1 - std::lgamma(static_cast<double>(j) + 1.0) -
                                std::lgamma(static_cast<double>(n - j) + 1.0) +
                                static_cast<double>(j) * log_q +
                                static_cast<double>(n - j) * log_1mq;
        tail += std::exp(log_term);
    }
    return std::min(tail, 1.0);
}

/**
 * Survival function of a Gamma(shape, 1) variable with integer shape:
 * P[Gamma(shape, 1) >= x] = sum_{i=0}^{shape-1} x^i e^{-x} / i!.
 * The sum is built iteratively from the i = 0 term, so each term stays in
 * range even when x is large enough that x^i alone would overflow.
 */
inline double gamma_integer_sf(int shape, double x) {
    if (shape <= 0) throw std::invalid_argument("gamma_integer_sf: shape must be positive");
    if (x <= 0.0) return 1.0;
    double term = std::exp(-x);  // i = 0
    double sum = term;
    for (int i = 1; i < shape; ++i) {
        term *= x / static_cast<double>(i);
        sum += term;
    }
    return std::min(sum, 1.0);
}

}  // namespace greensched
