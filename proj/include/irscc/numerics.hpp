// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>

namespace irscc::numerics {

/// Exponential integral E1(x) = \int_x^inf e^{-t}/t dt, x > 0.
/// Power series below x = 1, modified-Lentz continued fraction above.
/// Absolute accuracy better than 1e-12 over the positive axis.
double exp_integral_e1(double x);

/// e^x * E1(x) evaluated without forming e^x, so it stays finite for
/// large x (asymptotically ~ 1/x). Relative accuracy 1e-12 for x >= 1.
double scaled_e1(double x);

struct RootBracket {
    double lo;
    double hi;
    double tol;          // absolute, applies to both residual and width
    int max_iter = 200;
};

/// Bisection on [lo, hi]; f(lo) and f(hi) must differ in sign (an endpoint
/// that is an exact root is returned directly). Stops when |f(mid)| < tol
/// or the interval width drops below tol.
double bisect_root(const std::function<double(double)>& f, const RootBracket& bracket);

/// true iff max |H(i,j) - conj(H(j,i))| <= tol * max(1, max|H|)
bool is_hermitian(const Eigen::MatrixXcd& h, double tol = 1e-10);

struct EigPair {
    double value;
    Eigen::VectorXcd vector; // unit norm
};

/// Largest (rightmost) eigenvalue and eigenvector of a Hermitian matrix.
/// Shifted power iteration with a deterministic all-ones start vector;
/// stops once the eigenvalue change falls below 1e-12 relative and the
/// eigenpair residual is small, capped at 1e4 iterations. The returned pair
/// satisfies ||H e - lambda e|| <= 1e-9 (1 + |lambda|) away from degenerate
/// scale extremes.
EigPair max_eigpair(const Eigen::MatrixXcd& h);

/// [[Re H, -Im H], [Im H, Re H]]. H is PSD iff the embedding is PSD; every
/// eigenvalue of H appears twice in the embedding and the trace doubles.
Eigen::MatrixXd hermitian_real_embedding(const Eigen::MatrixXcd& h);

} // namespace irscc::numerics
