// SPDX-License-Identifier: Apache-2.0
#include "irscc/numerics.hpp"

#include "irscc/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace irscc::numerics {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Series E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
double e1_series(double x)
{
    double sum = 0.0;
    double pw = 1.0; // (-x)^k / k!
    for (int k = 1; k <= 120; ++k) {
        pw *= -x / k;
        const double add = -pw / k;
        sum += add;
        if (std::abs(add) < 1e-16 * (std::abs(sum) + 1.0))
            break;
    }
    return -kEulerGamma - std::log(x) + sum;
}

// Modified Lentz evaluation of the continued fraction for e^x E1(x):
//   e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- 9/(...))))
double e1_cf_scaled(double x)
{
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-15;
    double b = x + 1.0;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 400; ++i) {
        const double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = a * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + a / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            return h;
    }
    throw convergence_error("scaled_e1: continued fraction did not converge");
}

} // namespace

double exp_integral_e1(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("exp_integral_e1: requires x > 0");
    if (x <= 1.0)
        return e1_series(x);
    return std::exp(-x) * e1_cf_scaled(x);
}

double scaled_e1(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("scaled_e1: requires x > 0");
    if (x <= 1.0)
        return std::exp(x) * e1_series(x);
    return e1_cf_scaled(x);
}

double bisect_root(const std::function<double(double)>& f, const RootBracket& bracket)
{
    if (!(bracket.lo < bracket.hi))
        throw std::invalid_argument("bisect_root: requires lo < hi");
    if (!(bracket.tol > 0.0))
        throw std::invalid_argument("bisect_root: requires tol > 0");

    double lo = bracket.lo;
    double hi = bracket.hi;
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw bracketing_error("bisect_root: f(lo) and f(hi) have the same sign");

    for (int it = 0; it < bracket.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) < bracket.tol || (hi - lo) < bracket.tol || mid == lo || mid == hi)
            return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    throw convergence_error("bisect_root: max_iter exceeded");
}

bool is_hermitian(const Eigen::MatrixXcd& h, double tol)
{
    if (h.rows() != h.cols())
        return false;
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

EigPair max_eigpair(const Eigen::MatrixXcd& h)
{
    const auto n = h.rows();
    if (n == 0 || h.cols() != n)
        throw contract_error("max_eigpair: matrix must be square and non-empty");
    if (!is_hermitian(h))
        throw contract_error("max_eigpair: matrix is not Hermitian");

    // Shift by the infinity norm so the rightmost eigenvalue also has the
    // largest magnitude; power iteration then converges to it.
    const double shift = h.cwiseAbs().rowwise().sum().maxCoeff();

    Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n) / std::sqrt(static_cast<double>(n));
    double lambda = 0.0;
    const double thr = 1e-12 * std::max(shift, 1e-300);
    const double resid_floor = 64.0 * n * 2.22e-16 * shift; // fp noise on the matvec

    for (int it = 0; it < 10000; ++it) {
        const Eigen::VectorXcd hx = h * x;
        const double next = std::real(x.dot(hx));
        const double resid = (hx - next * x).norm();
        const double resid_target = std::max(5e-13 * (1.0 + std::abs(next)), resid_floor);
        const bool done = it > 0 && std::abs(next - lambda) <= thr && resid <= resid_target;
        lambda = next;
        if (done)
            break;
        Eigen::VectorXcd y = hx + shift * x;
        const double ny = y.norm();
        if (ny <= 0.0)
            return {0.0, x}; // h = -shift*I degenerate; x is an eigenvector
        x = y / ny;
    }
    return {lambda, x};
}

Eigen::MatrixXd hermitian_real_embedding(const Eigen::MatrixXcd& h)
{
    if (!is_hermitian(h))
        throw contract_error("hermitian_real_embedding: matrix is not Hermitian");
    const auto n = h.rows();
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = h.real();
    out.topRightCorner(n, n) = -h.imag();
    out.bottomLeftCorner(n, n) = h.imag();
    out.bottomRightCorner(n, n) = h.real();
    // Symmetrize away roundoff from the Hermitian tolerance band.
    out = 0.5 * (out + out.transpose()).eval();
    return out;
}

} // namespace irscc::numerics
