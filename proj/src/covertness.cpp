// SPDX-License-Identifier: Apache-2.0
#include "irscc/covertness.hpp"

#include "irscc/errors.hpp"
#include "irscc/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace irscc::covertness {

void CovertnessBudget::validate() const
{
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::invalid_argument("CovertnessBudget: epsilon must be in (0, 1]");
    if (blocklength < 1)
        throw std::invalid_argument("CovertnessBudget: blocklength must be >= 1");
}

double kl_per_use(double x)
{
    if (x < 0.0)
        throw std::domain_error("kl_per_use: requires x >= 0");
    if (x < 1e-3) {
        // ln(1+x) - x/(1+x) = sum_{k>=2} (-1)^k x^k (k-1)/k
        double sum = 0.0, pw = x;
        double sign = 1.0;
        for (int k = 2; k <= 12; ++k) {
            pw *= x;
            sum += sign * pw * (k - 1) / k;
            sign = -sign;
            if (pw < 1e-20 * (sum + 1e-300))
                break;
        }
        return sum;
    }
    return std::log1p(x) - x / (1.0 + x);
}

double kl_divergence(double p_a, double gain, double sigma_w2, int blocklength)
{
    if (p_a < 0.0 || gain < 0.0)
        throw std::domain_error("kl_divergence: p_a and gain must be >= 0");
    if (!(sigma_w2 > 0.0))
        throw std::domain_error("kl_divergence: sigma_w2 must be > 0");
    const double x = p_a * gain / sigma_w2;
    return blocklength * kl_per_use(x);
}

double detection_error_lower_bound(double kl)
{
    if (kl < 0.0)
        throw std::domain_error("detection_error_lower_bound: requires kl >= 0");
    return std::max(0.0, 1.0 - std::sqrt(kl / 2.0));
}

double kl_radius(const CovertnessBudget& budget)
{
    if (budget.epsilon == 0.0)
        return 0.0; // constraint collapses to zero received power
    budget.validate();
    const double q = budget.per_use_cap();
    auto f = [q](double t) { return (1.0 + t) * std::log1p(t) - (1.0 + q) * t - q; };

    // f(0) = -q < 0; double the upper end until the sign flips.
    double hi = 1.0;
    int guard = 0;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (++guard > 2000)
            throw convergence_error("kl_radius: failed to bracket the root");
    }
    return numerics::bisect_root(f, {0.0, hi, 1e-15, 400});
}

double conservative_kl_radius(const CovertnessBudget& budget)
{
    if (budget.epsilon == 0.0)
        return 0.0;
    budget.validate();
    const double e2 = budget.epsilon * budget.epsilon;
    const double l = budget.blocklength;
    return (e2 + std::sqrt(e2 * e2 + 2.0 * e2 * l)) / l;
}

double expected_kl(double p_a, double delta, double sigma_w2, int blocklength)
{
    if (!(p_a > 0.0) || !(delta > 0.0) || !(sigma_w2 > 0.0))
        throw std::domain_error("expected_kl: requires p_a, delta, sigma_w2 > 0");
    const double u = sigma_w2 / (delta * p_a); // 1/xhat
    const double v = (1.0 + u) * numerics::scaled_e1(u) - 1.0;
    return std::max(0.0, blocklength * v);
}

double epsilon_bar(const CovertnessBudget& budget)
{
    if (budget.epsilon <= 0.0)
        throw std::domain_error("epsilon_bar: no positive solution for epsilon = 0");
    budget.validate();
    const double q = budget.per_use_cap();
    // g(u) - 1 = (1+u) e^u E1(u) - 1 is strictly decreasing, -> inf at 0+,
    // -> 0 at inf; solve g(u) - 1 = q in u = 1/eps_bar.
    auto f = [q](double u) { return (1.0 + u) * numerics::scaled_e1(u) - 1.0 - q; };

    double lo = 1e-6, hi = 1e6;
    int guard = 0;
    while (f(hi) > 0.0) {
        hi *= 10.0;
        if (++guard > 280)
            throw convergence_error("epsilon_bar: failed to bracket (upper)");
    }
    guard = 0;
    while (f(lo) < 0.0) {
        lo /= 10.0;
        if (++guard > 280)
            throw convergence_error("epsilon_bar: failed to bracket (lower)");
    }
    const double u = numerics::bisect_root(f, {lo, hi, 1e-13, 400});
    return 1.0 / u;
}

} // namespace irscc::covertness
