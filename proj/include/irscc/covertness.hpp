// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace irscc::covertness {

/// Covertness budget: KL cap 2*epsilon^2 nats over L channel uses.
struct CovertnessBudget {
    double epsilon = 0.1;
    int blocklength = 100;

    double kl_cap() const { return 2.0 * epsilon * epsilon; }
    double per_use_cap() const { return kl_cap() / blocklength; }
    void validate() const;
};

/// KL divergence (nats) between Willie's L-sample observation distributions:
/// L * [ln(1+x) - x/(1+x)] with x = p_a * gain / sigma_w2.
double kl_divergence(double p_a, double gain, double sigma_w2, int blocklength);

/// Stable evaluation of ln(1+x) - x/(1+x) for x >= 0.
double kl_per_use(double x);

/// Willie's total-detection-error lower bound: max(0, 1 - sqrt(kl/2)).
double detection_error_lower_bound(double kl);

/// The covertness radius t*: unique positive root of
///   (1+t) ln(1+t) - (1 + 2e^2/L) t - 2e^2/L = 0,
/// so that kl_divergence <= 2 epsilon^2 holds iff x <= t*.
double kl_radius(const CovertnessBudget& budget);

/// Conservative radius from the ln(1+x) <= x tightening:
/// y* = (eps^2 + sqrt(eps^4 + 2 eps^2 L)) / L. Always <= kl_radius.
double conservative_kl_radius(const CovertnessBudget& budget);

/// Expected KL over Rayleigh-faded Willie channels:
/// L * (1 + 1/xhat) * scaled_e1(1/xhat) - L with xhat = delta * p_a / sigma_w2.
double expected_kl(double p_a, double delta, double sigma_w2, int blocklength);

/// The constant eps_bar with (1 + 1/eb) e^{1/eb} E1(1/eb) - 1 = 2 eps^2 / L,
/// turning the expected-KL constraint into (p_a/sigma_w2) * delta <= eps_bar.
/// Bisection in u = 1/eps_bar on an expand-on-demand log bracket.
double epsilon_bar(const CovertnessBudget& budget);

} // namespace irscc::covertness
