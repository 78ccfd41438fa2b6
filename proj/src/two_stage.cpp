// SPDX-License-Identifier: Apache-2.0
#include "irscc/two_stage.hpp"

#include "irscc/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irscc::two_stage {

namespace {

constexpr double kTiny = 1e-300;

double wrap_angle(double t)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    t = std::fmod(t, two_pi);
    if (t < 0.0)
        t += two_pi;
    return t;
}

double quad_form(const Eigen::MatrixXcd& m, const Eigen::VectorXcd& u)
{
    return (u.adjoint() * m * u).value().real();
}

Eigen::VectorXcd bob_aligned_start(const psca::QuadraticForms& qf)
{
    const int n = qf.num_elements();
    Eigen::VectorXcd u(n + 1);
    const double ref = std::arg(qf.h_ab);
    for (int k = 0; k < n; ++k)
        u[k] = std::polar(1.0, std::arg(qf.b[k]) - ref);
    u[n] = 1.0;
    return u;
}

} // namespace

bool perfect_covertness_feasible(const Eigen::VectorXcd& a, Complex h_aw)
{
    return a.cwiseAbs().sum() >= std::abs(h_aw);
}

scenario::ReflectDesign perfect_covertness_design(const Eigen::VectorXcd& a, Complex h_aw,
                                                  double p_max)
{
    if (!perfect_covertness_feasible(a, h_aw))
        throw feasibility_error("perfect_covertness_design: sum|a_n| < |h_aw|");
    const int n = static_cast<int>(a.size());
    const double a1 = a.cwiseAbs().sum();
    const double haw = std::abs(h_aw);

    scenario::ReflectDesign d;
    d.p_a = p_max;
    d.rho = Eigen::VectorXd::Zero(n);
    d.theta = Eigen::VectorXd::Zero(n);

    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    if (haw > 0.0) {
        const double kappa = a1 / haw;
        const double arg_haw = std::arg(h_aw);
        for (int k = 0; k < n; ++k) {
            v[k] = std::polar(1.0 / kappa, std::arg(a[k]) - std::numbers::pi - arg_haw);
            d.rho[k] = 1.0 / kappa;
            d.theta[k] = wrap_angle(-std::arg(v[k]));
        }
    }
    // haw == 0: v = 0 already cancels everything

    d.willie_gain = scenario::willie_gain(v, a, h_aw);
    d.kl_value = 0.0;
    return d;
}

Eigen::VectorXcd sca_direction(const Eigen::VectorXcd& u_tilde, const psca::QuadraticForms& qf)
{
    // rank-one structure: A u = abar (abar^H u), u^H A u = |abar^H u|^2
    const int n = qf.num_elements();
    Eigen::VectorXcd abar(n + 1), bbar(n + 1);
    abar << qf.a, qf.h_aw;
    bbar << qf.b, qf.h_ab;

    const Complex ca = abar.dot(u_tilde); // abar^H u
    const Complex cb = bbar.dot(u_tilde);
    const double uau = std::norm(ca);
    if (!(uau > 0.0))
        throw std::domain_error("sca_direction: u~^H A u~ must be positive");
    const double ubu = std::norm(cb);
    const double lmax = qf.lambda_max_a();

    Eigen::VectorXcd f = bbar * (cb / uau);
    f -= (abar * ca - lmax * u_tilde) * (ubu / (uau * uau));
    return f;
}

double conservative_power(const Eigen::VectorXcd& u, const Eigen::MatrixXcd& a_form,
                          const covertness::CovertnessBudget& budget, double sigma_w2,
                          double p_max)
{
    const double uau = quad_form(a_form, u);
    if (uau <= 0.0)
        return p_max;
    const double radius = covertness::conservative_kl_radius(budget);
    return std::min(sigma_w2 * radius / uau, p_max);
}

scenario::ReflectDesign two_stage_optimize(const psca::QuadraticForms& qf,
                                           const covertness::CovertnessBudget& budget,
                                           const TwoStageConfig& config, double sigma_w2,
                                           double sigma_b2, double p_max)
{
    budget.validate();
    if (config.max_iter < 1 || !(config.u_tol > 0.0))
        throw std::invalid_argument("two_stage_optimize: invalid config");
    const int n = qf.num_elements();

    Eigen::VectorXcd u = bob_aligned_start(qf);
    double uau = quad_form(qf.a_form, u);

    if (uau <= 0.0) {
        // zero Willie energy on the start direction; nudge once, then accept
        Eigen::VectorXcd probe = u + 1e-8 * bob_aligned_start(qf);
        for (int k = 0; k <= n; ++k)
            probe[k] /= std::max(std::abs(probe[k]), kTiny);
        if (quad_form(qf.a_form, probe) > 0.0) {
            u = probe;
            uau = quad_form(qf.a_form, u);
        }
    }

    if (uau > 0.0) {
        // converged means the ratio has stalled AND u is a fixed point of the
        // phase update (within 1e-6 rad), so arg(u_n) = arg(f_n(u)) holds on
        // the returned point
        constexpr double kPhaseTol = 1e-6;
        double ratio = quad_form(qf.b_form, u) / uau;
        double rel = std::numeric_limits<double>::infinity();
        for (int it = 0; it < config.max_iter; ++it) {
            const Eigen::VectorXcd f = sca_direction(u, qf);
            double dphi = 0.0;
            for (int k = 0; k <= n; ++k)
                if (std::abs(f[k]) > 0.0)
                    dphi = std::max(dphi, std::abs(std::remainder(
                                              std::arg(f[k]) - std::arg(u[k]),
                                              2.0 * std::numbers::pi)));
            if (dphi < kPhaseTol && rel < config.u_tol)
                break;
            Eigen::VectorXcd u_next(n + 1);
            for (int k = 0; k <= n; ++k)
                u_next[k] = std::abs(f[k]) > 0.0 ? f[k] / std::abs(f[k]) : u[k];
            const double denom = quad_form(qf.a_form, u_next);
            if (denom <= 0.0) {
                u = u_next; // Willie energy annihilated; nothing left to improve
                break;
            }
            const double ratio_next = quad_form(qf.b_form, u_next) / denom;
            u = u_next;
            rel = std::abs(ratio_next - ratio) / std::max(std::abs(ratio), kTiny);
            ratio = ratio_next;
        }
    }

    const double p_a = conservative_power(u, qf.a_form, budget, sigma_w2, p_max);

    scenario::ReflectDesign d;
    d.p_a = p_a;
    d.rho = Eigen::VectorXd::Ones(n);
    d.theta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXcd v = u.head(n) / u[n]; // |u_n| = 1, moduli preserved
    for (int k = 0; k < n; ++k) {
        d.rho[k] = 1.0;
        d.theta[k] = wrap_angle(-std::arg(v[k]));
    }
    d.bob_snr = scenario::bob_snr(p_a, v, qf.b, qf.h_ab, sigma_b2);
    d.willie_gain = scenario::willie_gain(v, qf.a, qf.h_aw);
    d.kl_value = covertness::kl_divergence(p_a, d.willie_gain, sigma_w2, budget.blocklength);
    return d;
}

scenario::ReflectDesign baseline_no_irs(Complex h_ab, Complex h_aw,
                                        const covertness::CovertnessBudget& budget,
                                        double sigma_w2, double sigma_b2, double p_max,
                                        int num_elements)
{
    const double gain = std::norm(h_aw);
    double p_a = p_max;
    if (gain > 0.0) {
        const double t_star = covertness::kl_radius(budget);
        p_a = std::min(sigma_w2 * t_star / gain, p_max);
    }
    scenario::ReflectDesign d;
    d.p_a = p_a;
    d.rho = Eigen::VectorXd::Zero(num_elements);
    d.theta = Eigen::VectorXd::Zero(num_elements);
    d.bob_snr = p_a * std::norm(h_ab) / sigma_b2;
    d.willie_gain = gain;
    d.kl_value = covertness::kl_divergence(p_a, gain, sigma_w2, budget.blocklength);
    return d;
}

} // namespace irscc::two_stage
