// SPDX-License-Identifier: Apache-2.0
#include "irscc/no_csi.hpp"

#include "irscc/covertness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace irscc::no_csi {

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

double objective_amp(double p_a, double rho_dot_b, double h_ab_abs)
{
    return std::sqrt(p_a) * (rho_dot_b + h_ab_abs);
}

// inner problem of (the rhobar substitution of) the per-element regime:
// maximize rhobar . b_abs  s.t.  chi_rw * sum har2_n rhobar_n^2 <= budget,
//                                0 <= rhobar_n <= cap
struct InnerSolution {
    Eigen::VectorXd rhobar;
    double value = 0.0;
    double mu = 0.0; // quadratic-constraint multiplier
};

InnerSolution inner_amplitudes(const Eigen::VectorXd& b_abs, const Eigen::VectorXd& har2,
                               double chi_rw, double budget, double cap)
{
    const int n = static_cast<int>(b_abs.size());
    InnerSolution out;
    out.rhobar = Eigen::VectorXd::Zero(n);
    if (budget < 0.0 || cap <= 0.0)
        return out;

    auto eval = [&](double mu) {
        Eigen::VectorXd r(n);
        for (int k = 0; k < n; ++k) {
            if (chi_rw * har2[k] <= kTiny) {
                r[k] = b_abs[k] > 0.0 ? cap : 0.0; // free rider, no quadratic cost
            } else if (mu <= 0.0) {
                r[k] = b_abs[k] > 0.0 ? cap : 0.0;
            } else {
                r[k] = std::clamp(b_abs[k] / (2.0 * mu * chi_rw * har2[k]), 0.0, cap);
            }
        }
        return r;
    };
    auto quad = [&](const Eigen::VectorXd& r) {
        double q = 0.0;
        for (int k = 0; k < n; ++k)
            q += chi_rw * har2[k] * r[k] * r[k];
        return q;
    };

    Eigen::VectorXd r = eval(0.0);
    if (quad(r) <= budget) {
        out.rhobar = r;
        out.value = r.dot(b_abs);
        out.mu = 0.0;
        return out;
    }

    double lo = 0.0, hi = 1.0;
    while (quad(eval(hi)) > budget) {
        hi *= 4.0;
        if (hi > 1e300)
            break;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (quad(eval(mid)) > budget)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi)
            break;
    }
    out.mu = hi;
    out.rhobar = eval(hi);
    out.value = out.rhobar.dot(b_abs);
    return out;
}

} // namespace

void NoCsiInstance::validate() const
{
    if (h_ar.size() != b.size())
        throw std::invalid_argument("NoCsiInstance: h_ar and b length mismatch");
    if (!(eps_bar > 0.0))
        throw std::invalid_argument("NoCsiInstance: eps_bar must be > 0");
    if (!(chi_rw > 0.0) || !(chi_aw > 0.0))
        throw std::invalid_argument("NoCsiInstance: channel gains must be > 0");
    if (!(sigma_w2 > 0.0) || !(sigma_b2 > 0.0) || !(p_max > 0.0))
        throw std::invalid_argument("NoCsiInstance: powers must be > 0");
    if (blocklength < 1)
        throw std::invalid_argument("NoCsiInstance: blocklength must be >= 1");
}

Eigen::VectorXd optimal_phases(const Eigen::VectorXcd& b, Complex h_ab)
{
    const int n = static_cast<int>(b.size());
    Eigen::VectorXd theta(n);
    const double ref = std::arg(h_ab);
    for (int k = 0; k < n; ++k)
        theta[k] = wrap_angle(ref - std::arg(b[k]));
    return theta;
}

double power_unit_amplitude(const NoCsiInstance& inst)
{
    inst.validate();
    const double denom = inst.chi_rw * inst.h_ar.squaredNorm() + inst.chi_aw;
    return std::min(inst.eps_bar * inst.sigma_w2 / denom, inst.p_max);
}

CommonAmplitudeResult common_amplitude_design(const NoCsiInstance& inst)
{
    inst.validate();
    const double b1 = inst.b.cwiseAbs().sum();
    const double hab = std::abs(inst.h_ab);
    const double har2 = inst.h_ar.squaredNorm();
    const double r = inst.eps_bar * inst.sigma_w2;

    CommonAmplitudeResult best;
    best.rho0 = 0.0;
    best.p_a = std::min(r / inst.chi_aw, inst.p_max);
    best.snr = 0.0; // replaced below; rho0 = 0 is always feasible

    auto consider = [&](double rho0, double p_a) {
        const double obj = objective_amp(p_a, rho0 * b1, hab);
        const double obj_best = objective_amp(best.p_a, best.rho0 * b1, hab);
        if (obj > obj_best + 1e-15 * std::abs(obj_best) ||
            (std::abs(obj - obj_best) <= 1e-12 * std::max(1.0, std::abs(obj_best)) &&
             p_a < best.p_a)) {
            best = {rho0, p_a, 0.0};
        }
    };

    if (inst.chi_rw * har2 <= kTiny) {
        // covertness does not see the amplitudes at all
        best = {1.0, std::min(r / inst.chi_aw, inst.p_max), 0.0};
    } else {
        // case (a): p_a = p_max; empty when the radicand is negative
        const double rad = (r / inst.p_max - inst.chi_aw) / (inst.chi_rw * har2);
        if (rad >= 0.0)
            consider(std::min(1.0, std::sqrt(rad)), inst.p_max);

        // case (b): covertness tight, p_a(rho0) <= p_max on [lo, 1]
        const double lo = rad > 0.0 ? std::sqrt(rad) : 0.0;
        if (lo <= 1.0) {
            std::vector<double> cands{lo, 1.0};
            if (hab > 0.0) {
                const double rho_s = inst.chi_aw * b1 / (inst.chi_rw * hab * har2);
                if (rho_s > lo && rho_s < 1.0)
                    cands.push_back(rho_s);
            }
            for (double rho0 : cands) {
                const double p =
                    std::min(r / (inst.chi_rw * rho0 * rho0 * har2 + inst.chi_aw), inst.p_max);
                consider(rho0, p);
            }
        }
    }

    best.snr = std::pow(objective_amp(best.p_a, best.rho0 * b1, hab), 2) / inst.sigma_b2;
    return best;
}

PerElementResult per_element_design(const NoCsiInstance& inst)
{
    inst.validate();
    const int n = inst.num_elements();
    const Eigen::VectorXd b_abs = inst.b.cwiseAbs();
    const Eigen::VectorXd har2 = inst.h_ar.cwiseAbs2();
    const double hab = std::abs(inst.h_ab);
    const double r = inst.eps_bar * inst.sigma_w2;
    const double p_hi = std::min(inst.p_max, r / inst.chi_aw);

    auto value_at = [&](double p) {
        if (p <= 0.0)
            return 0.0;
        const InnerSolution s =
            inner_amplitudes(b_abs, har2, inst.chi_rw, r - p * inst.chi_aw, std::sqrt(p));
        return s.value + std::sqrt(p) * hab;
    };

    // 64-point scan to bracket, then golden-section inside the best cell
    const int scan = 64;
    int best_k = 0;
    double best_val = -1.0;
    for (int k = 0; k <= scan; ++k) {
        const double p = p_hi * k / scan;
        const double v = value_at(p);
        if (v > best_val) {
            best_val = v;
            best_k = k;
        }
    }
    double lo = p_hi * std::max(0, best_k - 1) / scan;
    double hi = p_hi * std::min(scan, best_k + 1) / scan;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = value_at(x1), f2 = value_at(x2);
    for (int it = 0; it < 120 && (hi - lo) > 1e-12 * std::max(p_hi, kTiny); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = value_at(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = value_at(x1);
        }
    }
    const double p_a = 0.5 * (lo + hi);

    PerElementResult out;
    out.p_a = p_a;
    out.rho = Eigen::VectorXd::Zero(n);
    if (p_a > 0.0) {
        const InnerSolution s =
            inner_amplitudes(b_abs, har2, inst.chi_rw, r - p_a * inst.chi_aw, std::sqrt(p_a));
        out.rho = s.rhobar / std::sqrt(p_a);
        out.snr = std::pow(s.value + std::sqrt(p_a) * hab, 2) / inst.sigma_b2;
    }
    return out;
}

NoCsiSuite no_csi_suite(const NoCsiInstance& inst)
{
    inst.validate();
    const int n = inst.num_elements();
    const Eigen::VectorXd theta = optimal_phases(inst.b, inst.h_ab);
    const Eigen::VectorXd har2 = inst.h_ar.cwiseAbs2();
    const double hab = std::abs(inst.h_ab);

    auto finish = [&](const Eigen::VectorXd& rho, double p_a) {
        scenario::ReflectDesign d;
        d.p_a = p_a;
        d.rho = rho;
        d.theta = theta;
        const double amp = rho.dot(inst.b.cwiseAbs()) + hab;
        d.bob_snr = p_a * amp * amp / inst.sigma_b2;
        const double delta = inst.chi_rw * (rho.cwiseAbs2().dot(har2)) + inst.chi_aw;
        d.willie_gain = delta;
        d.kl_value = p_a > 0.0 ? covertness::expected_kl(p_a, delta, inst.sigma_w2,
                                                         inst.blocklength)
                               : 0.0;
        return d;
    };

    NoCsiSuite suite;
    suite.unit = finish(Eigen::VectorXd::Ones(n), power_unit_amplitude(inst));
    const CommonAmplitudeResult common = common_amplitude_design(inst);
    suite.common = finish(Eigen::VectorXd::Constant(n, common.rho0), common.p_a);
    const PerElementResult per = per_element_design(inst);
    suite.per_element = finish(per.rho, per.p_a);
    return suite;
}

} // namespace irscc::no_csi
