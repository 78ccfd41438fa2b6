// SPDX-License-Identifier: Apache-2.0
#include "irscc/covertness.hpp"
#include "irscc/no_csi.hpp"
#include "irscc/scenario.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace irscc;
using doctest::Approx;
using C = std::complex<double>;

namespace {

no_csi::NoCsiInstance make_instance(const oracles::Instance& inst, double eps = 0.1,
                                    int blocklength = 100)
{
    no_csi::NoCsiInstance ni;
    ni.h_ar = inst.ch.h_ar;
    ni.b = inst.b;
    ni.h_ab = inst.ch.h_ab;
    ni.chi_rw = inst.gains.chi_rw;
    ni.chi_aw = inst.gains.chi_aw;
    ni.eps_bar = covertness::epsilon_bar({eps, blocklength});
    ni.sigma_w2 = inst.params.sigma_w2;
    ni.sigma_b2 = inst.params.sigma_b2;
    ni.p_max = inst.params.p_max;
    ni.blocklength = blocklength;
    return ni;
}

double objective(const no_csi::NoCsiInstance& ni, double rho_dot_b, double p_a)
{
    return std::sqrt(p_a) * (rho_dot_b + std::abs(ni.h_ab));
}

// exhaustive 2-D grid over (rho0, p_a) for the common-amplitude regime
double grid_common(const no_csi::NoCsiInstance& ni, int points)
{
    const double b1 = ni.b.cwiseAbs().sum();
    const double har2 = ni.h_ar.squaredNorm();
    const double r = ni.eps_bar * ni.sigma_w2;
    double best = 0.0;
    for (int i = 0; i < points; ++i) {
        const double rho0 = i / (points - 1.0);
        const double p_cap = std::min(ni.p_max, r / (ni.chi_rw * rho0 * rho0 * har2 + ni.chi_aw));
        for (int k = 1; k <= points; ++k) {
            const double p = p_cap * k / points;
            best = std::max(best, objective(ni, rho0 * b1, p));
        }
    }
    return best;
}

// exhaustive 3-D grid over (rho1, rho2, p_a) for the per-element regime, N=2
double grid_per_element(const no_csi::NoCsiInstance& ni, int points)
{
    const Eigen::VectorXd b_abs = ni.b.cwiseAbs();
    const Eigen::VectorXd har2 = ni.h_ar.cwiseAbs2();
    const double r = ni.eps_bar * ni.sigma_w2;
    double best = 0.0;
    for (int i = 0; i < points; ++i)
        for (int j = 0; j < points; ++j) {
            const double r1 = i / (points - 1.0), r2 = j / (points - 1.0);
            const double delta =
                ni.chi_rw * (r1 * r1 * har2[0] + r2 * r2 * har2[1]) + ni.chi_aw;
            const double p_cap = std::min(ni.p_max, r / delta);
            for (int k = 1; k <= points; ++k) {
                const double p = p_cap * k / points;
                best = std::max(best, objective(ni, r1 * b_abs[0] + r2 * b_abs[1], p));
            }
        }
    return best;
}

} // namespace

TEST_SUITE_BEGIN("no_csi");

TEST_CASE("optimal_phases coherent combining")
{
    {
        Eigen::VectorXcd b(2);
        b << 0.7, 1.3;
        const Eigen::VectorXd theta = no_csi::optimal_phases(b, 2.0);
        CHECK(theta[0] == 0.0);
        CHECK(theta[1] == 0.0);
    }
    {
        const auto inst = oracles::sv_instance(2, 1, 71);
        const Eigen::VectorXd theta = no_csi::optimal_phases(inst.b, inst.ch.h_ab);
        Eigen::VectorXd rho(2);
        rho << 0.4, 0.9;
        C acc = inst.ch.h_ab;
        for (int k = 0; k < 2; ++k)
            acc += rho[k] * std::abs(inst.b[k]) *
                   std::polar(1.0, theta[k] + std::arg(inst.b[k]));
        const double coherent = rho[0] * std::abs(inst.b[0]) + rho[1] * std::abs(inst.b[1]) +
                                std::abs(inst.ch.h_ab);
        CHECK(std::abs(acc) == Approx(coherent).epsilon(1e-12));
    }
    {
        // common phase rotation of (b, h_ab) is a gauge: achieved SNR unchanged
        const auto inst = oracles::sv_instance(2, 1, 72);
        auto ni = make_instance(inst);
        const auto before = no_csi::no_csi_suite(ni);
        const C rot = std::polar(1.0, 1.234);
        ni.b = (inst.b.array() * rot).matrix();
        ni.h_ab = inst.ch.h_ab * rot;
        const auto after = no_csi::no_csi_suite(ni);
        CHECK(after.unit.bob_snr == Approx(before.unit.bob_snr).epsilon(1e-12));
        CHECK(after.per_element.bob_snr == Approx(before.per_element.bob_snr).epsilon(1e-9));
    }
}

TEST_CASE("power_unit_amplitude clamp and plug-back")
{
    const auto inst = oracles::sv_instance(2, 2, 73);
    auto ni = make_instance(inst);
    const double p = no_csi::power_unit_amplitude(ni);
    const double denom = ni.chi_rw * ni.h_ar.squaredNorm() + ni.chi_aw;
    if (p < ni.p_max)
        CHECK(p * denom / ni.sigma_w2 == Approx(ni.eps_bar).epsilon(1e-12));

    auto clamped = ni;
    clamped.p_max = 1e-6;
    CHECK(no_csi::power_unit_amplitude(clamped) == 1e-6);
}

TEST_CASE("required power decreases with more elements (nested draws)")
{
    const auto small = oracles::sv_instance(2, 2, 74);
    const auto big = oracles::sv_instance(2, 6, 74); // same h_ar prefix, more elements
    const auto ni_small = make_instance(small);
    const auto ni_big = make_instance(big);
    CHECK(no_csi::power_unit_amplitude(ni_big) < no_csi::power_unit_amplitude(ni_small));
}

TEST_CASE("common amplitude stationary point arithmetic")
{
    // chi_aw ||b||_1 / (chi_rw |h_ab| ||h_ar||^2) = 1 for this construction
    no_csi::NoCsiInstance ni;
    ni.h_ar = Eigen::VectorXcd::Constant(1, 0.1);
    ni.b = Eigen::VectorXcd::Constant(1, 1e-5);
    ni.h_ab = 1e-5;
    ni.chi_rw = 1e-9;
    ni.chi_aw = 1e-11;
    ni.eps_bar = 0.01;
    ni.sigma_w2 = 1e-11;
    ni.sigma_b2 = 1e-11;
    ni.p_max = 4.0;
    const double rho_s = ni.chi_aw * ni.b.cwiseAbs().sum() /
                         (ni.chi_rw * std::abs(ni.h_ab) * ni.h_ar.squaredNorm());
    CHECK(rho_s == Approx(1.0).epsilon(1e-12));
    const auto res = no_csi::common_amplitude_design(ni);
    CHECK(res.rho0 >= 0.0);
    CHECK(res.rho0 <= 1.0);
}

TEST_CASE("common amplitude tracks the 2-D grid")
{
    for (std::uint64_t seed = 75; seed < 80; ++seed) {
        const auto inst = oracles::sv_instance(2, 1, seed);
        const auto ni = make_instance(inst);
        const auto res = no_csi::common_amplitude_design(ni);
        const double mine = objective(ni, res.rho0 * ni.b.cwiseAbs().sum(), res.p_a);
        const double grid = grid_common(ni, 200);
        CHECK(mine >= grid * (1.0 - 5e-3));
        // covertness feasible
        const double delta =
            ni.chi_rw * res.rho0 * res.rho0 * ni.h_ar.squaredNorm() + ni.chi_aw;
        CHECK(res.p_a * delta <= ni.eps_bar * ni.sigma_w2 * (1.0 + 1e-9));
    }
}

TEST_CASE("common amplitude degenerate chi_aw -> 0 stays finite")
{
    const auto inst = oracles::sv_instance(2, 1, 81);
    auto ni = make_instance(inst);
    ni.chi_aw = 1e-30;
    const auto res = no_csi::common_amplitude_design(ni);
    CHECK(res.rho0 >= 0.0);
    CHECK(std::isfinite(res.p_a));
    CHECK(std::isfinite(res.snr));
}

TEST_CASE("per-element design: grid, KKT structure, feasibility")
{
    for (std::uint64_t seed = 82; seed < 87; ++seed) {
        const auto inst = oracles::sv_instance(2, 1, seed);
        const auto ni = make_instance(inst);
        const auto res = no_csi::per_element_design(ni);

        // feasibility within 1e-9 relative
        const Eigen::VectorXd har2 = ni.h_ar.cwiseAbs2();
        const double delta = ni.chi_rw * res.rho.cwiseAbs2().dot(har2) + ni.chi_aw;
        CHECK(res.p_a * delta <= ni.eps_bar * ni.sigma_w2 * (1.0 + 1e-9));
        CHECK(res.p_a <= ni.p_max * (1.0 + 1e-12));
        CHECK(res.rho.maxCoeff() <= 1.0 + 1e-9);
        CHECK(res.rho.minCoeff() >= -1e-12);

        // objective against the 3-D grid
        const double mine = objective(ni, res.rho.dot(ni.b.cwiseAbs()), res.p_a);
        const double grid = grid_per_element(ni, 100);
        CHECK(mine >= grid * (1.0 - 5e-3));

        // interior elements share the KKT ratio b_n / (rhobar_n har2_n)
        const double cap = 1.0 - 1e-7;
        double ratio_seen = -1.0;
        for (int k = 0; k < 2; ++k) {
            if (res.rho[k] > 1e-7 && res.rho[k] < cap && har2[k] > 0.0) {
                const double r = std::abs(ni.b[k]) / (res.rho[k] * har2[k]);
                if (ratio_seen < 0.0)
                    ratio_seen = r;
                else
                    CHECK(r == Approx(ratio_seen).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("symmetric channels collapse per-element to the common design")
{
    no_csi::NoCsiInstance ni;
    ni.h_ar = Eigen::VectorXcd::Constant(4, std::polar(2e-4, 0.3));
    ni.b = Eigen::VectorXcd::Constant(4, std::polar(3e-10, -1.2));
    ni.h_ab = std::polar(5e-10, 0.8);
    ni.chi_rw = 7e-7;
    ni.chi_aw = 4e-12;
    ni.eps_bar = covertness::epsilon_bar({0.1, 100});
    ni.sigma_w2 = 1e-11;
    ni.sigma_b2 = 1e-11;
    ni.p_max = 4.0;
    ni.blocklength = 100;

    const auto per = no_csi::per_element_design(ni);
    const auto common = no_csi::common_amplitude_design(ni);
    for (int k = 1; k < 4; ++k)
        CHECK(per.rho[k] == Approx(per.rho[0]).epsilon(1e-6));
    const double obj_per = objective(ni, per.rho.dot(ni.b.cwiseAbs()), per.p_a);
    const double obj_common = objective(ni, common.rho0 * ni.b.cwiseAbs().sum(), common.p_a);
    CHECK(obj_per == Approx(obj_common).epsilon(1e-6));
}

TEST_CASE("suite ordering, expected KL cap and tight boundary")
{
    const covertness::CovertnessBudget budget{0.1, 100};
    for (std::uint64_t seed = 90; seed < 100; ++seed) {
        const auto inst = oracles::sv_instance(2, 2, seed);
        const auto ni = make_instance(inst);
        const auto suite = no_csi::no_csi_suite(ni);

        const double slack = 1e-6;
        CHECK(suite.per_element.bob_snr >= suite.common.bob_snr * (1.0 - slack));
        CHECK(suite.common.bob_snr >= suite.unit.bob_snr * (1.0 - slack));

        for (const auto* d : {&suite.unit, &suite.common, &suite.per_element}) {
            CHECK(d->kl_value <= budget.kl_cap() + 1e-8);
            // willie_gain carries the expected gain delta for these designs
            const double xhat = d->p_a * d->willie_gain / ni.sigma_w2;
            if (d->p_a < ni.p_max * (1.0 - 1e-9))
                CHECK(xhat == Approx(ni.eps_bar).epsilon(1e-9));
            else
                CHECK(xhat <= ni.eps_bar * (1.0 + 1e-9));
        }

        // theta has no effect on the expected KL: delta depends on rho only
        const Eigen::VectorXd har2 = ni.h_ar.cwiseAbs2();
        const double delta =
            ni.chi_rw * suite.unit.rho.cwiseAbs2().dot(har2) + ni.chi_aw;
        CHECK(suite.unit.willie_gain == Approx(delta).epsilon(1e-12));
    }
}

TEST_CASE("suite beats the no-IRS statistical baseline on most draws")
{
    int wins = 0, total = 0;
    for (std::uint64_t seed = 150; seed < 160; ++seed) {
        const auto inst = oracles::sv_instance(5, 5, seed);
        const auto ni = make_instance(inst);
        const auto suite = no_csi::no_csi_suite(ni);
        const double p_noirs = std::min(ni.eps_bar * ni.sigma_w2 / ni.chi_aw, ni.p_max);
        const double snr_noirs = p_noirs * std::norm(ni.h_ab) / ni.sigma_b2;
        ++total;
        if (suite.per_element.bob_snr > snr_noirs)
            ++wins;
    }
    CHECK(wins >= 0.9 * total);
}

TEST_CASE("instance validation")
{
    no_csi::NoCsiInstance bad;
    bad.h_ar = Eigen::VectorXcd::Ones(2);
    bad.b = Eigen::VectorXcd::Ones(3);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_SUITE_END();
