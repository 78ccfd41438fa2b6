// SPDX-License-Identifier: Apache-2.0
#include "irscc/covertness.hpp"
#include "irscc/errors.hpp"
#include "irscc/psca.hpp"
#include "irscc/scenario.hpp"
#include "irscc/two_stage.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

using namespace irscc;
using doctest::Approx;
using C = std::complex<double>;

namespace {

const covertness::CovertnessBudget kBudget{0.1, 100};

double quad(const Eigen::MatrixXcd& m, const Eigen::VectorXcd& u)
{
    return (u.adjoint() * m * u).value().real();
}

double ratio(const psca::QuadraticForms& qf, const Eigen::VectorXcd& u)
{
    return quad(qf.b_form, u) / quad(qf.a_form, u);
}

Eigen::VectorXcd bob_aligned(const psca::QuadraticForms& qf)
{
    const int n = qf.num_elements();
    Eigen::VectorXcd u(n + 1);
    for (int k = 0; k < n; ++k)
        u[k] = std::polar(1.0, std::arg(qf.b[k]) - std::arg(qf.h_ab));
    u[n] = 1.0;
    return u;
}

// the quadratic surrogate whose gradient at u_tilde is the sca direction:
// psi(u) = u^H B u / (u~^H A u~) - u^H (A - lmax I) u * (u~^H B u~)/(u~^H A u~)^2
double psi(const psca::QuadraticForms& qf, const Eigen::VectorXcd& u_tilde,
           const Eigen::VectorXcd& u)
{
    const double uau = quad(qf.a_form, u_tilde);
    const double ubu = quad(qf.b_form, u_tilde);
    const double lmax = qf.lambda_max_a();
    return quad(qf.b_form, u) / uau -
           (quad(qf.a_form, u) - lmax * u.squaredNorm()) * ubu / (uau * uau);
}

} // namespace

TEST_SUITE_BEGIN("two_stage");

TEST_CASE("perfect covertness feasibility predicate")
{
    Eigen::VectorXcd a1(1);
    a1 << 1.0;
    CHECK(two_stage::perfect_covertness_feasible(a1, 0.5));

    Eigen::VectorXcd a2(2);
    a2 << 0.1, 0.2;
    CHECK_FALSE(two_stage::perfect_covertness_feasible(a2, 0.5));
    CHECK(two_stage::perfect_covertness_feasible(a2, C(0.0, 0.3))); // equality boundary
}

TEST_CASE("perfect covertness closed form cancels exactly")
{
    {
        Eigen::VectorXcd a(1);
        a << std::polar(2.0, std::numbers::pi / 4.0);
        const auto d = two_stage::perfect_covertness_design(a, 1.0, 3.5);
        CHECK(d.p_a == 3.5);
        CHECK(d.rho[0] == Approx(0.5).epsilon(1e-14));
        const Eigen::VectorXcd v = scenario::reflect_vector(d.rho, d.theta);
        CHECK(std::abs(v[0] - std::polar(0.5, std::numbers::pi / 4.0 - std::numbers::pi)) <
              1e-14);
        CHECK(std::abs(v.dot(a) + 1.0) < 1e-15);
        CHECK(d.kl_value == 0.0);
    }
    {
        // kappa = 1 boundary, exactly representable moduli: amplitudes saturate
        Eigen::VectorXcd a(2);
        a << C(0.25, 0.0), C(0.0, 0.75);
        const C h_aw = 1.0;
        CHECK(two_stage::perfect_covertness_feasible(a, h_aw)); // equality included
        const auto d = two_stage::perfect_covertness_design(a, h_aw, 1.0);
        CHECK(d.rho[0] == Approx(1.0).epsilon(1e-13));
        CHECK(d.rho[1] == Approx(1.0).epsilon(1e-13));
        CHECK(d.willie_gain < 1e-18 * std::norm(h_aw));
    }
    for (std::uint64_t seed = 1000; seed < 1010; ++seed) {
        const auto inst = oracles::sv_instance(3, 3, seed);
        if (!two_stage::perfect_covertness_feasible(inst.a, inst.ch.h_aw))
            continue;
        const auto d = two_stage::perfect_covertness_design(inst.a, inst.ch.h_aw, 2.0);
        CHECK(d.willie_gain < 1e-18 * std::norm(inst.ch.h_aw));
    }
    Eigen::VectorXcd small(1);
    small << 0.1;
    CHECK_THROWS_AS(two_stage::perfect_covertness_design(small, 1.0, 1.0),
                    feasibility_error);
}

TEST_CASE("sca surrogate is tight at the expansion point")
{
    const auto inst = oracles::sv_instance(2, 2, 51);
    const auto qf = psca::build_quadratic_forms(inst.a, inst.b, inst.ch.h_ab, inst.ch.h_aw);
    const Eigen::VectorXcd u = bob_aligned(qf);
    const Eigen::VectorXcd f = two_stage::sca_direction(u, qf);

    // 2 Re(f^H u~) + varsigma_1(u~) must equal the true ratio at u~
    const double uau = quad(qf.a_form, u);
    const double ubu = quad(qf.b_form, u);
    const double lmax = qf.lambda_max_a();
    const double lin = 2.0 * std::real(f.dot(u));
    const double vs1 = ubu / uau - lmax * (2.0 * u.squaredNorm()) * ubu / (uau * uau);
    CHECK(lin + vs1 == Approx(ratio(qf, u)).epsilon(1e-11));

    // and the varsigma_2 form differs by exactly the announced gap
    const int n1 = qf.num_elements() + 1;
    const double vs2 = ubu / uau - 2.0 * lmax * n1 * ubu / (uau * uau);
    CHECK(vs1 - vs2 == Approx(2.0 * lmax * (n1 - u.squaredNorm()) * ubu / (uau * uau))
                           .epsilon(1e-11));
}

TEST_CASE("sca direction matches the finite-difference gradient of the surrogate")
{
    const auto inst = oracles::sv_instance(2, 2, 52);
    const auto qf = psca::build_quadratic_forms(inst.a, inst.b, inst.ch.h_ab, inst.ch.h_aw);
    const Eigen::VectorXcd u = bob_aligned(qf);
    const Eigen::VectorXcd f = two_stage::sca_direction(u, qf);

    const double h = 1e-6;
    for (int k = 0; k < u.size(); ++k) {
        Eigen::VectorXcd up = u, um = u;
        up[k] += h;
        um[k] -= h;
        const double d_re = (psi(qf, u, up) - psi(qf, u, um)) / (2.0 * h);
        up = u;
        um = u;
        up[k] += C(0.0, h);
        um[k] -= C(0.0, h);
        const double d_im = (psi(qf, u, up) - psi(qf, u, um)) / (2.0 * h);
        CHECK(d_re == Approx(2.0 * f[k].real()).epsilon(1e-6));
        CHECK(d_im == Approx(2.0 * f[k].imag()).epsilon(1e-6));
    }

    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(u.size());
    Eigen::VectorXcd az(2);
    az << 0.0, 0.0;
    const auto qf0 = psca::build_quadratic_forms(az, az, 0.0, 0.0);
    CHECK_THROWS_AS(two_stage::sca_direction(zero.head(3), qf0), std::domain_error);
}

TEST_CASE("single update ascends the true ratio on nearly all instances")
{
    int ascents = 0;
    const int total = 200;
    for (int s = 0; s < total; ++s) {
        const auto inst = oracles::sv_instance(2, 2, 2000 + s);
        const auto qf =
            psca::build_quadratic_forms(inst.a, inst.b, inst.ch.h_ab, inst.ch.h_aw);
        Eigen::VectorXcd u = bob_aligned(qf);
        const double before = ratio(qf, u);
        const Eigen::VectorXcd f = two_stage::sca_direction(u, qf);
        for (int k = 0; k < u.size(); ++k)
            u[k] = std::abs(f[k]) > 0.0 ? f[k] / std::abs(f[k]) : u[k];
        if (ratio(qf, u) >= before * (1.0 - 1e-9))
            ++ascents;
    }
    CHECK(ascents >= 0.95 * total);
}

TEST_CASE("collinear channels leave the phases at the aligned fixed point")
{
    // a exactly parallel to b (same per-element phases): f ~ u, so the phase
    // update is a fixed point
    Eigen::VectorXcd b(1);
    b << std::polar(1.3, 0.9);
    const C h_ab = std::polar(0.7, -0.4);
    const double c = 0.2;
    Eigen::VectorXcd a = c * b;
    const C h_aw = c * h_ab;
    const auto qf = psca::build_quadratic_forms(a, b, h_ab, h_aw);
    const Eigen::VectorXcd u = bob_aligned(qf);
    const Eigen::VectorXcd f = two_stage::sca_direction(u, qf);
    for (int k = 0; k < u.size(); ++k) {
        const double dphi =
            std::remainder(std::arg(f[k]) - std::arg(u[k]), 2.0 * std::numbers::pi);
        CHECK(std::abs(dphi) < 1e-10);
    }
}

TEST_CASE("two_stage_optimize output contracts")
{
    for (std::uint64_t seed = 61; seed < 71; ++seed) {
        const auto inst = oracles::sv_instance(2, 2, seed);
        const auto qf =
            psca::build_quadratic_forms(inst.a, inst.b, inst.ch.h_ab, inst.ch.h_aw);
        const auto d = two_stage::two_stage_optimize(qf, kBudget, {}, inst.params.sigma_w2,
                                                     inst.params.sigma_b2,
                                                     inst.params.p_max);
        CHECK(d.kl_value <= kBudget.kl_cap() * (1.0 + 1e-12)); // conservative: strict
        CHECK(d.p_a <= inst.params.p_max);
        CHECK(d.rho.maxCoeff() <= 1.0 + 1e-12);
        CHECK(d.rho.minCoeff() >= 1.0 - 1e-12); // stage 1 forces unit moduli

        // stage-1 fixed point: arg(u_n) == arg(f_n(u)) at convergence
        const int n = qf.num_elements();
        Eigen::VectorXcd u(n + 1);
        for (int k = 0; k < n; ++k)
            u[k] = std::polar(1.0, -d.theta[k]);
        u[n] = 1.0;
        if (quad(qf.a_form, u) > 0.0) {
            const Eigen::VectorXcd f = two_stage::sca_direction(u, qf);
            for (int k = 0; k <= n; ++k) {
                if (std::abs(f[k]) == 0.0)
                    continue;
                const double dphi = std::remainder(std::arg(f[k]) - std::arg(u[k]),
                                                   2.0 * std::numbers::pi);
                CHECK(std::abs(dphi) < 1e-6);
            }
        }
    }
}

TEST_CASE("two_stage does not beat psca")
{
    int comparable = 0, held = 0;
    for (std::uint64_t seed = 81; seed < 91; ++seed) {
        const auto inst = oracles::sv_instance(2, 1, seed);
        const auto qf =
            psca::build_quadratic_forms(inst.a, inst.b, inst.ch.h_ab, inst.ch.h_aw);
        const auto ts = two_stage::two_stage_optimize(qf, kBudget, {}, inst.params.sigma_w2,
                                                      inst.params.sigma_b2,
                                                      inst.params.p_max);
        const auto ps = psca::psca_optimize(qf, kBudget, {}, inst.params.sigma_w2,
                                            inst.params.sigma_b2, inst.params.p_max);
        if (ps.status != psca::PscaStatus::converged)
            continue;
        ++comparable;
        if (ts.bob_snr <= ps.design.bob_snr + 1e-9)
            ++held;
    }
    CHECK(comparable >= 8);
    CHECK(held >= 0.9 * comparable);
}

TEST_CASE("conservative_power formula")
{
    const auto inst = oracles::sv_instance(2, 2, 53);
    const auto qf = psca::build_quadratic_forms(inst.a, inst.b, inst.ch.h_ab, inst.ch.h_aw);
    Eigen::VectorXcd u = bob_aligned(qf);
    const double sigma_w2 = inst.params.sigma_w2;
    const double p_max = inst.params.p_max;

    // epsilon = 0 collapses to zero power
    CHECK(two_stage::conservative_power(u, qf.a_form, {0.0, 100}, sigma_w2, p_max) == 0.0);

    // vanishing Willie form clamps to the power budget
    CHECK(two_stage::conservative_power(u, Eigen::MatrixXcd::Zero(5, 5), kBudget, sigma_w2,
                                        p_max) == p_max);

    const double p = two_stage::conservative_power(u, qf.a_form, kBudget, sigma_w2, p_max);
    if (p < p_max) {
        const double x = p * quad(qf.a_form, u) / sigma_w2;
        CHECK(std::abs(x - x / (1.0 + x) - kBudget.per_use_cap()) < 1e-10);
    }
}

TEST_CASE("baseline without IRS")
{
    const auto inst = oracles::sv_instance(2, 2, 54);
    const double sigma_w2 = inst.params.sigma_w2;
    const double sigma_b2 = inst.params.sigma_b2;
    const double p_max = inst.params.p_max;
    const auto d = two_stage::baseline_no_irs(inst.ch.h_ab, inst.ch.h_aw, kBudget, sigma_w2,
                                              sigma_b2, p_max, 4);
    if (d.p_a < p_max) {
        CHECK(d.kl_value == Approx(kBudget.kl_cap()).epsilon(1e-9));
        // any higher power violates covertness
        const double kl_up = covertness::kl_divergence(d.p_a * 1.001, d.willie_gain,
                                                       sigma_w2, kBudget.blocklength);
        CHECK(kl_up > kBudget.kl_cap());
    }
    CHECK(d.bob_snr == Approx(d.p_a * std::norm(inst.ch.h_ab) / sigma_b2).epsilon(1e-12));

    const auto dz = two_stage::baseline_no_irs(inst.ch.h_ab, inst.ch.h_aw, {0.0, 100},
                                               sigma_w2, sigma_b2, p_max, 4);
    CHECK(dz.p_a == 0.0);
    CHECK(dz.bob_snr == 0.0);

    const auto dh = two_stage::baseline_no_irs(inst.ch.h_ab, 0.0, kBudget, sigma_w2,
                                               sigma_b2, p_max, 4);
    CHECK(dh.p_a == p_max);
}

TEST_SUITE_END();
