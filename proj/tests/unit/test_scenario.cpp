// SPDX-License-Identifier: Apache-2.0
#include "irscc/scenario.hpp"
#include "irscc/two_stage.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace irscc;
using doctest::Approx;
using C = std::complex<double>;

TEST_SUITE_BEGIN("scenario");

TEST_CASE("path_loss power law")
{
    CHECK(scenario::path_loss(1.0, 2.4, 1e-3) == Approx(1e-3).epsilon(1e-14));
    CHECK(scenario::path_loss(100.0, 3.0, 1e-3) == Approx(1e-9).epsilon(1e-14));
    CHECK(scenario::path_loss(100.0, 4.2, 1e-3) ==
          Approx(1e-3 * std::pow(10.0, -8.4)).epsilon(1e-12));
    CHECK_THROWS_AS(scenario::path_loss(0.0, 2.0, 1e-3), std::domain_error);
    CHECK_THROWS_AS(scenario::path_loss(-5.0, 2.0, 1e-3), std::domain_error);
}

TEST_CASE("unit conversions")
{
    CHECK(scenario::dbm_to_watts(36.0) == Approx(3.9810717055349722).epsilon(1e-12));
    CHECK(scenario::dbm_to_watts(-80.0) == Approx(1e-11).epsilon(1e-12));
    CHECK(scenario::db_to_linear(-30.0) == Approx(1e-3).epsilon(1e-12));
    CHECK(scenario::watts_to_dbm(scenario::dbm_to_watts(17.3)) == Approx(17.3).epsilon(1e-12));
    CHECK(scenario::linear_to_db(scenario::db_to_linear(-3.7)) == Approx(-3.7).epsilon(1e-12));
}

TEST_CASE("sample_channels is deterministic in the seed")
{
    const auto inst = oracles::sv_instance(3, 2, 42);
    const auto again = oracles::sv_instance(3, 2, 42);
    CHECK(inst.ch.h_ar == again.ch.h_ar);
    CHECK(inst.ch.h_rb == again.ch.h_rb);
    CHECK(inst.ch.h_rw == again.ch.h_rw);
    CHECK(inst.ch.h_ab == again.ch.h_ab);
    CHECK(inst.ch.h_aw == again.ch.h_aw);

    const auto other = oracles::sv_instance(3, 2, 43);
    CHECK(inst.ch.h_ab != other.ch.h_ab);
}

TEST_CASE("rician factor zero removes the deterministic component")
{
    auto cfg = harness::default_config();
    cfg.params.n_x = 1;
    cfg.params.n_z = 1;
    const auto gains = scenario::path_gains(cfg.geometry, cfg.params.beta0);
    const int draws = 20000;

    C mean_k0 = 0.0, mean_k5 = 0.0;
    auto rayleigh = cfg.params;
    rayleigh.rician_k = 0.0;
    for (int i = 0; i < draws; ++i) {
        mean_k0 += scenario::sample_channels(cfg.geometry, rayleigh, 50000 + i).h_ar[0];
        mean_k5 += scenario::sample_channels(cfg.geometry, cfg.params, 50000 + i).h_ar[0];
    }
    mean_k0 /= draws;
    mean_k5 /= draws;

    const double se = std::sqrt(gains.chi_ar / draws);
    CHECK(std::abs(mean_k0) < 4.0 * se); // pure Rayleigh: zero-mean
    const double k = cfg.params.rician_k;
    const double los_mag = std::sqrt(gains.chi_ar * k / (k + 1.0));
    CHECK(std::abs(mean_k5) > los_mag - 4.0 * se); // Rician: LOS mean survives
}

TEST_CASE("second moments match the path loss")
{
    auto cfg = harness::default_config();
    cfg.params.n_x = 1;
    cfg.params.n_z = 1;
    const auto gains = scenario::path_gains(cfg.geometry, cfg.params.beta0);
    const int draws = 30000;
    double acc_aw = 0.0, acc_rb = 0.0, acc_ar = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto ch = scenario::sample_channels(cfg.geometry, cfg.params,
                                                  scenario::mix_seed(9001, i));
        acc_aw += std::norm(ch.h_aw);
        acc_rb += ch.h_rb.squaredNorm();
        acc_ar += ch.h_ar.squaredNorm();
    }
    const double three_se = 3.0 / std::sqrt(static_cast<double>(draws));
    CHECK(std::abs(acc_aw / draws - gains.chi_aw) / gains.chi_aw < three_se);
    CHECK(std::abs(acc_rb / draws - gains.chi_rb) / gains.chi_rb < three_se);
    CHECK(std::abs(acc_ar / draws - gains.chi_ar) / gains.chi_ar < three_se);
}

TEST_CASE("cascade_vectors elementwise products")
{
    {
        scenario::ChannelSet ch;
        ch.h_ar = Eigen::VectorXcd::Random(4);
        ch.h_rb = Eigen::VectorXcd::Random(4);
        ch.h_rw = Eigen::VectorXcd::Ones(4);
        const auto [a, b] = scenario::cascade_vectors(ch);
        CHECK((a - ch.h_ar).norm() == 0.0);
    }
    {
        scenario::ChannelSet ch;
        ch.h_ar = Eigen::VectorXcd::Constant(1, 3.0);
        ch.h_rw = Eigen::VectorXcd::Constant(1, C(0.0, 2.0));
        ch.h_rb = Eigen::VectorXcd::Constant(1, 1.0);
        const auto [a, b] = scenario::cascade_vectors(ch);
        CHECK(a[0] == C(0.0, -6.0));
    }
    {
        const auto inst = oracles::sv_instance(2, 2, 7);
        for (int k = 0; k < 4; ++k) {
            CHECK(inst.a[k] == std::conj(inst.ch.h_rw[k]) * inst.ch.h_ar[k]);
            CHECK(inst.b[k] == std::conj(inst.ch.h_rb[k]) * inst.ch.h_ar[k]);
        }
    }
}

TEST_CASE("bob_snr closed form")
{
    const auto inst = oracles::sv_instance(2, 2, 8);
    const int n = 4;
    CHECK(scenario::bob_snr(0.0, Eigen::VectorXcd::Zero(n), inst.b, inst.ch.h_ab, 1.0) == 0.0);

    // direct path only, |h_ab|^2 = sigma_b2 => snr equals p_a
    const double sigma = std::norm(inst.ch.h_ab);
    CHECK(scenario::bob_snr(2.5, Eigen::VectorXcd::Zero(n), inst.b, inst.ch.h_ab, sigma) ==
          Approx(2.5).epsilon(1e-12));

    // polar-form recomputation oracle
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        Eigen::VectorXd rho(n), theta(n);
        for (int k = 0; k < n; ++k) {
            rho[k] = unif(eng);
            theta[k] = 2.0 * std::numbers::pi * unif(eng);
        }
        const Eigen::VectorXcd v = scenario::reflect_vector(rho, theta);
        C coherent = inst.ch.h_ab;
        for (int k = 0; k < n; ++k)
            coherent += rho[k] * std::abs(inst.b[k]) *
                        std::polar(1.0, theta[k] + std::arg(inst.b[k]));
        const double expected = 1.7 * std::norm(coherent) / 2.3;
        CHECK(scenario::bob_snr(1.7, v, inst.b, inst.ch.h_ab, 2.3) ==
              Approx(expected).epsilon(1e-11));
    }
}

TEST_CASE("willie_gain closed form")
{
    const auto inst = oracles::sv_instance(3, 3, 9);
    const int n = 9;
    CHECK(scenario::willie_gain(Eigen::VectorXcd::Zero(n), inst.a, inst.ch.h_aw) ==
          Approx(std::norm(inst.ch.h_aw)).epsilon(1e-14));

    if (two_stage::perfect_covertness_feasible(inst.a, inst.ch.h_aw)) {
        const auto d = two_stage::perfect_covertness_design(inst.a, inst.ch.h_aw, 1.0);
        const Eigen::VectorXcd v = scenario::reflect_vector(d.rho, d.theta);
        CHECK(scenario::willie_gain(v, inst.a, inst.ch.h_aw) <
              1e-20 * std::norm(inst.ch.h_aw));
    }

    std::mt19937_64 eng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        Eigen::VectorXcd v(n);
        for (int k = 0; k < n; ++k)
            v[k] = C(normal(eng), normal(eng)) / 3.0;
        C acc = inst.ch.h_aw;
        for (int k = 0; k < n; ++k)
            acc += std::conj(v[k]) * inst.a[k];
        CHECK(scenario::willie_gain(v, inst.a, inst.ch.h_aw) ==
              Approx(std::norm(acc)).epsilon(1e-12));
    }
}

TEST_CASE("cascade identity against the diagonal reflect matrix")
{
    const auto inst = oracles::sv_instance(2, 3, 10);
    const int n = 6;
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd rho = Eigen::VectorXd::Ones(n), theta(n);
        for (int k = 0; k < n; ++k)
            theta[k] = unif(eng);
        const Eigen::VectorXcd v = scenario::reflect_vector(rho, theta);
        // h_rw^H Theta h_ar with Theta = diag(rho_n e^{j theta_n})
        C via_theta = 0.0;
        for (int k = 0; k < n; ++k)
            via_theta += std::conj(inst.ch.h_rw[k]) * std::polar(rho[k], theta[k]) *
                         inst.ch.h_ar[k];
        const C via_cascade = v.dot(inst.a);
        CHECK(std::abs(via_cascade - via_theta) <= 1e-12 * std::abs(via_theta));
    }
}

TEST_CASE("h_ar substreams are prefix-stable in N")
{
    const auto small = oracles::sv_instance(2, 2, 77);
    const auto big = oracles::sv_instance(2, 4, 77);
    for (int k = 0; k < 4; ++k)
        CHECK(small.ch.h_ar[k] == big.ch.h_ar[k]);
}

TEST_SUITE_END();
