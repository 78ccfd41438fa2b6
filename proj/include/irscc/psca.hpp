// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irscc/covertness.hpp"
#include "irscc/scenario.hpp"

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace irscc::psca {

using Complex = std::complex<double>;

/// The (N+1)-order Hermitian quadratic forms of the lifted design problem:
/// u^H B u = |v^H b + h_ab|^2 and u^H A u = |v^H a + h_aw|^2 for u = [v; 1].
/// Both are rank-one PSD: A = abar abar^H with abar = [a; conj(h_aw)].
struct QuadraticForms {
    Eigen::MatrixXcd a_form; // Willie
    Eigen::MatrixXcd b_form; // Bob
    Eigen::VectorXcd a;
    Eigen::VectorXcd b;
    Complex h_ab{};
    Complex h_aw{};

    int num_elements() const { return static_cast<int>(a.size()); }
    double lambda_max_a() const; // ||abar||^2, rank-one identity
    double lambda_max_b() const;
};

QuadraticForms build_quadratic_forms(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                     Complex h_ab, Complex h_aw);

struct PscaConfig {
    double tau0 = 0.0;     // <=0: auto (1e-3 * Tr(B) * p_max)
    double c = 5.0;        // penalty growth factor, > 1
    double tau_max = 0.0;  // <=0: auto (1e6 * tau0)
    double eta_tol = 1e-8; // rank-slack tolerance, relative to Tr(W)
    double obj_tol = 1e-6; // relative objective change
    int max_outer = 50;
    bool unit_amplitudes = false; // force W_nn = P_a (rho_n = 1 regime)
    bool record_iterates = false;
};

enum class PscaStatus { converged, max_iter, subproblem_failure };

struct PscaResult {
    scenario::ReflectDesign design;
    Eigen::MatrixXcd w_final;
    double eta_final = 0.0;
    double rank_residual = 0.0; // Tr(W) - lambda_max(W)
    int iterations = 0;
    std::vector<double> objective_trace; // Tr(B W^r) - tau^r eta^r
    PscaStatus status = PscaStatus::max_iter;
    std::vector<Eigen::MatrixXcd> iterates; // only if record_iterates
};

struct SubproblemResult {
    Eigen::MatrixXcd w;
    double p_a = 0.0;
    double eta = 0.0;
    double objective = 0.0; // Tr(B W) - tau * eta
};

/// One penalized SDP subproblem: maximize Tr(BW) - tau*eta over W PSD with
/// Tr(AW) <= sigma_w2 * t_star (the covertness radius form), the power and
/// diagonal caps, and the rank-one cut linearized at W_tilde. The returned
/// objective never falls below the objective at W_tilde.
SubproblemResult solve_subproblem(const QuadraticForms& qf, double t_star,
                                  const Eigen::MatrixXcd& w_tilde, double tau,
                                  double p_max, double sigma_w2,
                                  bool unit_amplitudes = false);

/// Rank-one warm start: W0 = p0 * u u^H with Bob-aligned unit-modulus phases
/// and p0 from the conservative covertness radius (feasible by construction).
std::pair<Eigen::MatrixXcd, double>
initial_feasible_point(const QuadraticForms& qf, const covertness::CovertnessBudget& budget,
                       double sigma_w2, double p_max);

PscaResult psca_optimize(const QuadraticForms& qf, const covertness::CovertnessBudget& budget,
                         const PscaConfig& config, double sigma_w2, double sigma_b2,
                         double p_max);

/// Dominant-eigenpair factorization of W; v comes from dividing out the last
/// entry of u = w/sqrt(p_a). Returns (v, Tr(W) - lambda_max).
std::pair<Eigen::VectorXcd, double> extract_rank_one(const Eigen::MatrixXcd& w, double p_a);

/// Rank-relaxed bound: single solve with tau = 0 and no rank cut.
/// Returns Tr(BW)/sigma_b2, an upper bound on any feasible Bob SNR. The
/// relaxed W is written to w_out when given (it is generally not rank-one).
double solve_relaxed_upper_bound(const QuadraticForms& qf,
                                 const covertness::CovertnessBudget& budget, double sigma_w2,
                                 double sigma_b2, double p_max, bool unit_amplitudes = false,
                                 Eigen::MatrixXcd* w_out = nullptr);

} // namespace irscc::psca
