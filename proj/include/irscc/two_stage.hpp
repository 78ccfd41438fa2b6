// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irscc/covertness.hpp"
#include "irscc/psca.hpp"
#include "irscc/scenario.hpp"

#include <Eigen/Dense>
#include <complex>

namespace irscc::two_stage {

using Complex = std::complex<double>;

struct TwoStageConfig {
    int max_iter = 5000; // phase updates are O(N); convergence is linear
    double u_tol = 1e-6; // relative change of the true energy ratio
};

/// Perfect covertness (zero KL at nonzero power) is feasible iff
/// sum_n |a_n| >= |h_aw|; the reflected path can then cancel the direct one.
bool perfect_covertness_feasible(const Eigen::VectorXcd& a, Complex h_aw);

/// Closed-form zero-forcing design: kappa = sum|a_n| / |h_aw|,
/// v_n = (1/kappa) e^{j(arg a_n - pi - arg h_aw)}, p_a = p_max.
/// Bob-side metrics are not part of this construction and are left zero.
scenario::ReflectDesign perfect_covertness_design(const Eigen::VectorXcd& a, Complex h_aw,
                                                  double p_max);

/// Ascent direction of the energy-ratio surrogate at u_tilde:
/// f = (B/(u~^H A u~) - (A - lmax(A) I) (u~^H B u~)/(u~^H A u~)^2) u~.
Eigen::VectorXcd sca_direction(const Eigen::VectorXcd& u_tilde, const psca::QuadraticForms& qf);

/// Stage 1 iterates u <- e^{j arg f} until the true ratio u^H B u / u^H A u
/// stalls; stage 2 sets the transmit power from the conservative radius.
scenario::ReflectDesign two_stage_optimize(const psca::QuadraticForms& qf,
                                           const covertness::CovertnessBudget& budget,
                                           const TwoStageConfig& config, double sigma_w2,
                                           double sigma_b2, double p_max);

/// min{ sigma_w2 (eps^2 + sqrt(eps^4 + 2 eps^2 L)) / (L u^H A u), p_max };
/// p_max when u^H A u = 0 (covertness is free).
double conservative_power(const Eigen::VectorXcd& u, const Eigen::MatrixXcd& a_form,
                          const covertness::CovertnessBudget& budget, double sigma_w2,
                          double p_max);

/// Power-only benchmark: no IRS, p_a = min{sigma_w2 t*/|h_aw|^2, p_max}.
scenario::ReflectDesign baseline_no_irs(Complex h_ab, Complex h_aw,
                                        const covertness::CovertnessBudget& budget,
                                        double sigma_w2, double sigma_b2, double p_max,
                                        int num_elements = 0);

} // namespace irscc::two_stage
