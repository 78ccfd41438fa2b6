// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irscc/scenario.hpp"

#include <Eigen/Dense>
#include <complex>

namespace irscc::no_csi {

using Complex = std::complex<double>;

/// Everything the statistical-CSI designs need: Bob-side instantaneous
/// channels, Willie-side statistics (chi_rw, chi_aw) and the covertness
/// constant eps_bar so that (p_a/sigma_w2) * delta <= eps_bar with
/// delta = chi_rw * sum rho_n^2 |h_ar_n|^2 + chi_aw.
struct NoCsiInstance {
    Eigen::VectorXcd h_ar;
    Eigen::VectorXcd b;
    Complex h_ab{};
    double chi_rw = 0.0;
    double chi_aw = 0.0;
    double eps_bar = 0.0;
    double sigma_w2 = 0.0;
    double sigma_b2 = 0.0;
    double p_max = 0.0;
    int blocklength = 100;

    int num_elements() const { return static_cast<int>(h_ar.size()); }
    void validate() const;
};

/// theta_n = arg(h_ab) - arg(b_n), wrapped to [0, 2*pi); makes the composite
/// coefficient coherent: |sum rho_n |b_n| e^{j(theta_n+arg b_n)} + h_ab| =
/// sum rho_n |b_n| + |h_ab| for any rho.
Eigen::VectorXd optimal_phases(const Eigen::VectorXcd& b, Complex h_ab);

/// rho_n = 1 regime: p_a = min{eps_bar sigma_w2 / (chi_rw ||h_ar||^2 + chi_aw), p_max}
double power_unit_amplitude(const NoCsiInstance& inst);

struct CommonAmplitudeResult {
    double rho0 = 0.0;
    double p_a = 0.0;
    double snr = 0.0; // linear, Bob
};

/// rho_n = rho0 regime: boundary / stationary-point case analysis with the
/// covertness constraint tight whenever the power cap is slack.
CommonAmplitudeResult common_amplitude_design(const NoCsiInstance& inst);

struct PerElementResult {
    Eigen::VectorXd rho;
    double p_a = 0.0;
    double snr = 0.0;
};

/// 0 <= rho_n <= 1 regime, solved through the convex substitution
/// rhobar = sqrt(p_a) rho: closed-form clamp structure in rhobar at fixed
/// p_a (multiplier by bisection) under an outer scan + golden-section on p_a.
PerElementResult per_element_design(const NoCsiInstance& inst);

struct NoCsiSuite {
    scenario::ReflectDesign unit;
    scenario::ReflectDesign common;
    scenario::ReflectDesign per_element;
};

/// All three amplitude regimes with optimal phases applied; kl_value holds
/// the expected KL and willie_gain the expected gain delta of each design.
NoCsiSuite no_csi_suite(const NoCsiInstance& inst);

} // namespace irscc::no_csi
