// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <utility>

namespace irscc::scenario {

using Complex = std::complex<double>;

// ---- unit helpers (config speaks dBm/dB, everything internal is linear) ----
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double linear);

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};
double distance(const Vec3& p, const Vec3& q);

/// System-wide constants, all in linear units (watts / ratios).
struct SystemParams {
    double p_max = 0.0;      // transmit power budget [W]
    int blocklength = 1;     // channel uses L
    double sigma_b2 = 0.0;   // Bob noise power [W]
    double sigma_w2 = 0.0;   // Willie noise power [W]
    double epsilon = 0.1;    // covertness level, in (0, 1]
    int n_x = 1;             // IRS elements along x
    int n_z = 1;             // IRS elements along z
    double rician_k = 0.0;   // Alice-IRS Rician factor (linear)
    double beta0 = 1e-3;     // reference path gain at 1 m (linear)

    int num_elements() const { return n_x * n_z; }
    void validate() const;
};

struct Geometry {
    Vec3 alice, irs, bob, willie;
    double alpha_ar = 2.4;
    double alpha_ab = 4.2;
    double alpha_aw = 4.2;
    double alpha_rb = 3.0;
    double alpha_rw = 3.0;
};

struct PathGains {
    double chi_ar = 0.0;
    double chi_ab = 0.0;
    double chi_aw = 0.0;
    double chi_rb = 0.0;
    double chi_rw = 0.0;
};

/// One realization of all five channels, large-scale gain included.
struct ChannelSet {
    Eigen::VectorXcd h_ar; // Alice -> IRS
    Eigen::VectorXcd h_rb; // IRS -> Bob (stored as column; channel is its adjoint)
    Eigen::VectorXcd h_rw; // IRS -> Willie
    Complex h_ab{};        // Alice -> Bob
    Complex h_aw{};        // Alice -> Willie

    int num_elements() const { return static_cast<int>(h_ar.size()); }
};

/// A design outcome: transmit power plus per-element reflection coefficients
/// and the achieved link metrics. For the no-CSI designs willie_gain holds
/// the expected channel power gain at Willie and kl_value the expected KL.
struct ReflectDesign {
    double p_a = 0.0;
    Eigen::VectorXd rho;   // amplitudes in [0, 1]
    Eigen::VectorXd theta; // phase shifts in [0, 2*pi)
    double bob_snr = 0.0;     // linear
    double willie_gain = 0.0; // linear power gain
    double kl_value = 0.0;    // nats
};

/// beta0 * (d / 1 m)^(-alpha); d must be positive.
double path_loss(double d, double alpha, double beta0);

PathGains path_gains(const Geometry& geometry, double beta0);

/// Draw one channel realization. Rayleigh on every link except Alice-IRS,
/// which is Rician with a deterministic half-wavelength URA steering LOS
/// component aimed along the IRS->Alice direction. Each channel uses its own
/// counter-derived substream of `seed`, so h_ar draws are prefix-stable when
/// only N changes. Deterministic for identical (geometry, params, seed).
ChannelSet sample_channels(const Geometry& geometry, const SystemParams& params,
                           std::uint64_t seed);

/// Cascade vectors a_n = conj(h_rw_n) h_ar_n and b_n = conj(h_rb_n) h_ar_n.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> cascade_vectors(const ChannelSet& ch);

/// v_n = rho_n * exp(-i theta_n)
Eigen::VectorXcd reflect_vector(const Eigen::VectorXd& rho, const Eigen::VectorXd& theta);

/// (p_a / sigma_b2) * |v^H b + h_ab|^2
double bob_snr(double p_a, const Eigen::VectorXcd& v, const Eigen::VectorXcd& b,
               Complex h_ab, double sigma_b2);

/// |v^H a + h_aw|^2
double willie_gain(const Eigen::VectorXcd& v, const Eigen::VectorXcd& a, Complex h_aw);

/// Deterministic 64-bit mix used to derive per-trial / per-channel substreams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

} // namespace irscc::scenario
