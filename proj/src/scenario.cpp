// SPDX-License-Identifier: Apache-2.0
#include "irscc/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace irscc::scenario {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

double distance(const Vec3& p, const Vec3& q)
{
    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void SystemParams::validate() const
{
    if (!(p_max > 0.0) || !(sigma_b2 > 0.0) || !(sigma_w2 > 0.0) || !(beta0 > 0.0))
        throw std::invalid_argument("SystemParams: powers and beta0 must be positive");
    if (blocklength < 1)
        throw std::invalid_argument("SystemParams: blocklength must be >= 1");
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::invalid_argument("SystemParams: epsilon must be in (0, 1]");
    if (n_x < 1 || n_z < 1)
        throw std::invalid_argument("SystemParams: n_x and n_z must be >= 1");
    if (rician_k < 0.0)
        throw std::invalid_argument("SystemParams: rician_k must be >= 0");
}

double path_loss(double d, double alpha, double beta0)
{
    if (!(d > 0.0))
        throw std::domain_error("path_loss: requires d > 0");
    return beta0 * std::pow(d, -alpha);
}

PathGains path_gains(const Geometry& g, double beta0)
{
    PathGains out;
    out.chi_ar = path_loss(distance(g.alice, g.irs), g.alpha_ar, beta0);
    out.chi_ab = path_loss(distance(g.alice, g.bob), g.alpha_ab, beta0);
    out.chi_aw = path_loss(distance(g.alice, g.willie), g.alpha_aw, beta0);
    out.chi_rb = path_loss(distance(g.irs, g.bob), g.alpha_rb, beta0);
    out.chi_rw = path_loss(distance(g.irs, g.willie), g.alpha_rw, beta0);
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& s)
{
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// substream tags, one per channel
enum : std::uint64_t { kTagArNlos = 0x11, kTagRb = 0x22, kTagRw = 0x33, kTagAb = 0x44, kTagAw = 0x55 };

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t tag)
{
    std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (tag + 1));
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

// CN(0, variance): two independent real normals scaled by sqrt(variance/2)
Eigen::VectorXcd cgauss_vector(std::mt19937_64& eng, int n, double variance)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) {
        const double re = normal(eng);
        const double im = normal(eng);
        v[i] = Complex(s * re, s * im);
    }
    return v;
}

// Half-wavelength URA steering vector for the IRS aperture (n_x along x,
// n_z along z), pointed from the IRS toward Alice. Element n = iz*n_x + ix.
Eigen::VectorXcd ura_steering(const Geometry& g, int n_x, int n_z)
{
    const double dx = g.alice.x - g.irs.x;
    const double dy = g.alice.y - g.irs.y;
    const double dz = g.alice.z - g.irs.z;
    const double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double kx = dx / norm;
    const double kz = dz / norm;
    Eigen::VectorXcd v(n_x * n_z);
    for (int iz = 0; iz < n_z; ++iz)
        for (int ix = 0; ix < n_x; ++ix) {
            const double phase = std::numbers::pi * (ix * kx + iz * kz);
            v[iz * n_x + ix] = std::polar(1.0, phase);
        }
    return v;
}

} // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt)
{
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 0x51ed2701));
    return splitmix64(s);
}

ChannelSet sample_channels(const Geometry& geometry, const SystemParams& params,
                           std::uint64_t seed)
{
    params.validate();
    const PathGains chi = path_gains(geometry, params.beta0);
    const int n = params.num_elements();

    ChannelSet ch;
    {
        auto eng = make_engine(seed, kTagArNlos);
        const Eigen::VectorXcd nlos = cgauss_vector(eng, n, 1.0);
        const Eigen::VectorXcd los = ura_steering(geometry, params.n_x, params.n_z);
        const double k = params.rician_k;
        const double w_los = std::sqrt(k / (k + 1.0));
        const double w_nlos = std::sqrt(1.0 / (k + 1.0));
        ch.h_ar = std::sqrt(chi.chi_ar) * (w_los * los + w_nlos * nlos);
    }
    {
        auto eng = make_engine(seed, kTagRb);
        ch.h_rb = cgauss_vector(eng, n, chi.chi_rb);
    }
    {
        auto eng = make_engine(seed, kTagRw);
        ch.h_rw = cgauss_vector(eng, n, chi.chi_rw);
    }
    {
        auto eng = make_engine(seed, kTagAb);
        ch.h_ab = cgauss_vector(eng, 1, chi.chi_ab)[0];
    }
    {
        auto eng = make_engine(seed, kTagAw);
        ch.h_aw = cgauss_vector(eng, 1, chi.chi_aw)[0];
    }
    return ch;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> cascade_vectors(const ChannelSet& ch)
{
    Eigen::VectorXcd a = ch.h_rw.conjugate().cwiseProduct(ch.h_ar);
    Eigen::VectorXcd b = ch.h_rb.conjugate().cwiseProduct(ch.h_ar);
    return {std::move(a), std::move(b)};
}

Eigen::VectorXcd reflect_vector(const Eigen::VectorXd& rho, const Eigen::VectorXd& theta)
{
    if (rho.size() != theta.size())
        throw std::invalid_argument("reflect_vector: rho/theta length mismatch");
    Eigen::VectorXcd v(rho.size());
    for (Eigen::Index i = 0; i < rho.size(); ++i)
        v[i] = std::polar(rho[i], -theta[i]);
    return v;
}

double bob_snr(double p_a, const Eigen::VectorXcd& v, const Eigen::VectorXcd& b,
               Complex h_ab, double sigma_b2)
{
    const Complex coeff = v.dot(b) + h_ab; // v.dot(b) = v^H b
    return p_a / sigma_b2 * std::norm(coeff);
}

double willie_gain(const Eigen::VectorXcd& v, const Eigen::VectorXcd& a, Complex h_aw)
{
    return std::norm(v.dot(a) + h_aw);
}

} // namespace irscc::scenario
