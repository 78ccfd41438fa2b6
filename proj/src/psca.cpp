// SPDX-License-Identifier: Apache-2.0
#include "irscc/psca.hpp"

#include "irscc/errors.hpp"
#include "irscc/numerics.hpp"
#include "irscc/sdp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irscc::psca {

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

// Recover the complex Hermitian matrix whose real embedding best matches a
// (generally unstructured) PSD solver matrix of order 2n.
Eigen::MatrixXcd unembed(const Eigen::MatrixXd& y)
{
    const Eigen::Index n = y.rows() / 2;
    Eigen::MatrixXcd w(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double re = 0.5 * (y(i, j) + y(i + n, j + n));
            const double im = 0.5 * (y(i + n, j) - y(i, j + n));
            w(i, j) = Complex(re, im);
        }
    w = 0.5 * (w + w.adjoint()).eval();
    return w;
}

double trace_real(const Eigen::MatrixXcd& m) { return m.trace().real(); }

double form_value(const Eigen::MatrixXcd& m, const Eigen::MatrixXcd& w)
{
    return (m.cwiseProduct(w.conjugate())).sum().real(); // Tr(M W), both Hermitian
}

double rank_one_slack(const Eigen::MatrixXcd& w, const Eigen::VectorXcd& wmax_vec)
{
    const double quad = (wmax_vec.adjoint() * w * wmax_vec).value().real();
    return std::max(0.0, trace_real(w) - quad);
}

struct ScaledSubproblem {
    sdp::Problem problem;
    double power_scale = 1.0; // W = power_scale * unembed(X)
    double obj_scale = 1.0;   // Tr(BW) - tau*eta = obj_scale * <C, X>
};

// Assemble the real-embedded, O(1)-scaled subproblem. A null rank-cut vector
// means "no cut" (the relaxed bound problem).
ScaledSubproblem assemble(const QuadraticForms& qf, double t_star,
                          const Eigen::VectorXcd* wmax_vec, double tau, double p_max,
                          double sigma_w2, bool unit_amplitudes)
{
    const int nc = qf.num_elements() + 1;
    const int nr = 2 * nc;
    const double beta = std::max(qf.lambda_max_b(), kTiny);
    const double alpha = qf.lambda_max_a();

    ScaledSubproblem out;
    out.power_scale = p_max;
    out.obj_scale = beta * p_max;

    Eigen::MatrixXcd cobj = qf.b_form;
    if (wmax_vec && tau > 0.0) {
        Eigen::MatrixXcd cut = Eigen::MatrixXcd::Identity(nc, nc) - (*wmax_vec) * wmax_vec->adjoint();
        cobj -= tau * cut;
    }
    out.problem.c = numerics::hermitian_real_embedding(cobj / beta) * 0.5;

    struct DiagEntry {
        int k;
        double w;
    };
    auto diag_pair = [nc](int k, double w) {
        return std::vector<DiagEntry>{{k, w}, {k + nc, w}};
    };
    auto make_sparse = [nr](const std::vector<DiagEntry>& entries) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nr, nr);
        for (const auto& e : entries)
            m(e.k, e.k) += e.w;
        return m;
    };

    // covertness row; provably inactive when the scaled rhs exceeds Tr(W/P) <= nc
    if (alpha > 0.0) {
        const double rhs = sigma_w2 * t_star / (alpha * p_max);
        if (rhs <= static_cast<double>(nc) + 1.0) {
            sdp::Constraint c;
            c.a = numerics::hermitian_real_embedding(qf.a_form / alpha) * 0.5;
            c.rhs = rhs;
            c.sense = sdp::Sense::LessEq;
            out.problem.constraints.push_back(std::move(c));
        }
    }

    // element power caps W_nn {<=,=} W_{N+1,N+1}
    for (int k = 0; k + 1 < nc; ++k) {
        auto trips = diag_pair(k, 0.5);
        auto last = diag_pair(nc - 1, -0.5);
        trips.insert(trips.end(), last.begin(), last.end());
        sdp::Constraint c;
        c.a = make_sparse(trips);
        c.rhs = 0.0;
        c.sense = unit_amplitudes ? sdp::Sense::Eq : sdp::Sense::LessEq;
        out.problem.constraints.push_back(std::move(c));
    }

    // P_a <= P_max (scaled to 1)
    {
        sdp::Constraint c;
        c.a = make_sparse(diag_pair(nc - 1, 0.5));
        c.rhs = 1.0;
        c.sense = sdp::Sense::LessEq;
        out.problem.constraints.push_back(std::move(c));
    }
    return out;
}

} // namespace

double QuadraticForms::lambda_max_a() const { return a.squaredNorm() + std::norm(h_aw); }
double QuadraticForms::lambda_max_b() const { return b.squaredNorm() + std::norm(h_ab); }

QuadraticForms build_quadratic_forms(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                     Complex h_ab, Complex h_aw)
{
    if (a.size() != b.size())
        throw std::invalid_argument("build_quadratic_forms: a and b length mismatch");
    const int n = static_cast<int>(a.size());

    QuadraticForms qf;
    qf.a = a;
    qf.b = b;
    qf.h_ab = h_ab;
    qf.h_aw = h_aw;

    // A = abar abar^H with abar = [a; h_aw] so that u^H A u = |v^H a + h_aw|^2
    // for u = [v; 1]; likewise for B.
    Eigen::VectorXcd abar(n + 1), bbar(n + 1);
    abar << a, h_aw;
    bbar << b, h_ab;
    qf.a_form = abar * abar.adjoint();
    qf.b_form = bbar * bbar.adjoint();
    return qf;
}

SubproblemResult solve_subproblem(const QuadraticForms& qf, double t_star,
                                  const Eigen::MatrixXcd& w_tilde, double tau, double p_max,
                                  double sigma_w2, bool unit_amplitudes)
{
    if (t_star < 0.0)
        throw std::domain_error("solve_subproblem: t_star must be >= 0");
    const int nc = qf.num_elements() + 1;

    const numerics::EigPair wt_eig = numerics::max_eigpair(w_tilde);
    const Eigen::VectorXcd wmax = wt_eig.vector;

    ScaledSubproblem sub = assemble(qf, t_star, &wmax, tau, p_max, sigma_w2, unit_amplitudes);
    sdp::Solution sol = sdp::solve(sub.problem);
    if (!sol.usable())
        throw convergence_error("solve_subproblem: interior-point solver did not converge");

    SubproblemResult out;
    out.w = sub.power_scale * unembed(sol.x);
    out.p_a = std::clamp(out.w(nc - 1, nc - 1).real(), 0.0, p_max);
    out.eta = rank_one_slack(out.w, wmax);
    out.objective = form_value(qf.b_form, out.w) - tau * out.eta;

    // warm-start monotone contract: W_tilde itself is feasible
    const double eta_tilde = rank_one_slack(w_tilde, wmax);
    const double obj_tilde = form_value(qf.b_form, w_tilde) - tau * eta_tilde;
    if (out.objective < obj_tilde) {
        out.w = w_tilde;
        out.p_a = std::clamp(w_tilde(nc - 1, nc - 1).real(), 0.0, p_max);
        out.eta = eta_tilde;
        out.objective = obj_tilde;
    }
    return out;
}

std::pair<Eigen::MatrixXcd, double>
initial_feasible_point(const QuadraticForms& qf, const covertness::CovertnessBudget& budget,
                       double sigma_w2, double p_max)
{
    const int n = qf.num_elements();
    Eigen::VectorXcd u(n + 1);
    const double ref = std::arg(qf.h_ab);
    for (int k = 0; k < n; ++k)
        u[k] = std::polar(1.0, std::arg(qf.b[k]) - ref);
    u[n] = 1.0;

    const double uau = (u.adjoint() * qf.a_form * u).value().real();
    double p0 = p_max;
    if (uau > 0.0) {
        const double radius = covertness::conservative_kl_radius(budget);
        p0 = std::min(sigma_w2 * radius / uau, p_max);
    }
    Eigen::MatrixXcd w0 = p0 * u * u.adjoint();
    return {std::move(w0), p0};
}

std::pair<Eigen::VectorXcd, double> extract_rank_one(const Eigen::MatrixXcd& w, double p_a)
{
    const int nc = static_cast<int>(w.rows());
    const numerics::EigPair eig = numerics::max_eigpair(w);
    const double residual = trace_real(w) - eig.value;

    if (p_a <= 0.0)
        return {Eigen::VectorXcd::Zero(nc - 1), residual};

    Eigen::VectorXcd u = std::sqrt(std::max(eig.value, 0.0)) * eig.vector / std::sqrt(p_a);
    Complex t = u[nc - 1];
    if (std::abs(t) < 1e-8)
        t = 1.0; // degenerate last entry; phases already arbitrary
    Eigen::VectorXcd v = u.head(nc - 1) / t;
    return {std::move(v), residual};
}

PscaResult psca_optimize(const QuadraticForms& qf, const covertness::CovertnessBudget& budget,
                         const PscaConfig& config, double sigma_w2, double sigma_b2,
                         double p_max)
{
    budget.validate();
    const int n = qf.num_elements();

    PscaResult res;
    res.design.rho = Eigen::VectorXd::Zero(n);
    res.design.theta = Eigen::VectorXd::Zero(n);

    // no path to Bob at all: the zero design is optimal
    if (qf.lambda_max_b() <= 0.0) {
        res.w_final = Eigen::MatrixXcd::Zero(n + 1, n + 1);
        res.status = PscaStatus::converged;
        return res;
    }

    const double t_star = covertness::kl_radius(budget);
    auto [w_tilde, p_tilde] = initial_feasible_point(qf, budget, sigma_w2, p_max);

    double tau0 = config.tau0;
    if (tau0 <= 0.0)
        tau0 = 1e-3 * trace_real(qf.b_form) * p_max;
    double tau_max = config.tau_max;
    if (tau_max <= 0.0)
        tau_max = 1e6 * tau0;
    double tau = std::min(tau0, tau_max);

    double obj_prev = form_value(qf.b_form, w_tilde);
    double eta_last = 0.0;
    res.status = PscaStatus::max_iter;

    int r = 0;
    for (; r < config.max_outer; ++r) {
        SubproblemResult sub;
        try {
            sub = solve_subproblem(qf, t_star, w_tilde, tau, p_max, sigma_w2,
                                   config.unit_amplitudes);
        } catch (const std::exception&) {
            res.status = PscaStatus::subproblem_failure;
            break;
        }
        w_tilde = sub.w;
        p_tilde = sub.p_a;
        eta_last = sub.eta;
        res.objective_trace.push_back(sub.objective);
        if (config.record_iterates)
            res.iterates.push_back(sub.w);

        const double rel = std::abs(sub.objective - obj_prev) / std::max(std::abs(obj_prev), kTiny);
        const double eta_rel = sub.eta / std::max(trace_real(sub.w), kTiny);
        obj_prev = sub.objective;
        if (rel < config.obj_tol && eta_rel < config.eta_tol) {
            res.status = PscaStatus::converged;
            ++r;
            break;
        }
        tau = std::min(config.c * tau, tau_max);
    }
    res.iterations = r;
    res.w_final = w_tilde;
    res.eta_final = eta_last;

    auto [v, rank_res] = extract_rank_one(w_tilde, p_tilde);
    res.rank_residual = rank_res;

    // modulus clamp; near-rank-one extraction can overshoot by O(eta)
    for (int k = 0; k < n; ++k) {
        const double m = std::abs(v[k]);
        if (m > 1.0)
            v[k] /= m;
    }

    double p_a = p_tilde;
    double gain = scenario::willie_gain(v, qf.a, qf.h_aw);
    // covertness repair: pull the power back to the radius boundary if the
    // extracted rank-one point overshoots the cap
    if (gain > 0.0 && p_a * gain / sigma_w2 > t_star)
        p_a = sigma_w2 * t_star / gain;

    res.design.p_a = p_a;
    for (int k = 0; k < n; ++k) {
        res.design.rho[k] = std::abs(v[k]);
        res.design.theta[k] = wrap_angle(-std::arg(v[k]));
    }
    res.design.bob_snr = scenario::bob_snr(p_a, v, qf.b, qf.h_ab, sigma_b2);
    res.design.willie_gain = gain;
    res.design.kl_value =
        covertness::kl_divergence(p_a, gain, sigma_w2, budget.blocklength);
    return res;
}

double solve_relaxed_upper_bound(const QuadraticForms& qf,
                                 const covertness::CovertnessBudget& budget, double sigma_w2,
                                 double sigma_b2, double p_max, bool unit_amplitudes,
                                 Eigen::MatrixXcd* w_out)
{
    budget.validate();
    if (qf.lambda_max_b() <= 0.0) {
        if (w_out)
            *w_out = Eigen::MatrixXcd::Zero(qf.num_elements() + 1, qf.num_elements() + 1);
        return 0.0;
    }
    const double t_star = covertness::kl_radius(budget);
    ScaledSubproblem sub =
        assemble(qf, t_star, nullptr, 0.0, p_max, sigma_w2, unit_amplitudes);
    sdp::Solution sol = sdp::solve(sub.problem);
    if (!sol.usable())
        throw convergence_error("solve_relaxed_upper_bound: solver did not converge");
    const Eigen::MatrixXcd w = sub.power_scale * unembed(sol.x);
    if (w_out)
        *w_out = w;
    return form_value(qf.b_form, w) / sigma_b2;
}

} // namespace irscc::psca
