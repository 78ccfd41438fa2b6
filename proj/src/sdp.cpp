// SPDX-License-Identifier: Apache-2.0
#include "irscc/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace irscc::sdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SparseEntry {
    int row, col;
    double value;
};

// Constraint matrix with a fast path for the (very common here) case of a
// handful of nonzero entries: diagonal caps, element-power rows.
struct ConData {
    bool is_sparse = false;
    std::vector<SparseEntry> entries; // upper triangle + diagonal
    Eigen::MatrixXd dense;
    double rhs = 0.0;
    bool inequality = true;
    double norm = 1.0;

    double dot(const Eigen::MatrixXd& m) const
    {
        if (!is_sparse)
            return dense.cwiseProduct(m).sum();
        double acc = 0.0;
        for (const auto& e : entries)
            acc += e.value * (e.row == e.col ? m(e.row, e.col)
                                             : m(e.row, e.col) + m(e.col, e.row));
        return acc;
    }

    void add_scaled(Eigen::MatrixXd& m, double w) const
    {
        if (!is_sparse) {
            m.noalias() += w * dense;
            return;
        }
        for (const auto& e : entries) {
            m(e.row, e.col) += w * e.value;
            if (e.row != e.col)
                m(e.col, e.row) += w * e.value;
        }
    }
};

ConData make_con(const Constraint& c)
{
    ConData out;
    Eigen::MatrixXd a = 0.5 * (c.a + c.a.transpose());
    out.rhs = c.rhs;
    out.inequality = (c.sense == Sense::LessEq);
    out.norm = std::max(1e-300, a.norm());

    int nnz = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i; j < a.cols(); ++j)
            if (a(i, j) != 0.0)
                ++nnz;
    if (nnz <= 8) {
        out.is_sparse = true;
        out.entries.reserve(nnz);
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = i; j < a.cols(); ++j)
                if (a(i, j) != 0.0)
                    out.entries.push_back({static_cast<int>(i), static_cast<int>(j), a(i, j)});
    } else {
        out.dense = std::move(a);
    }
    return out;
}

// Largest step alpha with M + alpha*D still PSD (M symmetric PD).
double psd_boundary(const Eigen::MatrixXd& m, const Eigen::MatrixXd& d)
{
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    Eigen::MatrixXd g;
    if (llt.info() == Eigen::Success) {
        const auto& l = llt.matrixL();
        g = l.solve(d);
        g = l.solve(g.transpose()).eval();
    } else {
        // near-singular iterate: fall back to an eigenvalue-clamped factor
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        const double floor = std::max(1e-14 * std::abs(es.eigenvalues().maxCoeff()), 1e-300);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
        Eigen::MatrixXd li = es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal();
        g = li.transpose() * d * li;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-300)
        return kInf;
    return -1.0 / lmin;
}

} // namespace

Solution solve(const Problem& problem, const Options& opt)
{
    const int n = static_cast<int>(problem.c.rows());
    const int m = static_cast<int>(problem.constraints.size());
    if (n == 0 || problem.c.cols() != n)
        throw std::invalid_argument("sdp::solve: objective matrix must be square");

    const Eigen::MatrixXd c = 0.5 * (problem.c + problem.c.transpose());
    std::vector<ConData> cons;
    cons.reserve(m);
    int m_ineq = 0;
    for (const auto& con : problem.constraints) {
        if (con.a.rows() != n || con.a.cols() != n)
            throw std::invalid_argument("sdp::solve: constraint order mismatch");
        cons.push_back(make_con(con));
        if (cons.back().inequality)
            ++m_ineq;
    }

    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i)
        b[i] = cons[i].rhs;
    const double bmax = m > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
    const double cnorm = c.norm();

    // SDPT3-style initial scalings
    double xi = std::max(10.0, std::sqrt(static_cast<double>(n)));
    double eta = xi;
    for (int i = 0; i < m; ++i)
        xi = std::max(xi, static_cast<double>(n) * (1.0 + std::abs(b[i])) / (1.0 + cons[i].norm));
    eta = std::max(eta, (1.0 + cnorm) / std::sqrt(static_cast<double>(n)));

    Eigen::MatrixXd x = xi * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd z = eta * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m); // slacks for inequality rows
    for (int i = 0; i < m; ++i)
        if (cons[i].inequality) {
            s[i] = xi;
            y[i] = eta;
        }

    Solution sol;
    sol.status = Status::max_iter;

    const int dof = n + m_ineq;
    Eigen::VectorXd rp(m);
    Eigen::MatrixXd rd(n, n);

    auto compute_residuals = [&]() {
        rd = c + z;
        for (int i = 0; i < m; ++i) {
            rp[i] = b[i] - cons[i].dot(x) - (cons[i].inequality ? s[i] : 0.0);
            cons[i].add_scaled(rd, -y[i]);
        }
    };

    int it = 0;
    for (; it < opt.max_iter; ++it) {
        compute_residuals();
        const double mu = (x.cwiseProduct(z).sum() + s.dot(y)) / dof;
        const double pobj = c.cwiseProduct(x).sum();
        const double dobj = b.dot(y);

        sol.primal_infeas = (m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0) / (1.0 + bmax);
        sol.dual_infeas = rd.norm() / (1.0 + cnorm);
        sol.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (sol.primal_infeas < opt.tol_feas && sol.dual_infeas < opt.tol_feas &&
            sol.gap < opt.tol_gap) {
            sol.status = Status::optimal;
            break;
        }

        Eigen::LLT<Eigen::MatrixXd> zllt(z);
        if (zllt.info() != Eigen::Success)
            break;
        Eigen::MatrixXd zi = zllt.solve(Eigen::MatrixXd::Identity(n, n));
        zi = 0.5 * (zi + zi.transpose()).eval();

        // Schur complement M(i,j) = Tr(A_i X A_j Z^-1) + diag(s/y) on inequality rows
        Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
        {
            // dense rows first: V_i = Zi A_i X lets sparse columns read entries off V_i
            std::vector<Eigen::MatrixXd> v_dense(m);
            for (int i = 0; i < m; ++i)
                if (!cons[i].is_sparse)
                    v_dense[i] = zi * cons[i].dense * x;
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j <= i; ++j) {
                    double val;
                    const ConData& ci = cons[i];
                    const ConData& cj = cons[j];
                    if (!ci.is_sparse) {
                        // Tr(A_j X A_i Zi) = <A_j, (Zi A_i X)^T> = sum A_j .* V_i^T
                        val = cj.dot(v_dense[i].transpose());
                    } else if (!cj.is_sparse) {
                        val = ci.dot(v_dense[j].transpose());
                    } else {
                        // Tr(A_i X A_j Zi) over sparse entry pairs
                        val = 0.0;
                        for (const auto& ei : ci.entries)
                            for (const auto& ej : cj.entries) {
                                val += ei.value * ej.value *
                                       (x(ei.col, ej.row) * zi(ej.col, ei.row) +
                                        (ej.row != ej.col
                                             ? x(ei.col, ej.col) * zi(ej.row, ei.row)
                                             : 0.0));
                                if (ei.row != ei.col)
                                    val += ei.value * ej.value *
                                           (x(ei.row, ej.row) * zi(ej.col, ei.col) +
                                            (ej.row != ej.col
                                                 ? x(ei.row, ej.col) * zi(ej.row, ei.col)
                                                 : 0.0));
                            }
                    }
                    schur(i, j) = val;
                    schur(j, i) = val;
                }
                if (cons[i].inequality)
                    schur(i, i) += s[i] / y[i];
            }
        }

        Eigen::LDLT<Eigen::MatrixXd> mldlt(schur);
        if (mldlt.info() != Eigen::Success) {
            schur.diagonal().array() += 1e-12 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
            mldlt.compute(schur);
            if (mldlt.info() != Eigen::Success)
                break;
        }

        auto solve_direction = [&](double sigma_mu, const Eigen::MatrixXd* xi_corr,
                                   const Eigen::VectorXd* lp_corr, Eigen::MatrixXd& dx,
                                   Eigen::VectorXd& dy, Eigen::MatrixXd& dz,
                                   Eigen::VectorXd& ds) {
            Eigen::MatrixXd k = x * rd;
            if (xi_corr)
                k -= *xi_corr;
            k = (k * zi).eval();
            Eigen::MatrixXd ksym = 0.5 * (k + k.transpose());

            Eigen::VectorXd h(m);
            for (int i = 0; i < m; ++i) {
                h[i] = sigma_mu * cons[i].dot(zi) - cons[i].dot(x) + cons[i].dot(ksym) - rp[i];
                if (cons[i].inequality)
                    h[i] += (sigma_mu - (lp_corr ? (*lp_corr)[i] : 0.0)) / y[i] - s[i];
            }
            dy = mldlt.solve(h);

            dz = -rd;
            for (int i = 0; i < m; ++i)
                cons[i].add_scaled(dz, dy[i]);

            Eigen::MatrixXd t = x * dz;
            if (xi_corr)
                t += *xi_corr;
            t = (t * zi).eval();
            dx = sigma_mu * zi - x - 0.5 * (t + t.transpose());

            ds = Eigen::VectorXd::Zero(m);
            for (int i = 0; i < m; ++i)
                if (cons[i].inequality)
                    ds[i] = (sigma_mu - (lp_corr ? (*lp_corr)[i] : 0.0)) / y[i] - s[i] -
                            (s[i] / y[i]) * dy[i];
        };

        auto step_bounds = [&](const Eigen::MatrixXd& dx, const Eigen::VectorXd& ds,
                               const Eigen::MatrixXd& dz, const Eigen::VectorXd& dy) {
            double ap = psd_boundary(x, dx);
            double ad = psd_boundary(z, dz);
            for (int i = 0; i < m; ++i)
                if (cons[i].inequality) {
                    if (ds[i] < 0.0)
                        ap = std::min(ap, -s[i] / ds[i]);
                    if (dy[i] < 0.0)
                        ad = std::min(ad, -y[i] / dy[i]);
                }
            return std::make_pair(ap, ad);
        };

        // predictor
        Eigen::MatrixXd dxa, dza;
        Eigen::VectorXd dya, dsa;
        solve_direction(0.0, nullptr, nullptr, dxa, dya, dza, dsa);
        auto [apa, ada] = step_bounds(dxa, dsa, dza, dya);
        const double aap = std::min(1.0, apa);
        const double aad = std::min(1.0, ada);

        double mu_aff = ((x + aap * dxa).cwiseProduct(z + aad * dza).sum() +
                         (s + aap * dsa).dot(y + aad * dya)) /
                        dof;
        mu_aff = std::max(mu_aff, 0.0);
        double sigma = std::pow(mu_aff / mu, 3.0);
        sigma = std::clamp(sigma, 1e-8, 1.0);

        // corrector
        Eigen::MatrixXd xi_corr = dxa * dza;
        Eigen::VectorXd lp_corr = dsa.cwiseProduct(dya);
        Eigen::MatrixXd dx, dz;
        Eigen::VectorXd dy, ds;
        solve_direction(sigma * mu, &xi_corr, &lp_corr, dx, dy, dz, ds);

        auto [ap, ad] = step_bounds(dx, ds, dz, dy);
        const double gamma = 0.99;
        const double alpha_p = std::min(1.0, gamma * ap);
        const double alpha_d = std::min(1.0, gamma * ad);

        Eigen::MatrixXd x_next = x + alpha_p * dx;
        Eigen::MatrixXd z_next = z + alpha_d * dz;
        if (!x_next.allFinite() || !z_next.allFinite())
            break;
        x = 0.5 * (x_next + x_next.transpose());
        z = 0.5 * (z_next + z_next.transpose());
        s += alpha_p * ds;
        y += alpha_d * dy;
        for (int i = 0; i < m; ++i)
            if (cons[i].inequality) {
                s[i] = std::max(s[i], 1e-300);
                y[i] = std::max(y[i], 1e-300);
            }

        if (mu < 1e-16 && sol.primal_infeas < 1e-6 && sol.dual_infeas < 1e-6)
            break; // complementarity exhausted; classify below
    }

    compute_residuals();
    const double pobj = c.cwiseProduct(x).sum();
    const double dobj = b.dot(y);
    sol.primal_infeas = (m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0) / (1.0 + bmax);
    sol.dual_infeas = rd.norm() / (1.0 + cnorm);
    sol.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    sol.x = x;
    sol.y = y;
    sol.objective = pobj;
    sol.iterations = it;

    if (sol.status != Status::optimal) {
        if (sol.primal_infeas < 1e-7 && sol.dual_infeas < 1e-7 && sol.gap < 1e-6)
            sol.status = Status::near_optimal;
        else if (it >= opt.max_iter)
            sol.status = Status::max_iter;
        else
            sol.status = Status::failed;
    }
    return sol;
}

} // namespace irscc::sdp
