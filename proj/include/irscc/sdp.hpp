// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace irscc::sdp {

enum class Sense { LessEq, Eq };

struct Constraint {
    Eigen::MatrixXd a; // symmetric
    double rhs = 0.0;
    Sense sense = Sense::LessEq;
};

/// maximize <C, X>  s.t.  <A_i, X> {<=,=} b_i,  X PSD (real symmetric order n)
struct Problem {
    Eigen::MatrixXd c;
    std::vector<Constraint> constraints;
};

struct Options {
    double tol_gap = 1e-9;   // relative duality gap
    double tol_feas = 1e-9;  // relative primal/dual infeasibility
    int max_iter = 120;
    bool verbose = false;
};

enum class Status { optimal, near_optimal, max_iter, failed };

struct Solution {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    double objective = 0.0;
    double gap = 0.0;
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
    int iterations = 0;
    Status status = Status::failed;

    bool usable() const { return status == Status::optimal || status == Status::near_optimal; }
};

/// Infeasible-start primal-dual interior point method (HKM direction with a
/// Mehrotra predictor-corrector) for small dense problems. Inequalities get
/// scalar slacks handled as a diagonal barrier block.
Solution solve(const Problem& problem, const Options& options = {});

} // namespace irscc::sdp
