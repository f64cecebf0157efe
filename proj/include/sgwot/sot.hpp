#pragma once

#include "sgwot/types.hpp"

#include <vector>

namespace sgwot {

/// Cost matrix whose infinite entries are carried as an explicit pattern;
/// the stored values are the finite part.
struct CostMatrix {
    Matrix c;             // finite entries; blocked positions hold 0
    ZeroPattern pattern;  // positions of the infinite entries

    /// All-one cost with the given blocked positions.
    static CostMatrix all_ones(Index rows, Index cols, ZeroPattern pattern);
    /// Splits a dense matrix with +inf entries into finite part and pattern.
    static CostMatrix from_dense(const Matrix& c_with_inf);

    Index rows() const { return c.rows(); }
    Index cols() const { return c.cols(); }
    /// -c/eps with -inf at blocked entries.
    Matrix log_kernel(double eps) const;
    void validate() const;
};

/// Log-domain scaling potentials.
struct DualPotentials {
    Vector f;
    Vector g;
};

struct SotTrace {
    std::vector<double> dual_change;  // sup-norm change of (f, g) per sweep
    bool converged = false;
    bool no_feasible_entries = false;  // every entry excluded: zero plan returned
    int iterations = 0;
};

struct SotResult {
    Coupling coupling;
    DualPotentials potentials;
    SotTrace trace;
};

/// Scaling iteration on a log-kernel (-inf marks excluded entries). Solves
///   min_P  eps*KL(P|K) + cap*(|a - P1|_1 + |b - P^T 1|_1)
/// over P1 <= a, P^T 1 <= b, P >= 0, P = 0 on excluded entries.
/// cap = +inf drops the penalty and balances marginals exactly (requires
/// equal totals to converge). An optional log_plan output receives log P.
SotResult solve_sot_log_kernel(const Matrix& log_kernel, const Marginal& a, const Marginal& b,
                               double eps, double cap, double tol, int max_iter,
                               const DualPotentials* warm_start = nullptr,
                               Matrix* log_plan = nullptr);

/// Entropic supervised OT with l1 marginal penalties weighted by params.gamma.
SotResult solve_sot(const CostMatrix& cost, const Marginal& a, const Marginal& b,
                    const SolverParams& params);

/// <P, C> over finite entries plus gamma * (|a - P1|_1 + |b - P^T 1|_1).
/// Throws if the plan is nonzero on a blocked entry.
double sot_objective(const Coupling& c, const CostMatrix& cost, const Marginal& a,
                     const Marginal& b, const SolverParams& params);

}  // namespace sgwot
