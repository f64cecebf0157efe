#pragma once

#include "sgwot/conflict.hpp"
#include "sgwot/sot.hpp"
#include "sgwot/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sgwot {

struct GwProblem {
    DistanceMatrix d1;
    DistanceMatrix d2;
    Marginal a;
    Marginal b;
    double rho = 1.0;

    GwProblem(DistanceMatrix d1_, DistanceMatrix d2_, Marginal a_, Marginal b_, double rho_);
    GwProblem(DistanceMatrix d1_, DistanceMatrix d2_, double rho_);  // uniform marginals
};

/// Largest distance difference between the two spaces; above it the
/// threshold constrains nothing.
double rho_max(const GwProblem& prob);

/// (M o P)_ij = sum_kl (d1_ik - d2_jl)^2 p_kl via the three-term expansion
///   D1^2 (P 1) (+) D2^2 (P^T 1) - 2 D1 P D2^T.
Matrix apply_cost_tensor(const GwProblem& prob, const Matrix& p);

/// (quadratic part, penalized total). The quadratic part is 1/2 <M o P, P>,
/// which equals the finite-entry sum whenever the pattern covers the conflict
/// edges. Throws if p is nonzero on the pattern.
std::pair<double, double> sgw_objective(const GwProblem& prob, const Coupling& c,
                                        const ZeroPattern& pattern, const SolverParams& params);

/// Elementwise log of the proximal kernel
///   Q = exp(-dt/(1+eps dt) * mop + 1/(1+eps dt) * log p);
/// -inf entries of log_p stay -inf. dt may be +inf.
Matrix mirrorc_log_kernel(const Matrix& mop, const Matrix& log_p, double eps, double dt);

/// Plain mirror variant W = exp(-dt' * mop + (1 - eps dt') * log p);
/// at eps*dt' == 1 the log p term drops and W = exp(-mop/eps) exactly.
Matrix mirror_log_kernel(const Matrix& mop, const Matrix& log_p, double eps, double dt_prime);

struct Kernel {
    Matrix log_values;

    Matrix values() const;  // exp, with exact zeros at -inf
};

/// Proximal kernel for one step from coupling c. Requires p > 0 off-pattern
/// and p = 0 on-pattern.
Kernel mirrorc_kernel(const GwProblem& prob, const Coupling& c, const ZeroPattern& pattern,
                      const SolverParams& params);

struct StepBound {
    double dt_max;
    double eta_max;
};

/// Step bound 1/(N*L) with L = n*m*max(D)^2 and N = min(max a, max b);
/// below it the outer objective is guaranteed non-increasing.
StepBound max_step_size(const GwProblem& prob, double eps);

struct SgwResult {
    Coupling coupling;
    ZeroPattern pattern;
    std::vector<double> quadratic_trace;
    std::vector<double> penalized_trace;
    std::vector<double> entropic_trace;  // penalized plus the entropy term
    std::vector<double> mass_trace;
    bool converged = false;
    int outer_iters = 0;
    std::vector<std::pair<std::size_t, double>> cover_size_mass;
    double cover_mass = 0.0;
    std::vector<std::string> warnings;
};

/// Full solve: select a zero pattern from the conflict graph, then iterate
/// proximal kernel + scaling steps from P0 = a (x) b.
SgwResult solve_sgw(const GwProblem& prob, const SolverParams& params);

/// Same outer loop with a caller-provided pattern.
SgwResult solve_sgw_with_pattern(const GwProblem& prob, const ZeroPattern& pattern,
                                 const SolverParams& params);

/// Entropic GW baseline: empty pattern, kernel exp(-mop/eps), and exact
/// marginal balancing. Requires equal marginal totals.
SgwResult solve_entropic_gw(const GwProblem& prob, const SolverParams& params);

}  // namespace sgwot
