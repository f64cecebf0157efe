#include "sgwot/sgw.hpp"

#include <cmath>
#include <stdexcept>

namespace sgwot {

GwProblem::GwProblem(DistanceMatrix d1_, DistanceMatrix d2_, Marginal a_, Marginal b_, double rho_)
    : d1(std::move(d1_)), d2(std::move(d2_)), a(std::move(a_)), b(std::move(b_)), rho(rho_) {
    if (a.size() != d1.size() || b.size() != d2.size()) {
        throw std::invalid_argument("marginal sizes do not match the distance matrices");
    }
    a.validate();
    b.validate();
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
}

GwProblem::GwProblem(DistanceMatrix d1_, DistanceMatrix d2_, double rho_)
    : d1(std::move(d1_)),
      d2(std::move(d2_)),
      a(Marginal::uniform(d1.size())),
      b(Marginal::uniform(d2.size())),
      rho(rho_) {
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
}

double rho_max(const GwProblem& prob) {
    // diagonals are zero, so the extreme difference is against zero
    return std::max(prob.d1.max(), prob.d2.max());
}

Matrix apply_cost_tensor(const GwProblem& prob, const Matrix& p) {
    const Index n = prob.d1.size();
    const Index m = prob.d2.size();
    if (p.rows() != n || p.cols() != m) {
        throw std::invalid_argument("plan dimensions do not match the problem");
    }
    const Vector row_mass = p.rowwise().sum();
    const Vector col_mass = p.colwise().sum().transpose();
    const Vector t1 = prob.d1.values().array().square().matrix() * row_mass;
    const Vector t2 = prob.d2.values().array().square().matrix() * col_mass;
    Matrix mop = -2.0 * (prob.d1.values() * p * prob.d2.values().transpose());
    mop.colwise() += t1;
    mop.rowwise() += t2.transpose();
    return mop;
}

std::pair<double, double> sgw_objective(const GwProblem& prob, const Coupling& c,
                                        const ZeroPattern& pattern, const SolverParams& params) {
    if (pattern.rows() != c.rows() || pattern.cols() != c.cols()) {
        throw std::invalid_argument("pattern dimensions do not match the coupling");
    }
    for (const auto& [i, j] : pattern.entries()) {
        if (c.p(i, j) != 0.0) {
            throw std::invalid_argument("plan is nonzero on a blocked entry");
        }
    }
    const Matrix mop = apply_cost_tensor(prob, c.p);
    const double quadratic = 0.5 * (mop.array() * c.p.array()).sum();
    const double penalty = (prob.a.w - c.p.rowwise().sum()).cwiseAbs().sum() +
                           (prob.b.w - c.p.colwise().sum().transpose()).cwiseAbs().sum();
    return {quadratic, quadratic + params.gamma * penalty};
}

Matrix mirrorc_log_kernel(const Matrix& mop, const Matrix& log_p, double eps, double dt) {
    const double grad_w = std::isinf(dt) ? 1.0 / eps : dt / (1.0 + eps * dt);
    const double mem_w = std::isinf(dt) ? 0.0 : 1.0 / (1.0 + eps * dt);
    Matrix out(mop.rows(), mop.cols());
    for (Index j = 0; j < mop.cols(); ++j) {
        for (Index i = 0; i < mop.rows(); ++i) {
            const double lp = log_p(i, j);
            if (lp == -kInf) {
                out(i, j) = -kInf;
            } else {
                out(i, j) = -grad_w * mop(i, j) + (mem_w == 0.0 ? 0.0 : mem_w * lp);
            }
        }
    }
    return out;
}

Matrix mirror_log_kernel(const Matrix& mop, const Matrix& log_p, double eps, double dt_prime) {
    const double mem_w = 1.0 - eps * dt_prime;
    Matrix out(mop.rows(), mop.cols());
    for (Index j = 0; j < mop.cols(); ++j) {
        for (Index i = 0; i < mop.rows(); ++i) {
            const double lp = log_p(i, j);
            if (lp == -kInf) {
                out(i, j) = -kInf;
            } else {
                out(i, j) = -dt_prime * mop(i, j) + (mem_w == 0.0 ? 0.0 : mem_w * lp);
            }
        }
    }
    return out;
}

Matrix Kernel::values() const {
    Matrix out(log_values.rows(), log_values.cols());
    for (Index j = 0; j < log_values.cols(); ++j) {
        for (Index i = 0; i < log_values.rows(); ++i) {
            const double lv = log_values(i, j);
            out(i, j) = (lv == -kInf) ? 0.0 : std::exp(lv);
        }
    }
    return out;
}

Kernel mirrorc_kernel(const GwProblem& prob, const Coupling& c, const ZeroPattern& pattern,
                      const SolverParams& params) {
    if (pattern.rows() != c.rows() || pattern.cols() != c.cols()) {
        throw std::invalid_argument("pattern dimensions do not match the coupling");
    }
    Matrix log_p(c.rows(), c.cols());
    for (Index j = 0; j < c.cols(); ++j) {
        for (Index i = 0; i < c.rows(); ++i) {
            if (pattern.blocked(i, j)) {
                if (c.p(i, j) != 0.0) {
                    throw std::invalid_argument("plan is nonzero on a blocked entry");
                }
                log_p(i, j) = -kInf;
            } else {
                if (!(c.p(i, j) > 0.0)) {
                    throw std::invalid_argument(
                        "plan must be positive off the pattern (iterate left the open orthant)");
                }
                log_p(i, j) = std::log(c.p(i, j));
            }
        }
    }
    const Matrix mop = apply_cost_tensor(prob, c.p);
    return Kernel{mirrorc_log_kernel(mop, log_p, params.epsilon, params.dt)};
}

StepBound max_step_size(const GwProblem& prob, double eps) {
    const double n = static_cast<double>(prob.d1.size());
    const double m = static_cast<double>(prob.d2.size());
    const double dmax = std::max(prob.d1.max(), prob.d2.max());
    const double lip = n * m * dmax * dmax;
    const double strong = std::min(prob.a.w.maxCoeff(), prob.b.w.maxCoeff());
    const double dt_max = 1.0 / (strong * lip);
    const double eta_max = eps / (strong * lip + eps);
    return {dt_max, eta_max};
}

namespace {

// Entropy sum eps * sum p (log p - 1); zero entries contribute nothing.
double entropy_term(const Matrix& p, const Matrix& log_p, double eps) {
    double acc = 0.0;
    for (Index j = 0; j < p.cols(); ++j) {
        for (Index i = 0; i < p.rows(); ++i) {
            const double v = p(i, j);
            if (v > 0.0) acc += v * (log_p(i, j) - 1.0);
        }
    }
    return eps * acc;
}

SgwResult run_outer_loop(const GwProblem& prob, const ZeroPattern& pattern,
                         const SolverParams& params, bool equality_marginals) {
    const Index n = prob.d1.size();
    const Index m = prob.d2.size();
    SgwResult out;
    out.pattern = pattern;

    Matrix log_p(n, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < n; ++i) {
            const double v = prob.a.w[i] * prob.b.w[j];
            log_p(i, j) = v > 0.0 ? std::log(v) : -kInf;
        }
    }
    pattern.mask_log(log_p);

    bool any_open = false;
    for (Index j = 0; j < m && !any_open; ++j) {
        for (Index i = 0; i < n; ++i) {
            if (log_p(i, j) != -kInf) {
                any_open = true;
                break;
            }
        }
    }
    if (!any_open) {
        out.coupling = Coupling::from_plan(Matrix::Zero(n, m), prob.a, prob.b);
        out.converged = true;
        out.warnings.push_back("pattern blocks every entry; returning the zero coupling");
        return out;
    }

    Matrix p(n, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < n; ++i) {
            p(i, j) = log_p(i, j) == -kInf ? 0.0 : std::exp(log_p(i, j));
        }
    }

    const double eps = params.epsilon;
    const double cap = equality_marginals ? kInf : params.eta() * params.gamma;
    const double dt = equality_marginals ? kInf : params.dt;

    Matrix mop = apply_cost_tensor(prob, p);
    DualPotentials warm{Vector::Zero(n), Vector::Zero(m)};
    bool inner_warned = false;

    for (int k = 0; k < params.max_outer; ++k) {
        const Matrix log_q = mirrorc_log_kernel(mop, log_p, eps, dt);
        Matrix log_p_next;
        SotResult inner = solve_sot_log_kernel(log_q, prob.a, prob.b, eps, cap, params.tol_inner,
                                               params.max_inner, &warm, &log_p_next);
        if (!inner.trace.converged && !inner_warned) {
            inner_warned = true;
            out.warnings.push_back("inner scaling solve hit the iteration cap at outer step " +
                                   std::to_string(k));
        }
        warm = inner.potentials;

        const Matrix& p_next = inner.coupling.p;
        const double prev_norm = p.norm();
        const double delta = (p_next - p).norm();
        p = p_next;
        log_p = std::move(log_p_next);

        mop = apply_cost_tensor(prob, p);
        const double quadratic = 0.5 * (mop.array() * p.array()).sum();
        const double penalty = (prob.a.w - p.rowwise().sum()).cwiseAbs().sum() +
                               (prob.b.w - p.colwise().sum().transpose()).cwiseAbs().sum();
        const double penalized = quadratic + params.gamma * penalty;
        out.quadratic_trace.push_back(quadratic);
        out.penalized_trace.push_back(penalized);
        out.entropic_trace.push_back(penalized + entropy_term(p, log_p, eps));
        out.mass_trace.push_back(p.sum());
        out.outer_iters = k + 1;

        if (delta <= params.tol_outer * prev_norm) {
            out.converged = true;
            break;
        }
    }

    out.coupling = Coupling::from_plan(std::move(p), prob.a, prob.b);
    return out;
}

}  // namespace

SgwResult solve_sgw_with_pattern(const GwProblem& prob, const ZeroPattern& pattern,
                                 const SolverParams& params) {
    params.validate();
    if (pattern.rows() != prob.d1.size() || pattern.cols() != prob.d2.size()) {
        throw std::invalid_argument("pattern dimensions do not match the problem");
    }
    return run_outer_loop(prob, pattern, params, /*equality_marginals=*/false);
}

SgwResult solve_sgw(const GwProblem& prob, const SolverParams& params) {
    params.validate();
    const ConflictGraph graph = build_conflict_graph(prob.d1, prob.d2, prob.rho, params.rho_squared);
    CoverSelection selection = select_zero_pattern(graph, prob.a, prob.b, params);
    SgwResult out = run_outer_loop(prob, selection.pattern, params, /*equality_marginals=*/false);
    out.cover_size_mass = std::move(selection.size_mass);
    out.cover_mass = selection.mass;
    return out;
}

SgwResult solve_entropic_gw(const GwProblem& prob, const SolverParams& params) {
    params.validate();
    const double ta = prob.a.total();
    const double tb = prob.b.total();
    if (std::abs(ta - tb) > 1e-9 * std::max(ta, tb)) {
        throw std::invalid_argument("entropic GW requires equal marginal totals");
    }
    const ZeroPattern empty(prob.d1.size(), prob.d2.size());
    return run_outer_loop(prob, empty, params, /*equality_marginals=*/true);
}

}  // namespace sgwot
