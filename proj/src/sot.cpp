#include "sgwot/sot.hpp"

#include <cmath>
#include <stdexcept>

namespace sgwot {

CostMatrix CostMatrix::all_ones(Index rows, Index cols, ZeroPattern pattern) {
    CostMatrix out;
    out.c = Matrix::Ones(rows, cols);
    if (pattern.rows() == 0 && pattern.cols() == 0) {
        pattern = ZeroPattern(rows, cols);
    }
    out.pattern = std::move(pattern);
    out.pattern.zero_out(out.c);
    out.validate();
    return out;
}

CostMatrix CostMatrix::from_dense(const Matrix& c_with_inf) {
    std::vector<std::pair<Index, Index>> blocked;
    Matrix finite = c_with_inf;
    for (Index i = 0; i < finite.rows(); ++i) {
        for (Index j = 0; j < finite.cols(); ++j) {
            if (std::isinf(finite(i, j))) {
                blocked.push_back({i, j});
                finite(i, j) = 0.0;
            }
        }
    }
    CostMatrix out;
    out.c = std::move(finite);
    out.pattern = ZeroPattern(c_with_inf.rows(), c_with_inf.cols(), std::move(blocked));
    out.validate();
    return out;
}

Matrix CostMatrix::log_kernel(double eps) const {
    Matrix lk = -c / eps;
    pattern.mask_log(lk);
    return lk;
}

void CostMatrix::validate() const {
    if (pattern.rows() != rows() || pattern.cols() != cols()) {
        throw std::invalid_argument("cost pattern dimensions do not match the matrix");
    }
    for (Index i = 0; i < rows(); ++i) {
        for (Index j = 0; j < cols(); ++j) {
            const double v = c(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument("cost entries must be finite and nonnegative");
            }
        }
    }
}

namespace {

// Log-sum-exp of (shift[t]/eps + lk[t]) over one row or column, skipping
// -inf kernel entries. Returns -inf when everything is excluded.
double lse_line(const double* lk, Index stride, Index count, const double* shift_over_eps) {
    double mx = -kInf;
    for (Index t = 0; t < count; ++t) {
        const double k = lk[t * stride];
        if (k == -kInf) continue;
        const double v = shift_over_eps[t] + k;
        if (v > mx) mx = v;
    }
    if (mx == -kInf) return -kInf;
    double acc = 0.0;
    for (Index t = 0; t < count; ++t) {
        const double k = lk[t * stride];
        if (k == -kInf) continue;
        acc += std::exp(shift_over_eps[t] + k - mx);
    }
    return mx + std::log(acc);
}

}  // namespace

SotResult solve_sot_log_kernel(const Matrix& log_kernel, const Marginal& a, const Marginal& b,
                               double eps, double cap, double tol, int max_iter,
                               const DualPotentials* warm_start, Matrix* log_plan) {
    const Index n = log_kernel.rows();
    const Index m = log_kernel.cols();
    if (a.size() != n || b.size() != m) {
        throw std::invalid_argument("marginal sizes do not match the kernel");
    }
    a.validate();
    b.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");

    // Zero-weight marginals exclude their whole line from the transport.
    Matrix lk = log_kernel;
    for (Index i = 0; i < n; ++i) {
        if (a.w[i] == 0.0) lk.row(i).setConstant(-kInf);
    }
    for (Index j = 0; j < m; ++j) {
        if (b.w[j] == 0.0) lk.col(j).setConstant(-kInf);
    }

    std::vector<char> row_active(n), col_active(m);
    bool any_active = false;
    for (Index i = 0; i < n; ++i) {
        row_active[i] = (lk.row(i).maxCoeff() != -kInf);
        any_active = any_active || row_active[i];
    }
    for (Index j = 0; j < m; ++j) {
        col_active[j] = (lk.col(j).maxCoeff() != -kInf);
    }

    SotResult out;
    out.potentials.f = Vector::Zero(n);
    out.potentials.g = Vector::Zero(m);
    if (warm_start != nullptr) {
        if (warm_start->f.size() == n && warm_start->g.size() == m) {
            out.potentials = *warm_start;
        }
    }
    Vector& f = out.potentials.f;
    Vector& g = out.potentials.g;
    const double pin = std::isfinite(cap) ? cap : 0.0;
    for (Index i = 0; i < n; ++i) {
        if (!row_active[i]) f[i] = pin;
    }
    for (Index j = 0; j < m; ++j) {
        if (!col_active[j]) g[j] = pin;
    }

    if (!any_active) {
        out.coupling = Coupling::from_plan(Matrix::Zero(n, m), a, b);
        out.trace.no_feasible_entries = true;
        out.trace.converged = true;
        if (log_plan != nullptr) *log_plan = Matrix::Constant(n, m, -kInf);
        return out;
    }

    Vector shift(std::max(n, m));
    for (int it = 0; it < max_iter; ++it) {
        double change = 0.0;
        for (Index j = 0; j < m; ++j) shift[j] = g[j] / eps;
        for (Index i = 0; i < n; ++i) {
            if (!row_active[i]) continue;
            const double lse = lse_line(lk.data() + i, n, m, shift.data());
            const double next = std::min(eps * (std::log(a.w[i]) - lse), cap);
            change = std::max(change, std::abs(next - f[i]));
            f[i] = next;
        }
        for (Index i = 0; i < n; ++i) shift[i] = f[i] / eps;
        for (Index j = 0; j < m; ++j) {
            if (!col_active[j]) continue;
            const double lse = lse_line(lk.data() + j * n, 1, n, shift.data());
            const double next = std::min(eps * (std::log(b.w[j]) - lse), cap);
            change = std::max(change, std::abs(next - g[j]));
            g[j] = next;
        }
        out.trace.dual_change.push_back(change);
        out.trace.iterations = it + 1;
        if (change < tol) {
            out.trace.converged = true;
            break;
        }
    }

    Matrix plan(n, m);
    for (Index j = 0; j < m; ++j) {
        for (Index i = 0; i < n; ++i) {
            const double k = lk(i, j);
            plan(i, j) = (k == -kInf) ? 0.0 : std::exp((f[i] + g[j]) / eps + k);
        }
    }
    if (log_plan != nullptr) {
        log_plan->resize(n, m);
        for (Index j = 0; j < m; ++j) {
            for (Index i = 0; i < n; ++i) {
                const double k = lk(i, j);
                (*log_plan)(i, j) = (k == -kInf) ? -kInf : (f[i] + g[j]) / eps + k;
            }
        }
    }
    out.coupling = Coupling::from_plan(std::move(plan), a, b);
    return out;
}

SotResult solve_sot(const CostMatrix& cost, const Marginal& a, const Marginal& b,
                    const SolverParams& params) {
    params.validate();
    cost.validate();
    const Matrix lk = cost.log_kernel(params.epsilon);
    return solve_sot_log_kernel(lk, a, b, params.epsilon, params.gamma, params.tol_inner,
                                params.max_inner);
}

double sot_objective(const Coupling& c, const CostMatrix& cost, const Marginal& a,
                     const Marginal& b, const SolverParams& params) {
    if (c.rows() != cost.rows() || c.cols() != cost.cols()) {
        throw std::invalid_argument("coupling and cost dimensions differ");
    }
    for (const auto& [i, j] : cost.pattern.entries()) {
        if (c.p(i, j) != 0.0) {
            throw std::invalid_argument("plan is nonzero on a blocked entry");
        }
    }
    const double transport = (c.p.array() * cost.c.array()).sum();
    const double penalty = (a.w - c.p.rowwise().sum()).cwiseAbs().sum() +
                           (b.w - c.p.colwise().sum().transpose()).cwiseAbs().sum();
    return transport + params.gamma * penalty;
}

}  // namespace sgwot
