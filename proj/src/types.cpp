#include "sgwot/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgwot {

DistanceMatrix::DistanceMatrix(Matrix d) : d_(std::move(d)) {
    if (d_.rows() != d_.cols()) {
        throw std::invalid_argument("distance matrix must be square");
    }
    for (Index i = 0; i < d_.rows(); ++i) {
        if (d_(i, i) != 0.0) {
            throw std::invalid_argument("distance matrix must have a zero diagonal (row " +
                                        std::to_string(i) + ")");
        }
        for (Index j = 0; j < d_.cols(); ++j) {
            const double v = d_(i, j);
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument("distance matrix entries must be finite and nonnegative");
            }
            if (v != d_(j, i)) {
                throw std::invalid_argument("distance matrix must be symmetric");
            }
        }
    }
    max_ = d_.size() > 0 ? d_.maxCoeff() : 0.0;
}

Marginal Marginal::uniform(Index n) {
    if (n <= 0) {
        throw std::invalid_argument("marginal needs at least one point");
    }
    Marginal m;
    m.w = Vector::Constant(n, 1.0 / static_cast<double>(n));
    return m;
}

void Marginal::validate() const {
    for (Index i = 0; i < w.size(); ++i) {
        if (!std::isfinite(w[i]) || w[i] < 0.0) {
            throw std::invalid_argument("marginal weights must be finite and nonnegative");
        }
    }
    if (!(total() > 0.0)) {
        throw std::invalid_argument("marginal must have positive total mass");
    }
}

ZeroPattern::ZeroPattern(Index rows, Index cols) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) {
        throw std::invalid_argument("zero pattern dimensions must be nonnegative");
    }
    mask_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0);
}

ZeroPattern::ZeroPattern(Index rows, Index cols, std::vector<std::pair<Index, Index>> blocked)
    : ZeroPattern(rows, cols) {
    std::sort(blocked.begin(), blocked.end());
    blocked.erase(std::unique(blocked.begin(), blocked.end()), blocked.end());
    for (const auto& [i, j] : blocked) {
        if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
            throw std::invalid_argument("zero pattern index out of range");
        }
        mask_[static_cast<std::size_t>(i) * cols_ + j] = 1;
    }
    entries_ = std::move(blocked);
}

void ZeroPattern::zero_out(Matrix& p) const {
    for (const auto& [i, j] : entries_) {
        p(i, j) = 0.0;
    }
}

void ZeroPattern::mask_log(Matrix& log_values) const {
    for (const auto& [i, j] : entries_) {
        log_values(i, j) = -kInf;
    }
}

Coupling Coupling::from_plan(Matrix plan, const Marginal& a, const Marginal& b) {
    if (plan.rows() != a.size() || plan.cols() != b.size()) {
        throw std::invalid_argument("plan dimensions do not match the marginals");
    }
    Coupling c;
    c.p = std::move(plan);
    c.mu = a.w - c.p.rowwise().sum();
    c.nu = b.w - c.p.colwise().sum().transpose();
    c.mass = c.p.sum();
    return c;
}

double transported_mass(const Coupling& c) { return c.p.sum(); }

std::vector<Violation> validate_coupling(const Coupling& c, const Marginal& a, const Marginal& b,
                                         const ZeroPattern& z, double tol) {
    if (c.rows() != a.size() || c.cols() != b.size()) {
        throw std::invalid_argument("coupling dimensions do not match the marginals");
    }
    if (z.rows() != c.rows() || z.cols() != c.cols()) {
        throw std::invalid_argument("zero pattern dimensions do not match the coupling");
    }
    std::vector<Violation> out;
    for (Index i = 0; i < c.rows(); ++i) {
        for (Index j = 0; j < c.cols(); ++j) {
            if (c.p(i, j) < -tol) {
                out.push_back({ViolationKind::NegativeEntry, i, j, -c.p(i, j)});
            }
        }
    }
    const Vector row_sums = c.p.rowwise().sum();
    for (Index i = 0; i < c.rows(); ++i) {
        if (row_sums[i] - a.w[i] > tol) {
            out.push_back({ViolationKind::RowExcess, i, -1, row_sums[i] - a.w[i]});
        }
    }
    const Vector col_sums = c.p.colwise().sum().transpose();
    for (Index j = 0; j < c.cols(); ++j) {
        if (col_sums[j] - b.w[j] > tol) {
            out.push_back({ViolationKind::ColumnExcess, -1, j, col_sums[j] - b.w[j]});
        }
    }
    for (const auto& [i, j] : z.entries()) {
        if (std::abs(c.p(i, j)) > tol) {
            out.push_back({ViolationKind::BlockedEntry, i, j, std::abs(c.p(i, j))});
        }
    }
    return out;
}

double SolverParams::eta() const {
    if (std::isinf(dt)) return 1.0;
    return epsilon * dt / (1.0 + epsilon * dt);
}

double SolverParams::prox_weight() const {
    if (std::isinf(dt)) return 1.0 / epsilon;
    return dt / (1.0 + epsilon * dt);
}

void SolverParams::set_eta(double eta) {
    if (!(eta > 0.0) || eta > 1.0) {
        throw std::invalid_argument("eta must lie in (0, 1]");
    }
    dt = (eta == 1.0) ? kInf : eta / (epsilon * (1.0 - eta));
}

void SolverParams::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
    if (!(score_gamma >= 0.0)) throw std::invalid_argument("score_gamma must be nonnegative");
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(tol_inner > 0.0) || !(tol_outer > 0.0) || !(tol_feas > 0.0)) {
        throw std::invalid_argument("tolerances must be positive");
    }
    if (max_inner < 1 || max_outer < 1) throw std::invalid_argument("iteration caps must be >= 1");
    if (n_covers < 1) throw std::invalid_argument("n_covers must be >= 1");
    if (prefix_max < 0.0 || prefix_max >= 1.0) {
        throw std::invalid_argument("prefix_max must lie in [0, 1)");
    }
}

}  // namespace sgwot
