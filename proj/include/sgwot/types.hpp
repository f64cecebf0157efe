#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace sgwot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Symmetric nonnegative square matrix with zero diagonal.
class DistanceMatrix {
public:
    explicit DistanceMatrix(Matrix d);

    Index size() const { return d_.rows(); }
    const Matrix& values() const { return d_; }
    double operator()(Index i, Index j) const { return d_(i, j); }
    double max() const { return max_; }

private:
    Matrix d_;
    double max_ = 0.0;
};

/// Nonnegative weight vector over a point set. Stored unnormalized.
struct Marginal {
    Vector w;

    static Marginal uniform(Index n);

    Index size() const { return w.size(); }
    double total() const { return w.sum(); }
    void validate() const;
};

/// Set of coupling entries forced to zero. Membership queries are exact.
class ZeroPattern {
public:
    ZeroPattern() = default;
    ZeroPattern(Index rows, Index cols);
    ZeroPattern(Index rows, Index cols, std::vector<std::pair<Index, Index>> blocked);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    bool blocked(Index i, Index j) const { return mask_[static_cast<std::size_t>(i) * cols_ + j] != 0; }
    const std::vector<std::pair<Index, Index>>& entries() const { return entries_; }

    /// Zeroes the blocked entries of a dense plan.
    void zero_out(Matrix& p) const;
    /// Sets blocked entries of a log-domain matrix to -inf.
    void mask_log(Matrix& log_values) const;

private:
    Index rows_ = 0, cols_ = 0;
    std::vector<std::pair<Index, Index>> entries_;
    std::vector<std::uint8_t> mask_;
};

/// Transport plan together with residual marginals and transported mass.
struct Coupling {
    Matrix p;
    Vector mu;   // a - P 1
    Vector nu;   // b - P^T 1
    double mass = 0.0;

    static Coupling from_plan(Matrix plan, const Marginal& a, const Marginal& b);

    Index rows() const { return p.rows(); }
    Index cols() const { return p.cols(); }
};

double transported_mass(const Coupling& c);

enum class ViolationKind {
    NegativeEntry,
    RowExcess,
    ColumnExcess,
    BlockedEntry,
};

struct Violation {
    ViolationKind kind;
    Index i;        // row, or -1
    Index j;        // column, or -1
    double amount;  // magnitude of the violation
};

/// Reports every violated feasibility constraint of a plan at tolerance tol.
std::vector<Violation> validate_coupling(const Coupling& c, const Marginal& a, const Marginal& b,
                                         const ZeroPattern& z, double tol);

/// Solver configuration shared across modules.
struct SolverParams {
    double epsilon = 0.1;   // entropic coefficient
    double gamma = 10.0;    // l1 penalty on untransported marginal mass
    double score_gamma = 10.0;  // penalty used when scoring covers by transportable mass
    double rho = 1.0;       // distance-difference threshold
    double dt = kInf;       // mirror step; eta = eps*dt/(1+eps*dt), so dt=inf gives eta=1
    double tol_inner = 1e-7;
    double tol_outer = 1e-6;
    double tol_feas = 1e-8;
    int max_inner = 10000;
    int max_outer = 500;
    std::uint64_t seed = 0;
    int n_covers = 100;
    double prefix_max = 0.0;   // upper bound of the random pre-fixed vertex fraction (0 disables)
    bool rho_squared = false;  // threshold (d1-d2)^2 > rho instead of |d1-d2| > rho

    double eta() const;
    double prox_weight() const;  // dt/(1+eps*dt); equals eta/epsilon
    void set_eta(double eta);
    void validate() const;
};

}  // namespace sgwot
