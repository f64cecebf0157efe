#include "sgwot/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sgwot {

namespace {

std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

Index nearest_point(const PointCloud& pc, const Eigen::RowVectorXd& target) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < pc.size(); ++i) {
        const double d = (pc.coords.row(i) - target).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

Sketch grid_sketch(const PointCloud& pc, double box_size, std::uint64_t seed) {
    if (pc.size() < 1) throw std::invalid_argument("point cloud is empty");
    if (!(box_size > 0.0)) throw std::invalid_argument("box_size must be positive");

    const Index n = pc.size();
    const Index d = pc.dim();
    const Eigen::RowVectorXd lo = pc.coords.colwise().minCoeff();
    const Eigen::RowVectorXd hi = pc.coords.colwise().maxCoeff();

    // map<vector> keeps box iteration order deterministic
    std::map<std::vector<std::int64_t>, std::vector<Index>> boxes;
    std::vector<std::int64_t> key(d);
    for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < d; ++c) {
            const double extent = hi[c] - lo[c];
            const auto last = static_cast<std::int64_t>(
                std::max(0.0, std::ceil(extent / box_size) - 1.0));
            auto idx = static_cast<std::int64_t>(std::floor((pc.coords(i, c) - lo[c]) / box_size));
            key[c] = std::clamp<std::int64_t>(idx, 0, last);
        }
        boxes[key].push_back(i);
    }

    std::mt19937_64 rng(seed);
    Sketch out;
    out.assignment.assign(n, 0);
    out.rep_point.reserve(boxes.size());
    std::vector<Index> reps;
    for (const auto& [box, members] : boxes) {
        const Index rep = members[bounded_rand(rng, members.size())];
        const Index rep_id = static_cast<Index>(reps.size());
        reps.push_back(rep);
        for (Index i : members) out.assignment[i] = rep_id;
    }
    out.rep_point = reps;
    out.rep_coords.resize(static_cast<Index>(reps.size()), d);
    for (std::size_t r = 0; r < reps.size(); ++r) {
        out.rep_coords.row(static_cast<Index>(r)) = pc.coords.row(reps[r]);
    }
    return out;
}

namespace {

// Single linkage inside one cube: merge MST edges below the first empty
// histogram bin and return member lists per cluster.
std::vector<std::vector<Index>> gap_clusters(const PointCloud& pc, const std::vector<Index>& members,
                                             int gap_bins) {
    const auto p = members.size();
    if (p == 1) return {{members[0]}};

    // Prim MST over pairwise Euclidean distances.
    std::vector<double> best(p, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> parent(p, 0);
    std::vector<char> used(p, 0);
    std::vector<std::pair<std::size_t, std::size_t>> mst_edges;
    std::vector<double> mst_len;
    best[0] = 0.0;
    for (std::size_t step = 0; step < p; ++step) {
        std::size_t u = p;
        for (std::size_t t = 0; t < p; ++t) {
            if (!used[t] && (u == p || best[t] < best[u])) u = t;
        }
        used[u] = 1;
        if (u != 0) {
            mst_edges.push_back({parent[u], u});
            mst_len.push_back(best[u]);
        }
        for (std::size_t t = 0; t < p; ++t) {
            if (used[t]) continue;
            const double dd = (pc.coords.row(members[u]) - pc.coords.row(members[t])).norm();
            if (dd < best[t]) {
                best[t] = dd;
                parent[t] = u;
            }
        }
    }

    const double max_len = *std::max_element(mst_len.begin(), mst_len.end());
    double cut = std::numeric_limits<double>::infinity();
    if (max_len > 0.0) {
        const double bin = max_len * (1.0 + 1e-12) / gap_bins;
        std::vector<int> hist(gap_bins, 0);
        for (double len : mst_len) {
            ++hist[std::min<int>(static_cast<int>(len / bin), gap_bins - 1)];
        }
        for (int t = 0; t < gap_bins; ++t) {
            if (hist[t] == 0) {
                cut = bin * t;
                break;
            }
        }
    }

    // Union-find over edges below the cut.
    std::vector<std::size_t> root(p);
    std::iota(root.begin(), root.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (root[x] != x) x = root[x] = root[root[x]];
        return x;
    };
    for (std::size_t e = 0; e < mst_edges.size(); ++e) {
        if (mst_len[e] <= cut) {
            root[find(mst_edges[e].first)] = find(mst_edges[e].second);
        }
    }
    std::map<std::size_t, std::vector<Index>> groups;
    for (std::size_t t = 0; t < p; ++t) groups[find(t)].push_back(members[t]);
    std::vector<std::vector<Index>> out;
    out.reserve(groups.size());
    for (auto& [r, pts] : groups) out.push_back(std::move(pts));
    return out;
}

}  // namespace

Sketch mapper_sketch(const PointCloud& pc, const MapperOptions& opts, std::uint64_t seed) {
    (void)seed;  // the cover and clustering are deterministic
    if (pc.size() < 1) throw std::invalid_argument("point cloud is empty");
    if (!(opts.cube_size > 0.0)) throw std::invalid_argument("cube_size must be positive");
    if (opts.overlap < 0.0 || opts.overlap > 0.5) {
        throw std::invalid_argument("overlap must lie in [0, 0.5]");
    }
    if (opts.gap_bins < 2) throw std::invalid_argument("gap_bins must be >= 2");

    const Index n = pc.size();
    const Index d = pc.dim();
    const Eigen::RowVectorXd lo = pc.coords.colwise().minCoeff();
    const Eigen::RowVectorXd hi = pc.coords.colwise().maxCoeff();
    const double stride = opts.cube_size * (1.0 - opts.overlap);

    // Collect cube membership; a point can land in up to 2^d cubes.
    std::map<std::vector<std::int64_t>, std::vector<Index>> cubes;
    std::vector<std::vector<std::int64_t>> axis_hits(d);
    std::vector<std::vector<std::int64_t>> choice(d);
    for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < d; ++c) {
            axis_hits[c].clear();
            const double x = pc.coords(i, c) - lo[c];
            const double extent = hi[c] - lo[c];
            const auto t_last = static_cast<std::int64_t>(
                std::max(0.0, std::ceil((extent - opts.cube_size) / stride)));
            const auto t_hi = static_cast<std::int64_t>(std::floor(x / stride));
            for (std::int64_t t = std::max<std::int64_t>(0, t_hi - 1); t <= std::min(t_hi, t_last);
                 ++t) {
                if (x >= t * stride - 1e-12 && x <= t * stride + opts.cube_size + 1e-12) {
                    axis_hits[c].push_back(t);
                }
            }
            if (axis_hits[c].empty()) axis_hits[c].push_back(std::min(std::max<std::int64_t>(t_hi, 0), t_last));
        }
        // Cartesian product of per-axis cube indices.
        std::vector<std::size_t> pick(d, 0);
        for (;;) {
            std::vector<std::int64_t> key(d);
            for (Index c = 0; c < d; ++c) key[c] = axis_hits[c][pick[c]];
            cubes[key].push_back(i);
            Index c = 0;
            for (; c < d; ++c) {
                if (++pick[c] < axis_hits[c].size()) break;
                pick[c] = 0;
            }
            if (c == d) break;
        }
    }

    std::vector<Eigen::RowVectorXd> centroids;
    for (const auto& [key, members] : cubes) {
        for (const auto& cluster : gap_clusters(pc, members, opts.gap_bins)) {
            Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
            for (Index i : cluster) mean += pc.coords.row(i);
            centroids.push_back(mean / static_cast<double>(cluster.size()));
        }
    }

    // Merge centroids closer than tol_merge.
    std::vector<Eigen::RowVectorXd> merged;
    for (const auto& c : centroids) {
        bool absorbed = false;
        for (const auto& k : merged) {
            if ((c - k).norm() <= opts.tol_merge) {
                absorbed = true;
                break;
            }
        }
        if (!absorbed) merged.push_back(c);
    }

    Sketch out;
    out.rep_coords.resize(static_cast<Index>(merged.size()), d);
    for (std::size_t r = 0; r < merged.size(); ++r) {
        out.rep_coords.row(static_cast<Index>(r)) = merged[r];
        out.rep_point.push_back(nearest_point(pc, merged[r]));
    }
    out.assignment.assign(n, 0);
    for (Index i = 0; i < n; ++i) {
        Index best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index r = 0; r < out.rep_coords.rows(); ++r) {
            const double dd = (pc.coords.row(i) - out.rep_coords.row(r)).squaredNorm();
            if (dd < best_d) {
                best_d = dd;
                best = r;
            }
        }
        out.assignment[i] = best;
    }
    return out;
}

RecoverResult recover_full_coupling(const Matrix& p_hat, const Matrix& dhat1, const Matrix& dhat2,
                                    const SolverParams& params, const RecoverOptions& opts) {
    params.validate();
    const Index n_hat = p_hat.rows();
    const Index m_hat = p_hat.cols();
    if (dhat1.cols() != n_hat || dhat2.cols() != m_hat) {
        throw std::invalid_argument("sketch distance columns do not match the plan dimensions");
    }
    if (p_hat.minCoeff() < 0.0) throw std::invalid_argument("plan entries must be nonnegative");
    if (!(p_hat.sum() > 0.0)) throw std::invalid_argument("plan is all zero; nothing to recover");
    if (!(opts.block_percentile > 0.0) || opts.block_percentile > 1.0) {
        throw std::invalid_argument("block_percentile must lie in (0, 1]");
    }
    const Index n = dhat1.rows();
    const Index m = dhat2.rows();

    const Vector row_sum = p_hat.rowwise().sum();
    const Vector col_sum = p_hat.colwise().sum().transpose();
    std::vector<Index> matched_rows, matched_cols;
    for (Index i = 0; i < n_hat; ++i) {
        if (row_sum[i] > 0.0) matched_rows.push_back(i);
    }
    for (Index j = 0; j < m_hat; ++j) {
        if (col_sum[j] > 0.0) matched_cols.push_back(j);
    }

    // Row-normalized plan; unmatched sketch rows fall back to the uniform
    // distribution over matched columns (the normalization is undefined there).
    Matrix p_rows(n_hat, m_hat);
    for (Index i = 0; i < n_hat; ++i) {
        if (row_sum[i] > 0.0) {
            p_rows.row(i) = p_hat.row(i) / row_sum[i];
        } else {
            p_rows.row(i).setZero();
            for (Index j : matched_cols) p_rows(i, j) = 1.0 / static_cast<double>(matched_cols.size());
        }
    }
    // Transposed column-normalized plan, with the symmetric fallback.
    Matrix p_cols_t(m_hat, n_hat);
    for (Index j = 0; j < m_hat; ++j) {
        if (col_sum[j] > 0.0) {
            p_cols_t.row(j) = (p_hat.col(j) / col_sum[j]).transpose();
        } else {
            p_cols_t.row(j).setZero();
            for (Index i : matched_rows) p_cols_t(j, i) = 1.0 / static_cast<double>(matched_rows.size());
        }
    }

    const Matrix target_rows = dhat2 * p_cols_t;  // m x n_hat
    const Matrix source_rows = dhat1 * p_rows.transpose();  // n x m_hat

    Matrix cost(n, m);
    const double p_ord = opts.norm_order;
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
            const double c1 = row_distance(dhat1.row(i).transpose(), target_rows.row(j).transpose(), p_ord);
            const double c2 = row_distance(source_rows.row(i).transpose(), dhat2.row(j).transpose(), p_ord);
            cost(i, j) = c1 + c2;
        }
    }

    ZeroPattern pattern(n, m);
    if (opts.block_percentile < 1.0) {
        std::vector<double> sorted(cost.data(), cost.data() + cost.size());
        std::sort(sorted.begin(), sorted.end());
        const auto q = static_cast<std::size_t>(opts.block_percentile * (sorted.size() - 1));
        const double cut = sorted[q];
        std::vector<std::pair<Index, Index>> blocked;
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < m; ++j) {
                if (cost(i, j) > cut) blocked.push_back({i, j});
            }
        }
        pattern = ZeroPattern(n, m, std::move(blocked));
    }

    CostMatrix cm;
    cm.c = cost;
    cm.pattern = pattern;
    pattern.zero_out(cm.c);
    const Marginal a = Marginal::uniform(n);
    const Marginal b = Marginal::uniform(m);
    SotResult sol = solve_sot(cm, a, b, params);

    RecoverResult out;
    out.coupling = std::move(sol.coupling);
    out.cost = std::move(cost);
    out.unmatched_rows = static_cast<std::size_t>(n_hat) - matched_rows.size();
    out.unmatched_cols = static_cast<std::size_t>(m_hat) - matched_cols.size();
    out.trace = std::move(sol.trace);
    return out;
}

}  // namespace sgwot
