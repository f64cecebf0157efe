#include "sgwot/conflict.hpp"

#include "sgwot/sot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sgwot {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 1));
}

// Unbiased bounded draw; mt19937_64 keeps runs reproducible across platforms.
std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t threshold = (-bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

}  // namespace

ConflictGraph::ConflictGraph(Index rows, Index cols)
    : rows_(rows),
      cols_(cols),
      nv_(rows * cols),
      words_((rows * cols + 63) / 64),
      adj_(static_cast<std::size_t>(nv_) * words_, 0),
      degree_(nv_, 0) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("conflict graph needs positive dimensions");
}

void ConflictGraph::set_edge(Index v, Index w) {
    adj_[static_cast<std::size_t>(v) * words_ + (w >> 6)] |= (std::uint64_t{1} << (w & 63));
    adj_[static_cast<std::size_t>(w) * words_ + (v >> 6)] |= (std::uint64_t{1} << (v & 63));
}

void ConflictGraph::finalize_degrees() {
    std::size_t twice = 0;
    for (Index v = 0; v < nv_; ++v) {
        Index deg = 0;
        const std::uint64_t* r = row(v);
        for (Index w = 0; w < words_; ++w) deg += std::popcount(r[w]);
        degree_[v] = deg;
        twice += static_cast<std::size_t>(deg);
    }
    edge_count_ = twice / 2;
}

ConflictGraph build_conflict_graph(const DistanceMatrix& d1, const DistanceMatrix& d2, double rho,
                                   bool threshold_squared) {
    if (!(rho >= 0.0)) throw std::invalid_argument("rho must be nonnegative");
    const Index n = d1.size();
    const Index m = d2.size();
    ConflictGraph g(n, m);
    const Index nv = g.nv_;
    const Index words = g.words_;
    const double* p1 = d1.values().data();
    const double* p2 = d2.values().data();

    // Each thread fills complete rows; the predicate is symmetric, so the
    // adjacency comes out symmetric without cross-row writes.
#pragma omp parallel for schedule(dynamic, 16)
    for (Index v = 0; v < nv; ++v) {
        const Index i = v / m;
        const Index j = v % m;
        const double* d1_i = p1 + static_cast<std::size_t>(i) * n;  // column i == row i
        const double* d2_j = p2 + static_cast<std::size_t>(j) * m;
        std::uint64_t* out = g.adj_.data() + static_cast<std::size_t>(v) * words;
        Index w = 0;
        for (Index k = 0; k < n; ++k) {
            const double dik = d1_i[k];
            for (Index l = 0; l < m; ++l, ++w) {
                if (w == v) continue;
                const double diff = dik - d2_j[l];
                const bool cut = threshold_squared ? (diff * diff > rho) : (std::abs(diff) > rho);
                if (cut) out[w >> 6] |= (std::uint64_t{1} << (w & 63));
            }
        }
    }
    g.finalize_degrees();
    return g;
}

ConflictGraph graph_from_edges(Index rows, Index cols,
                               const std::vector<std::pair<Index, Index>>& edges) {
    ConflictGraph g(rows, cols);
    for (const auto& [v, w] : edges) {
        if (v < 0 || v >= g.nv_ || w < 0 || w >= g.nv_ || v == w) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        g.set_edge(v, w);
    }
    g.finalize_degrees();
    return g;
}

ZeroPattern VertexCover::to_pattern() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("cover has no dimensions");
    std::vector<std::pair<Index, Index>> blocked;
    blocked.reserve(vertices.size());
    for (Index v : vertices) blocked.push_back({v / cols, v % cols});
    return ZeroPattern(rows, cols, std::move(blocked));
}

bool is_vertex_cover(const ConflictGraph& g, const VertexCover& c) {
    const Index words = g.words_per_row();
    std::vector<std::uint64_t> not_in(words, ~std::uint64_t{0});
    for (Index v : c.vertices) not_in[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
    for (Index v = 0; v < g.vertex_count(); ++v) {
        if (!((not_in[v >> 6] >> (v & 63)) & 1u)) continue;  // v in cover
        const std::uint64_t* r = g.row(v);
        for (Index w = 0; w < words; ++w) {
            if (r[w] & not_in[w]) return false;  // edge with both ends outside
        }
    }
    return true;
}

namespace {

// Degree-bucketed deletion structure for the greedy pass.
class GreedyState {
public:
    explicit GreedyState(const ConflictGraph& g)
        : g_(g),
          alive_(g.words_per_row(), 0),
          deg_(g.vertex_count()),
          pos_(g.vertex_count()),
          edges_left_(g.edge_count()) {
        Index max_deg = 0;
        for (Index v = 0; v < g.vertex_count(); ++v) {
            deg_[v] = g.degree(v);
            max_deg = std::max(max_deg, deg_[v]);
        }
        buckets_.resize(max_deg + 1);
        for (Index v = 0; v < g.vertex_count(); ++v) {
            pos_[v] = buckets_[deg_[v]].size();
            buckets_[deg_[v]].push_back(v);
            alive_[v >> 6] |= (std::uint64_t{1} << (v & 63));
        }
        cur_max_ = max_deg;
    }

    bool has_edges() const { return edges_left_ > 0; }

    Index pick_max(std::mt19937_64& rng) {
        while (cur_max_ > 0 && buckets_[cur_max_].empty()) --cur_max_;
        auto& bucket = buckets_[cur_max_];
        return bucket[bounded_rand(rng, bucket.size())];
    }

    void remove(Index v) {
        if (!((alive_[v >> 6] >> (v & 63)) & 1u)) return;
        alive_[v >> 6] &= ~(std::uint64_t{1} << (v & 63));
        edges_left_ -= static_cast<std::size_t>(deg_[v]);
        bucket_erase(v);
        g_.for_each_neighbor(v, alive_.data(), [&](Index u) {
            bucket_erase(u);
            --deg_[u];
            bucket_insert(u);
        });
        deg_[v] = 0;
    }

private:
    void bucket_erase(Index v) {
        auto& bucket = buckets_[deg_[v]];
        const std::size_t p = pos_[v];
        bucket[p] = bucket.back();
        pos_[bucket[p]] = p;
        bucket.pop_back();
    }

    void bucket_insert(Index v) {
        auto& bucket = buckets_[deg_[v]];
        pos_[v] = bucket.size();
        bucket.push_back(v);
    }

    const ConflictGraph& g_;
    std::vector<std::uint64_t> alive_;
    std::vector<Index> deg_;
    std::vector<std::size_t> pos_;
    std::vector<std::vector<Index>> buckets_;
    std::size_t edges_left_;
    Index cur_max_ = 0;
};

}  // namespace

VertexCover greedy_vertex_cover(const ConflictGraph& g, std::uint64_t seed,
                                const std::vector<Index>& prefixed) {
    std::mt19937_64 rng(seed);
    GreedyState state(g);

    VertexCover cover;
    cover.rows = g.rows();
    cover.cols = g.cols();
    for (Index v : prefixed) {
        if (v < 0 || v >= g.vertex_count()) throw std::invalid_argument("prefixed vertex out of range");
    }
    cover.vertices = prefixed;
    std::sort(cover.vertices.begin(), cover.vertices.end());
    cover.vertices.erase(std::unique(cover.vertices.begin(), cover.vertices.end()),
                         cover.vertices.end());
    for (Index v : cover.vertices) state.remove(v);

    while (state.has_edges()) {
        const Index v = state.pick_max(rng);
        cover.vertices.push_back(v);
        state.remove(v);
    }
    std::sort(cover.vertices.begin(), cover.vertices.end());
    return cover;
}

VertexCover trim_cover(const ConflictGraph& g, const VertexCover& c, std::uint64_t seed) {
    if (!is_vertex_cover(g, c)) {
        throw std::invalid_argument("trim_cover: input is not a vertex cover");
    }
    const Index words = g.words_per_row();
    std::vector<std::uint64_t> outside(words, ~std::uint64_t{0});
    for (Index v : c.vertices) outside[v >> 6] &= ~(std::uint64_t{1} << (v & 63));

    std::vector<Index> order = c.vertices;
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[bounded_rand(rng, i)]);
    }

    VertexCover out;
    out.rows = c.rows != 0 ? c.rows : g.rows();
    out.cols = c.cols != 0 ? c.cols : g.cols();
    for (Index v : order) {
        // v is redundant iff it has no neighbor outside the remaining cover.
        const std::uint64_t* r = g.row(v);
        bool needed = false;
        for (Index w = 0; w < words; ++w) {
            if (r[w] & outside[w]) {
                needed = true;
                break;
            }
        }
        if (needed) {
            out.vertices.push_back(v);
        } else {
            outside[v >> 6] |= (std::uint64_t{1} << (v & 63));
        }
    }
    std::sort(out.vertices.begin(), out.vertices.end());
    out.is_minimal = true;
    return out;
}

double score_cover_mass(const VertexCover& c, const Marginal& a, const Marginal& b,
                        const SolverParams& params) {
    const CostMatrix cost = CostMatrix::all_ones(a.size(), b.size(), c.to_pattern());
    SolverParams score = params;
    score.gamma = params.score_gamma;
    const SotResult res = solve_sot(cost, a, b, score);
    return res.coupling.mass;
}

CoverSelection select_zero_pattern(const ConflictGraph& g, const Marginal& a, const Marginal& b,
                                   const SolverParams& params) {
    params.validate();
    if (g.rows() != a.size() || g.cols() != b.size()) {
        throw std::invalid_argument("graph dimensions do not match the marginals");
    }
    const int n_covers = params.n_covers;
    std::vector<VertexCover> covers(n_covers);
    std::vector<double> masses(n_covers);

#pragma omp parallel for schedule(dynamic)
    for (int l = 0; l < n_covers; ++l) {
        const std::uint64_t restart_seed = mix_seed(params.seed, static_cast<std::uint64_t>(l));
        std::vector<Index> prefixed;
        if (params.prefix_max > 0.0) {
            std::mt19937_64 rng(mix_seed(restart_seed, 0));
            const double frac =
                params.prefix_max * static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const auto count = static_cast<std::size_t>(frac * static_cast<double>(g.vertex_count()));
            std::vector<Index> pool(g.vertex_count());
            std::iota(pool.begin(), pool.end(), Index{0});
            for (std::size_t t = 0; t < count; ++t) {
                std::swap(pool[t], pool[t + bounded_rand(rng, pool.size() - t)]);
            }
            prefixed.assign(pool.begin(), pool.begin() + count);
        }
        VertexCover c = greedy_vertex_cover(g, mix_seed(restart_seed, 1), prefixed);
        c = trim_cover(g, c, mix_seed(restart_seed, 2));
        masses[l] = score_cover_mass(c, a, b, params);
        covers[l] = std::move(c);
    }

    CoverSelection out;
    out.size_mass.reserve(n_covers);
    std::size_t best = 0;
    for (int l = 0; l < n_covers; ++l) {
        out.size_mass.push_back({covers[l].size(), masses[l]});
        if (masses[l] > masses[best]) best = static_cast<std::size_t>(l);
    }
    out.best_index = best;
    out.mass = masses[best];
    out.pattern = covers[best].to_pattern();
    return out;
}

}  // namespace sgwot
