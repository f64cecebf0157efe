#pragma once

#include "sgwot/types.hpp"

#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

namespace sgwot {

/// Graph on coupling entries v_ij; an edge joins two entries that cannot both
/// be positive. Adjacency is stored as bitset rows with cached degrees.
class ConflictGraph {
public:
    ConflictGraph(Index rows, Index cols);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index vertex_count() const { return nv_; }
    std::size_t edge_count() const { return edge_count_; }
    Index degree(Index v) const { return degree_[v]; }

    Index vertex(Index i, Index j) const { return i * cols_ + j; }
    std::pair<Index, Index> entry(Index v) const { return {v / cols_, v % cols_}; }

    bool has_edge(Index v, Index w) const {
        return (adj_[static_cast<std::size_t>(v) * words_ + (w >> 6)] >> (w & 63)) & 1u;
    }

    Index words_per_row() const { return words_; }
    const std::uint64_t* row(Index v) const { return adj_.data() + static_cast<std::size_t>(v) * words_; }

    /// Visits the neighbors of v intersected with an optional word mask.
    template <typename Fn>
    void for_each_neighbor(Index v, const std::uint64_t* mask, Fn&& fn) const {
        const std::uint64_t* r = row(v);
        for (Index w = 0; w < words_; ++w) {
            std::uint64_t bits = mask != nullptr ? (r[w] & mask[w]) : r[w];
            while (bits != 0) {
                const int b = std::countr_zero(bits);
                bits &= bits - 1;
                fn(static_cast<Index>((w << 6) + b));
            }
        }
    }

    friend ConflictGraph build_conflict_graph(const DistanceMatrix& d1, const DistanceMatrix& d2,
                                              double rho, bool threshold_squared);
    friend ConflictGraph graph_from_edges(Index rows, Index cols,
                                          const std::vector<std::pair<Index, Index>>& edges);

private:
    void set_edge(Index v, Index w);
    void finalize_degrees();

    Index rows_ = 0, cols_ = 0;
    Index nv_ = 0;
    Index words_ = 0;
    std::vector<std::uint64_t> adj_;
    std::vector<Index> degree_;
    std::size_t edge_count_ = 0;
};

/// Edge (v_ij, v_kl) present iff |d1_ik - d2_jl| > rho, or (d1_ik - d2_jl)^2 > rho
/// when threshold_squared is set.
ConflictGraph build_conflict_graph(const DistanceMatrix& d1, const DistanceMatrix& d2, double rho,
                                   bool threshold_squared = false);

/// Small-graph constructor used by tests and tools.
ConflictGraph graph_from_edges(Index rows, Index cols,
                               const std::vector<std::pair<Index, Index>>& edges);

struct VertexCover {
    Index rows = 0, cols = 0;
    std::vector<Index> vertices;  // sorted
    bool is_minimal = false;

    std::size_t size() const { return vertices.size(); }
    ZeroPattern to_pattern() const;
};

/// Returns true when every edge of g has an endpoint in the cover.
bool is_vertex_cover(const ConflictGraph& g, const VertexCover& c);

/// Randomized greedy cover: repeatedly delete a uniformly random vertex of
/// maximum degree. Prefixed vertices are placed in the cover up front.
VertexCover greedy_vertex_cover(const ConflictGraph& g, std::uint64_t seed,
                                const std::vector<Index>& prefixed = {});

/// Drops redundant cover members in seeded random order until the cover is
/// minimal. Throws if the input is not a cover.
VertexCover trim_cover(const ConflictGraph& g, const VertexCover& c, std::uint64_t seed);

/// Maximal transportable mass under the cover's zero pattern, computed with an
/// all-one cost (the mass does not depend on the finite cost form).
double score_cover_mass(const VertexCover& c, const Marginal& a, const Marginal& b,
                        const SolverParams& params);

struct CoverSelection {
    ZeroPattern pattern;
    double mass = 0.0;
    std::vector<std::pair<std::size_t, double>> size_mass;  // per restart
    std::size_t best_index = 0;
};

/// Runs n_covers greedy+trim restarts on independent seeded streams, scores
/// each cover, and keeps the pattern with the largest transported mass.
CoverSelection select_zero_pattern(const ConflictGraph& g, const Marginal& a, const Marginal& b,
                                   const SolverParams& params);

}  // namespace sgwot
