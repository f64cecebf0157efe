#include "sgwot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sgwot {

std::size_t NeighborGraph::edge_count() const {
    std::size_t twice = 0;
    for (const auto& nbrs : adj) twice += nbrs.size();
    return twice / 2;
}

NeighborGraph knn_graph(const PointCloud& pc, int k, double tol_edge) {
    const Index n = pc.size();
    if (n < 1) throw std::invalid_argument("point cloud is empty");
    if (k < 1 || k >= n) {
        throw std::invalid_argument("k must satisfy 1 <= k < n");
    }

    Matrix dist(n, n);
    for (Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
            const double d = (pc.coords.row(i) - pc.coords.row(j)).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }

    // Union symmetrization: keep (i,j) if it is a kNN edge in either direction.
    std::set<std::pair<Index, Index>> edges;
    std::vector<Index> order;
    for (Index i = 0; i < n; ++i) {
        order.resize(n);
        std::iota(order.begin(), order.end(), Index{0});
        order.erase(order.begin() + i);
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
            return std::make_pair(dist(i, a), a) < std::make_pair(dist(i, b), b);
        });
        for (int t = 0; t < k; ++t) {
            const Index j = order[t];
            edges.insert({std::min(i, j), std::max(i, j)});
        }
    }

    NeighborGraph g;
    g.n = n;
    g.adj.resize(n);
    for (const auto& [i, j] : edges) {
        const double w = std::max(dist(i, j), tol_edge);
        g.adj[i].push_back({j, w});
        g.adj[j].push_back({i, w});
    }
    for (auto& nbrs : g.adj) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

namespace {

std::vector<int> connected_components(const NeighborGraph& g) {
    std::vector<int> comp(g.n, -1);
    int next = 0;
    std::vector<Index> stack;
    for (Index s = 0; s < g.n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            const Index v = stack.back();
            stack.pop_back();
            for (const auto& [u, w] : g.adj[v]) {
                if (comp[u] < 0) {
                    comp[u] = next;
                    stack.push_back(u);
                }
            }
        }
        ++next;
    }
    return comp;
}

void dijkstra(const NeighborGraph& g, Index source, double* out) {
    using Item = std::pair<double, Index>;
    std::fill(out, out + g.n, kInf);
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    out[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > out[v]) continue;
        for (const auto& [u, w] : g.adj[v]) {
            const double cand = d + w;
            if (cand < out[u]) {
                out[u] = cand;
                heap.push({cand, u});
            }
        }
    }
}

}  // namespace

DistanceMatrix geodesic_distance_matrix(const NeighborGraph& g) {
    if (g.n < 1) throw std::invalid_argument("graph is empty");

    const auto comp = connected_components(g);
    const int n_comp = *std::max_element(comp.begin(), comp.end()) + 1;
    if (n_comp > 1) {
        std::vector<std::size_t> sizes(n_comp, 0);
        for (int c : comp) ++sizes[c];
        std::ostringstream msg;
        msg << "graph is disconnected: " << n_comp << " components with sizes [";
        for (int c = 0; c < n_comp; ++c) msg << (c ? ", " : "") << sizes[c];
        msg << "]";
        throw std::runtime_error(msg.str());
    }

    Matrix d(g.n, g.n);
#pragma omp parallel for schedule(dynamic)
    for (Index s = 0; s < g.n; ++s) {
        dijkstra(g, s, d.col(s).data());
    }
    // Per-source runs can differ in the last bit between (i,j) and (j,i);
    // the elementwise min restores exact symmetry.
    Matrix sym = d.cwiseMin(d.transpose());
    return DistanceMatrix(std::move(sym));
}

std::pair<DistanceMatrix, DistanceMatrix> normalize_distances(const DistanceMatrix& d1,
                                                              const DistanceMatrix& d2) {
    const double scale = d1.max();
    if (!(scale > 0.0)) {
        throw std::runtime_error("cannot normalize: max(d1) is zero (degenerate space)");
    }
    Matrix a = d1.values() / scale;
    Matrix b = d2.values() / scale;
    return {DistanceMatrix(std::move(a)), DistanceMatrix(std::move(b))};
}

double row_distance(const Vector& u, const Vector& v, double p) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("row_distance: vector lengths differ");
    }
    if (!(p >= 1.0) || std::isinf(p)) {
        throw std::invalid_argument("row_distance: norm order must be finite and >= 1");
    }
    if (p == 2.0) return (u - v).norm();
    if (p == 1.0) return (u - v).cwiseAbs().sum();
    double acc = 0.0;
    for (Index i = 0; i < u.size(); ++i) {
        acc += std::pow(std::abs(u[i] - v[i]), p);
    }
    return std::pow(acc, 1.0 / p);
}

}  // namespace sgwot
