#pragma once

#include "sgwot/types.hpp"

#include <utility>
#include <vector>

namespace sgwot {

struct PointCloud {
    Matrix coords;  // one point per row

    Index size() const { return coords.rows(); }
    Index dim() const { return coords.cols(); }
};

/// Weighted undirected graph; edge weights are Euclidean distances.
struct NeighborGraph {
    Index n = 0;
    std::vector<std::vector<std::pair<Index, double>>> adj;  // sorted by neighbor index

    std::size_t edge_count() const;
};

/// Exact k-nearest-neighbor graph, union-symmetrized. Duplicate points get
/// edges of weight tol_edge instead of 0.
NeighborGraph knn_graph(const PointCloud& pc, int k, double tol_edge = 1e-12);

/// All-pairs shortest-path distances. Throws if the graph is disconnected,
/// naming the components.
DistanceMatrix geodesic_distance_matrix(const NeighborGraph& g);

/// Divides both matrices by max(d1).
std::pair<DistanceMatrix, DistanceMatrix> normalize_distances(const DistanceMatrix& d1,
                                                              const DistanceMatrix& d2);

/// l^p distance between two vectors of equal length, p >= 1.
double row_distance(const Vector& u, const Vector& v, double p = 2.0);

}  // namespace sgwot
