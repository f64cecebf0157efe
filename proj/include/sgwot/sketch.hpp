#pragma once

#include "sgwot/geometry.hpp"
#include "sgwot/sot.hpp"
#include "sgwot/types.hpp"

#include <cstdint>
#include <vector>

namespace sgwot {

/// Downsampled view of a point cloud: representative coordinates, for each
/// representative the nearest original point, and for each original point the
/// representative it is assigned to.
struct Sketch {
    Matrix rep_coords;                  // one representative per row
    std::vector<Index> rep_point;       // nearest original point per representative
    std::vector<Index> assignment;      // original point -> representative

    Index size() const { return rep_coords.rows(); }
};

/// Tiles the bounding box with axis-aligned boxes of side box_size and keeps
/// one uniformly random point per nonempty box.
Sketch grid_sketch(const PointCloud& pc, double box_size, std::uint64_t seed);

struct MapperOptions {
    double cube_size = 1.0;
    double overlap = 0.25;       // in [0, 0.5]
    int gap_bins = 10;           // histogram bins for the linkage gap cut
    double tol_merge = 1e-8;     // centroids closer than this collapse to one
};

/// Overlapping-hypercube cover; per-cube single linkage with a distance-gap
/// cut; output is the deduplicated cluster centroids.
Sketch mapper_sketch(const PointCloud& pc, const MapperOptions& opts, std::uint64_t seed);

struct RecoverOptions {
    double norm_order = 2.0;        // p of the row distance
    double block_percentile = 1.0;  // < 1 blocks cost entries above this quantile
};

struct RecoverResult {
    Coupling coupling;
    Matrix cost;  // C1 + C2
    std::size_t unmatched_rows = 0;  // sketch points with zero plan mass
    std::size_t unmatched_cols = 0;
    SotTrace trace;
};

/// Recovers a full-dataset coupling from a downsampled plan p_hat. dhat1 and
/// dhat2 hold geodesic distances from every point to the sketch points
/// (n x n_hat and m x m_hat). Solves one sOT problem with uniform marginals
/// at params.epsilon.
RecoverResult recover_full_coupling(const Matrix& p_hat, const Matrix& dhat1, const Matrix& dhat2,
                                    const SolverParams& params, const RecoverOptions& opts = {});

}  // namespace sgwot
