#pragma once

#include <array>
#include <optional>
#include <vector>

#include "core/aabb.hpp"
#include "core/isosurface.hpp"
#include "core/levelsets.hpp"

namespace rivlab {

struct RefineParams {
    int levels = 3;              // recursive refinement passes
    int zoom = 2;                // resolution multiplier per pass
    double neighborhood = 2.0;   // half-width around the maximizer, in cells
                                 // of the previous (coarser) level
};

struct InscribedSphereResult {
    std::array<double, 3> center{0, 0, 0};  // box coordinates in [0, L)
    double radius = 0.0;
    int riv_id = -1;
    int refinement_depth = 0;
    bool sub_voxel = false;  // RIV thinner than one voxel: radius < spacing
    bool pruned = false;     // skipped by the bbox bound in the aggregate search
};

/// Largest sphere inscribed in one RIV: meshes the RIV isosurface, evaluates
/// mesh distances at the RIV's voxel centers (all interior by membership),
/// then recursively refines a shrinking neighborhood of the maximizer.
/// Distances always come from the mesh; candidate points are confirmed
/// interior by trilinear field interpolation. The radius estimate is
/// non-decreasing across refinement levels.
InscribedSphereResult max_inscribed_radius(const Riv& riv, const ScalarField3& s, double level,
                                           const RefineParams& rp = {});

/// Exact periodic Euclidean distance transform: distance from each interior
/// (set) voxel center to the nearest exterior voxel center. Exterior voxels
/// hold 0. Throws "no exterior voxels" for the full mask.
ScalarField3 voxel_distance_oracle(const BinaryMask& mask);

enum class PrunePolicy {
    Exhaustive,  // evaluate every RIV
    Standard,    // skip RIVs whose bbox cannot hold a sphere of the best radius
    SkipAll,     // fault injection: skip everything
};

struct MaxRadiusOutcome {
    InscribedSphereResult best;
    std::vector<InscribedSphereResult> per_riv;  // in processing order
};

/// Greatest inscribed radius over a set of RIVs, processed in decreasing
/// bbox-inradius order. With PrunePolicy::Standard, RIVs whose bbox cannot
/// contain a sphere of the current best radius are skipped; the result is
/// identical to exhaustive evaluation.
MaxRadiusOutcome max_radius_over_rivs(const std::vector<Riv>& rivs,
                                      const std::array<ScalarField3, 6>& sources, double level,
                                      PrunePolicy policy = PrunePolicy::Standard,
                                      const RefineParams& rp = {});

}  // namespace rivlab
