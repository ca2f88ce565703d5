#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "core/field.hpp"
#include "core/levelsets.hpp"

namespace rivlab {

struct TriangleMesh {
    std::vector<std::array<double, 3>> vertices;
    std::vector<std::array<int, 3>> triangles;
    /// True when every edge is shared by exactly two consistently wound
    /// triangles; assembled RIV meshes may legitimately be false.
    bool orientable = false;

    bool empty() const { return triangles.empty(); }
    double surface_area() const;
};

/// Marching-cubes surface of {s = level} over the full periodic grid.
/// Cells wrap across box faces, so a surface crossing a face continues into
/// coordinates just past L rather than being clipped. The mesh is empty when
/// the level is outside the field's range.
TriangleMesh extract_isosurface(const ScalarField3& s, double level);

/// Surface of one RIV, meshed over the wrapped extended block of its bbox
/// plus a one-cell margin, in unwrapped physical coordinates (the block frame
/// may extend past [0, L)). Voxels above the level that belong to other
/// components are clamped below the level so only this RIV's surface appears.
struct RivSurface {
    TriangleMesh mesh;
    std::array<int, 3> block_origin{0, 0, 0};  // grid index of block voxel (0,0,0)
    std::array<int, 3> block_size{0, 0, 0};    // voxel planes per axis
    /// Component-clamped samples on the block lattice (other components
    /// pushed below the level); x-fastest within the block.
    std::vector<double> block_values;
    double level = 0.0;

    /// Trilinear interpolation of the clamped block field at a point in the
    /// unwrapped block frame. Returns -infinity outside the block lattice.
    double interpolate_block(const std::array<double, 3>& p, double spacing) const;
};
RivSurface extract_riv_surface(const Riv& riv, const ScalarField3& s, double level);

/// ASCII OBJ with 1-based indices.
void export_obj(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace rivlab
