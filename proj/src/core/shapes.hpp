#pragma once

#include <array>
#include <cstdint>

#include "core/field.hpp"
#include "core/levelsets.hpp"

namespace rivlab {

/// Periodic displacement of x from c (minimum image), per axis.
double periodic_delta(double x, double c, double L);
/// Periodic Euclidean distance.
double periodic_distance(const std::array<double, 3>& a, const std::array<double, 3>& b,
                         double L);

/// Signed "inside-positive" fields whose zero level set is the named shape.
/// All of them wrap periodically.
ScalarField3 ball_field(const GridSpec& g, const std::array<double, 3>& center, double radius);
ScalarField3 box_field(const GridSpec& g, const std::array<double, 3>& center,
                       const std::array<double, 3>& half_widths);
/// Solid torus around an axis-aligned circle (axis = 0,1,2 is the symmetry
/// axis); tube_radius is the inscribed-sphere radius of the solid.
ScalarField3 torus_field(const GridSpec& g, const std::array<double, 3>& center,
                         double major_radius, double tube_radius, int axis = 2);

/// Masks built by exact membership tests on voxel centers.
BinaryMask ball_mask(const GridSpec& g, const std::array<double, 3>& center, double radius);
/// {x : coord(axis) < plane} as literal coordinates (no wrapping).
BinaryMask halfspace_mask(const GridSpec& g, int axis, double plane);
/// {x : lo <= coord(axis) < hi}.
BinaryMask slab_mask(const GridSpec& g, int axis, double lo, double hi);

/// Smooth periodic pseudo-random field: a seeded sum of low-wavenumber
/// cosines. Deterministic across platforms.
ScalarField3 random_blob_field(const GridSpec& g, uint64_t seed, int n_modes = 16,
                               int max_wavenumber = 4);

}  // namespace rivlab
