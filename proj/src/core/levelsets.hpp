#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/field.hpp"

namespace rivlab {

/// Voxel indicator with periodic adjacency semantics, x-fastest order.
struct BinaryMask {
    GridSpec grid;
    std::vector<uint8_t> bits;

    BinaryMask() = default;
    explicit BinaryMask(const GridSpec& g) : grid(g), bits(g.point_count(), 0) {}

    bool test(size_t i) const { return bits[i] != 0; }
    void set(size_t i, bool v = true) { bits[i] = v ? 1 : 0; }
    size_t count_set() const;
};

/// Axis-aligned bounding box under periodic wrapping: the box starts at
/// `anchor` and spans `extent` voxels per axis (extent <= n). Coordinates
/// inside the box may exceed n-1 before wrapping.
struct PeriodicBBox {
    std::array<int, 3> anchor{0, 0, 0};
    std::array<int, 3> extent{0, 0, 0};
};

/// One periodic-connected component of a super-level set.
struct Riv {
    int component_id = -1;
    std::vector<size_t> voxels;  // linear indices, ascending
    PeriodicBBox bbox;
    int source_component = -1;  // 0..5 = f1+, f1-, f2+, f2-, f3+, f3-
    double threshold = 0.0;
};

const char* component_name(int source_component);  // "f1+", "f1-", ...

/// Positive and negative parts of the three components:
/// out[2i] = max(f_i, 0), out[2i+1] = max(-f_i, 0).
std::array<ScalarField3, 6> component_parts(const VectorField3& f);

/// Pointwise max-norm magnitude max{|f_x|,|f_y|,|f_z|}.
ScalarField3 max_norm_field(const VectorField3& f);

/// Bit set exactly where sample > cut (strict).
BinaryMask superlevel_mask(const ScalarField3& s, double cut);

/// Union of masks (grids must match).
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);

/// Maximal connected components under periodic adjacency.
/// connectivity is 6 (faces) or 26 (faces+edges+corners). Components are
/// ordered by decreasing voxel count, ties by smallest linear index.
std::vector<Riv> connected_components(const BinaryMask& mask, int connectivity = 26);

/// Volume fraction of the periodic ball B(x0, r) covered by the mask,
/// estimated by voxel counting with 4^3 subcell refinement for voxels within
/// one cell diagonal of the sphere surface. Requires 0 < r < L/2.
double sparseness_ratio(const BinaryMask& mask, const std::array<double, 3>& x0, double r);

struct ZAlphaParams {
    double lambda = 0.5;  // level fraction in (0,1)
    double delta = 0.5;   // sparseness fraction in (0,1)
    double c0 = 2.0;      // tolerance factor > 1
    double alpha = 0.5;   // positive exponent
    int scale_samples = 16;
    bool restrict_to_active = false;  // skip x0 with ||f(x0)|| < lambda*||f||_inf

    void check() const;
};

struct ZAlphaResult {
    bool verdict = false;
    bool degenerate = false;  // ||f||_inf == 0: vacuously true
    double f_max = 0.0;
    double scale_lo = 0.0;
    double scale_hi = 0.0;
    // worst grid point: the one whose best achieved ratio is largest
    std::array<int, 3> worst_voxel{0, 0, 0};
    double worst_ratio = 0.0;
    int worst_component = -1;
    size_t points_checked = 0;
};

/// For every grid point x0, selects the locally maximal component part
/// (ties broken in f1+, f1-, f2+, f2-, f3+, f3- order), forms its super-level
/// mask at lambda*||f||_inf and searches 16 geometrically spaced scales in
/// [(1/c0), c0] * ||f||_inf^-alpha for one where the mask is delta-sparse
/// around x0. Scales are tried from largest to smallest with early exit, so
/// for passing points the recorded ratio is the first sufficient one.
ZAlphaResult z_alpha_check(const VectorField3& f, const ZAlphaParams& params);

/// Full component super-level inventory of a field at level lambda*||f||_inf.
struct RivExtraction {
    double f_max = 0.0;
    double cut = 0.0;
    std::array<BinaryMask, 6> masks;
    std::vector<Riv> rivs;  // pooled over the six masks, canonically ordered
};
RivExtraction extract_rivs(const VectorField3& f, double lambda, int connectivity = 26);

}  // namespace rivlab
