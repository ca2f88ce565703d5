#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace rivlab {

/// Uniform periodic N^3 grid over a cube of side `domain_length`.
/// Samples live at x_i = i * spacing, i = 0..n-1; index arithmetic wraps.
struct GridSpec {
    int n = 0;
    double domain_length = 0.0;

    GridSpec() = default;
    GridSpec(int n_, double domain_length_);

    double spacing() const { return domain_length / n; }
    size_t point_count() const { return size_t(n) * size_t(n) * size_t(n); }

    /// x-fastest linear index.
    size_t index(int ix, int iy, int iz) const {
        return size_t(ix) + size_t(n) * (size_t(iy) + size_t(n) * size_t(iz));
    }
    size_t wrap_index(int ix, int iy, int iz) const {
        return index(wrap(ix), wrap(iy), wrap(iz));
    }
    int wrap(int i) const {
        i %= n;
        return i < 0 ? i + n : i;
    }
    /// Physical coordinate of grid plane i along any axis.
    double coord(int i) const { return spacing() * i; }

    bool operator==(const GridSpec&) const = default;
};

/// Scalar samples on a GridSpec, x-fastest row-major.
struct ScalarField3 {
    GridSpec grid;
    std::vector<double> values;

    ScalarField3() = default;
    explicit ScalarField3(const GridSpec& g, double fill = 0.0)
        : grid(g), values(g.point_count(), fill) {}

    double& at(int ix, int iy, int iz) { return values[grid.index(ix, iy, iz)]; }
    double at(int ix, int iy, int iz) const { return values[grid.index(ix, iy, iz)]; }
    double at_wrapped(int ix, int iy, int iz) const {
        return values[grid.wrap_index(ix, iy, iz)];
    }

    /// Trilinear interpolation at a physical point, periodic.
    double interpolate(double x, double y, double z) const;

    bool all_finite() const;
};

/// Three scalar components sharing one grid.
struct VectorField3 {
    GridSpec grid;
    std::array<ScalarField3, 3> comp;

    VectorField3() = default;
    explicit VectorField3(const GridSpec& g)
        : grid(g), comp{ScalarField3(g), ScalarField3(g), ScalarField3(g)} {}

    ScalarField3& operator[](int i) { return comp[size_t(i)]; }
    const ScalarField3& operator[](int i) const { return comp[size_t(i)]; }

    bool all_finite() const;
};

/// Throws std::invalid_argument when a field violates its invariants
/// (grid mismatch, wrong sample count, non-finite values).
void validate(const ScalarField3& f, const char* what);
void validate(const VectorField3& f, const char* what);

/// Grid maximum of the pointwise max-norm max{|u_x|,|u_y|,|u_z|}.
/// Deterministic fixed-order reduction.
double max_norm(const VectorField3& u);

/// Grid maximum of |s|.
double max_abs(const ScalarField3& s);

/// Kinetic energy (1/2) * integral of |u|^2 over the box (trapezoid-exact for
/// periodic sampling). Deterministic z-plane-sliced reduction.
double kinetic_energy(const VectorField3& u);

}  // namespace rivlab
