#include "core/shapes.hpp"

#include <cmath>

#include "core/util.hpp"

namespace rivlab {

double periodic_delta(double x, double c, double L) { return std::remainder(x - c, L); }

double periodic_distance(const std::array<double, 3>& a, const std::array<double, 3>& b,
                         double L) {
    const double dx = periodic_delta(a[0], b[0], L);
    const double dy = periodic_delta(a[1], b[1], L);
    const double dz = periodic_delta(a[2], b[2], L);
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

namespace {

template <typename Fn>
ScalarField3 sample(const GridSpec& g, Fn&& fn) {
    ScalarField3 f(g);
    const double h = g.spacing();
#pragma omp parallel for schedule(static)
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix)
                f.at(ix, iy, iz) = fn(ix * h, iy * h, iz * h);
    return f;
}

}  // namespace

ScalarField3 ball_field(const GridSpec& g, const std::array<double, 3>& center, double radius) {
    const double L = g.domain_length;
    return sample(g, [&](double x, double y, double z) {
        return radius - periodic_distance({x, y, z}, center, L);
    });
}

ScalarField3 box_field(const GridSpec& g, const std::array<double, 3>& center,
                       const std::array<double, 3>& half_widths) {
    const double L = g.domain_length;
    return sample(g, [&](double x, double y, double z) {
        const double dx = half_widths[0] - std::fabs(periodic_delta(x, center[0], L));
        const double dy = half_widths[1] - std::fabs(periodic_delta(y, center[1], L));
        const double dz = half_widths[2] - std::fabs(periodic_delta(z, center[2], L));
        return std::min({dx, dy, dz});
    });
}

ScalarField3 torus_field(const GridSpec& g, const std::array<double, 3>& center,
                         double major_radius, double tube_radius, int axis) {
    const double L = g.domain_length;
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    return sample(g, [&](double x, double y, double z) {
        const double p[3] = {x, y, z};
        const double c[3] = {center[0], center[1], center[2]};
        const double du = periodic_delta(p[a1], c[a1], L);
        const double dv = periodic_delta(p[a2], c[a2], L);
        const double dw = periodic_delta(p[axis], c[axis], L);
        const double ring = std::sqrt(du * du + dv * dv) - major_radius;
        return tube_radius - std::sqrt(ring * ring + dw * dw);
    });
}

BinaryMask ball_mask(const GridSpec& g, const std::array<double, 3>& center, double radius) {
    BinaryMask m(g);
    const double h = g.spacing();
    const double L = g.domain_length;
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix)
                m.set(g.index(ix, iy, iz),
                      periodic_distance({ix * h, iy * h, iz * h}, center, L) < radius);
    return m;
}

BinaryMask halfspace_mask(const GridSpec& g, int axis, double plane) {
    BinaryMask m(g);
    const double h = g.spacing();
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                const double c[3] = {ix * h, iy * h, iz * h};
                m.set(g.index(ix, iy, iz), c[axis] < plane);
            }
    return m;
}

BinaryMask slab_mask(const GridSpec& g, int axis, double lo, double hi) {
    BinaryMask m(g);
    const double h = g.spacing();
    for (int iz = 0; iz < g.n; ++iz)
        for (int iy = 0; iy < g.n; ++iy)
            for (int ix = 0; ix < g.n; ++ix) {
                const double c[3] = {ix * h, iy * h, iz * h};
                m.set(g.index(ix, iy, iz), c[axis] >= lo && c[axis] < hi);
            }
    return m;
}

ScalarField3 random_blob_field(const GridSpec& g, uint64_t seed, int n_modes,
                               int max_wavenumber) {
    Rng rng(seed);
    struct Mode {
        double kx, ky, kz, amp, phase;
    };
    std::vector<Mode> modes(static_cast<size_t>(n_modes));
    const double k0 = 2.0 * M_PI / g.domain_length;
    for (auto& m : modes) {
        m.kx = k0 * double(int(rng.uniform_index(uint64_t(2 * max_wavenumber + 1))) - max_wavenumber);
        m.ky = k0 * double(int(rng.uniform_index(uint64_t(2 * max_wavenumber + 1))) - max_wavenumber);
        m.kz = k0 * double(int(rng.uniform_index(uint64_t(2 * max_wavenumber + 1))) - max_wavenumber);
        m.amp = rng.uniform(-1.0, 1.0);
        m.phase = rng.uniform(0.0, 2.0 * M_PI);
    }
    return sample(g, [&](double x, double y, double z) {
        double s = 0.0;
        for (const auto& m : modes)
            s += m.amp * std::cos(m.kx * x + m.ky * y + m.kz * z + m.phase);
        return s;
    });
}

}  // namespace rivlab
