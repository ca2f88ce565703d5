#include "core/field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rivlab {

GridSpec::GridSpec(int n_, double domain_length_) : n(n_), domain_length(domain_length_) {
    if (n < 4 || n % 2 != 0)
        throw std::invalid_argument("grid n must be even and >= 4, got " + std::to_string(n));
    if (!(domain_length > 0.0) || !std::isfinite(domain_length))
        throw std::invalid_argument("domain_length must be positive and finite");
}

double ScalarField3::interpolate(double x, double y, double z) const {
    const int n = grid.n;
    const double h = grid.spacing();
    const double fx = x / h, fy = y / h, fz = z / h;
    const int ix = int(std::floor(fx)), iy = int(std::floor(fy)), iz = int(std::floor(fz));
    const double tx = fx - ix, ty = fy - iy, tz = fz - iz;
    const int x0 = grid.wrap(ix), x1 = grid.wrap(ix + 1);
    const int y0 = grid.wrap(iy), y1 = grid.wrap(iy + 1);
    const int z0 = grid.wrap(iz), z1 = grid.wrap(iz + 1);
    (void)n;
    const double c000 = at(x0, y0, z0), c100 = at(x1, y0, z0);
    const double c010 = at(x0, y1, z0), c110 = at(x1, y1, z0);
    const double c001 = at(x0, y0, z1), c101 = at(x1, y0, z1);
    const double c011 = at(x0, y1, z1), c111 = at(x1, y1, z1);
    const double c00 = c000 + tx * (c100 - c000);
    const double c10 = c010 + tx * (c110 - c010);
    const double c01 = c001 + tx * (c101 - c001);
    const double c11 = c011 + tx * (c111 - c011);
    const double c0 = c00 + ty * (c10 - c00);
    const double c1 = c01 + ty * (c11 - c01);
    return c0 + tz * (c1 - c0);
}

bool ScalarField3::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

bool VectorField3::all_finite() const {
    return comp[0].all_finite() && comp[1].all_finite() && comp[2].all_finite();
}

void validate(const ScalarField3& f, const char* what) {
    if (f.grid.n < 4 || f.grid.n % 2 != 0)
        throw std::invalid_argument(std::string(what) + ": invalid grid");
    if (f.values.size() != f.grid.point_count())
        throw std::invalid_argument(std::string(what) + ": sample count does not match grid");
    if (!f.all_finite())
        throw std::invalid_argument(std::string(what) + ": non-finite sample values");
}

void validate(const VectorField3& f, const char* what) {
    for (int c = 0; c < 3; ++c) {
        validate(f[c], what);
        if (!(f[c].grid == f.grid))
            throw std::invalid_argument(std::string(what) + ": component grid mismatch");
    }
}

namespace {

// Max over one z-plane; plane results are combined in plane order so the
// reduction is independent of thread count.
template <typename PlaneFn>
double plane_max(const GridSpec& g, PlaneFn&& fn) {
    const int n = g.n;
    std::vector<double> partial(size_t(n), 0.0);
#pragma omp parallel for schedule(static)
    for (int iz = 0; iz < n; ++iz) partial[size_t(iz)] = fn(iz);
    double best = 0.0;
    for (double p : partial) best = best > p ? best : p;
    return best;
}

}  // namespace

double max_norm(const VectorField3& u) {
    const int n = u.grid.n;
    const size_t plane = size_t(n) * size_t(n);
    const double* ux = u[0].values.data();
    const double* uy = u[1].values.data();
    const double* uz = u[2].values.data();
    return plane_max(u.grid, [&](int iz) {
        const size_t base = plane * size_t(iz);
        double m = 0.0;
        for (size_t i = base; i < base + plane; ++i) {
            const double a = std::fabs(ux[i]);
            const double b = std::fabs(uy[i]);
            const double c = std::fabs(uz[i]);
            double p = a > b ? a : b;
            p = p > c ? p : c;
            m = m > p ? m : p;
        }
        return m;
    });
}

double max_abs(const ScalarField3& s) {
    const int n = s.grid.n;
    const size_t plane = size_t(n) * size_t(n);
    const double* v = s.values.data();
    return plane_max(s.grid, [&](int iz) {
        const size_t base = plane * size_t(iz);
        double m = 0.0;
        for (size_t i = base; i < base + plane; ++i) {
            const double a = std::fabs(v[i]);
            m = m > a ? m : a;
        }
        return m;
    });
}

double kinetic_energy(const VectorField3& u) {
    const int n = u.grid.n;
    const size_t plane = size_t(n) * size_t(n);
    const double* ux = u[0].values.data();
    const double* uy = u[1].values.data();
    const double* uz = u[2].values.data();
    std::vector<double> partial(size_t(n), 0.0);
#pragma omp parallel for schedule(static)
    for (int iz = 0; iz < n; ++iz) {
        const size_t base = plane * size_t(iz);
        double s = 0.0;
        for (size_t i = base; i < base + plane; ++i)
            s += ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i];
        partial[size_t(iz)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;  // fixed plane order
    const double cell = u.grid.spacing() * u.grid.spacing() * u.grid.spacing();
    return 0.5 * total * cell;
}

}  // namespace rivlab
