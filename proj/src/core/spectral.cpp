#include "core/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace rivlab {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

using RealBuf = std::unique_ptr<double[], FftwDeleter>;
using ComplexBuf = std::unique_ptr<fftw_complex[], FftwDeleter>;

RealBuf alloc_real(size_t n) {
    return RealBuf(static_cast<double*>(fftw_malloc(n * sizeof(double))));
}
ComplexBuf alloc_complex(size_t n) {
    return ComplexBuf(static_cast<fftw_complex*>(fftw_malloc(n * sizeof(fftw_complex))));
}

}  // namespace

struct Spectral::Plans {
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;
    size_t nreal = 0;
    size_t nspec = 0;

    ~Plans() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (r2c) fftw_destroy_plan(r2c);
        if (c2r) fftw_destroy_plan(c2r);
    }
};

Spectral::Spectral(const GridSpec& g) : grid_(g), plans_(std::make_unique<Plans>()) {
    const int n = g.n;
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("Spectral: grid n must be even, >= 4");
    plans_->nreal = g.point_count();
    plans_->nspec = size_t(n / 2 + 1) * size_t(n) * size_t(n);

    RealBuf real = alloc_real(plans_->nreal);
    ComplexBuf spec = alloc_complex(plans_->nspec);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // x-fastest storage means FFTW's row-major dims are (z, y, x).
    plans_->r2c = fftw_plan_dft_r2c_3d(n, n, n, real.get(), spec.get(), FFTW_ESTIMATE);
    plans_->c2r = fftw_plan_dft_c2r_3d(n, n, n, spec.get(), real.get(), FFTW_ESTIMATE);
    if (!plans_->r2c || !plans_->c2r) throw std::runtime_error("FFTW plan creation failed");
}

Spectral::~Spectral() = default;

size_t Spectral::mode_count() const { return plans_->nspec; }

void Spectral::forward_raw(const double* in, std::complex<double>* out) const {
    // FFTW's out-of-place r2c preserves its input; the API just isn't const.
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void Spectral::inverse_raw(std::complex<double>* in, double* out) const {
    fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(in), out);
}

namespace {

bool fftw_aligned(const void* p) { return (reinterpret_cast<uintptr_t>(p) & 0xF) == 0; }

}  // namespace

SpectralField Spectral::forward(const ScalarField3& f) const {
    validate(f, "spectral forward");
    if (!(f.grid == grid_)) throw std::invalid_argument("spectral forward: grid mismatch");
    SpectralField out(grid_);
    if (fftw_aligned(f.values.data()) && fftw_aligned(out.modes.data())) {
        forward_raw(f.values.data(), out.modes.data());
    } else {
        RealBuf in = alloc_real(plans_->nreal);
        ComplexBuf sp = alloc_complex(plans_->nspec);
        std::memcpy(in.get(), f.values.data(), plans_->nreal * sizeof(double));
        fftw_execute_dft_r2c(plans_->r2c, in.get(), sp.get());
        std::memcpy(out.modes.data(), sp.get(), plans_->nspec * sizeof(fftw_complex));
    }
    return out;
}

ScalarField3 Spectral::inverse(const SpectralField& f) const {
    if (!(f.grid == grid_)) throw std::invalid_argument("spectral inverse: grid mismatch");
    ScalarField3 out(grid_);
    // c2r destroys its input, so always work on a scratch copy.
    ComplexBuf sp = alloc_complex(plans_->nspec);
    std::memcpy(sp.get(), f.modes.data(), plans_->nspec * sizeof(fftw_complex));
    if (fftw_aligned(out.values.data())) {
        fftw_execute_dft_c2r(plans_->c2r, sp.get(), out.values.data());
    } else {
        RealBuf re = alloc_real(plans_->nreal);
        fftw_execute_dft_c2r(plans_->c2r, sp.get(), re.get());
        std::memcpy(out.values.data(), re.get(), plans_->nreal * sizeof(double));
    }
    const double scale = 1.0 / double(grid_.point_count());
    for (double& v : out.values) v *= scale;
    return out;
}

// --- spectral-space operators -------------------------------------------------

namespace {

template <typename Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
    const int n = g.n;
    const int nx = n / 2 + 1;
#pragma omp parallel for schedule(static)
    for (int kz = 0; kz < n; ++kz) {
        const int skz = kz <= n / 2 ? kz : kz - n;
        for (int ky = 0; ky < n; ++ky) {
            const int sky = ky <= n / 2 ? ky : ky - n;
            const size_t row = size_t(nx) * (size_t(ky) + size_t(n) * size_t(kz));
            for (int kx = 0; kx < nx; ++kx) {
                fn(row + size_t(kx), kx, sky, skz);
            }
        }
    }
}

}  // namespace

void derivative_inplace(SpectralField& f, int axis) {
    const GridSpec g = f.grid;
    const int n = g.n;
    const double k0 = 2.0 * M_PI / g.domain_length;
    std::complex<double>* m = f.modes.data();
    for_each_mode(g, [&](size_t idx, int kx, int sky, int skz) {
        const int k = axis == 0 ? kx : (axis == 1 ? sky : skz);
        if (std::abs(k) == n / 2) {
            m[idx] = 0.0;  // Nyquist: odd derivative ill-defined
            return;
        }
        const double kp = k0 * k;
        m[idx] *= std::complex<double>(0.0, kp);
    });
}

void project_divfree(SpectralVec& u) {
    std::complex<double>* ux = u[0].modes.data();
    std::complex<double>* uy = u[1].modes.data();
    std::complex<double>* uz = u[2].modes.data();
    for_each_mode(u.grid, [&](size_t idx, int kx, int sky, int skz) {
        const double k2 = double(kx) * kx + double(sky) * sky + double(skz) * skz;
        if (k2 == 0.0) return;
        const std::complex<double> kdotu =
            double(kx) * ux[idx] + double(sky) * uy[idx] + double(skz) * uz[idx];
        const std::complex<double> s = kdotu / k2;
        ux[idx] -= double(kx) * s;
        uy[idx] -= double(sky) * s;
        uz[idx] -= double(skz) * s;
    });
}

void dealias_truncate(SpectralField& f) {
    const long long n2 = (long long)f.grid.n * f.grid.n;
    std::complex<double>* m = f.modes.data();
    for_each_mode(f.grid, [&](size_t idx, int kx, int sky, int skz) {
        const long long k2 = (long long)kx * kx + (long long)sky * sky + (long long)skz * skz;
        if (9 * k2 > n2) m[idx] = 0.0;
    });
}

void dealias_truncate(SpectralVec& u) {
    for (int c = 0; c < 3; ++c) dealias_truncate(u[c]);
}

double relative_divergence(const SpectralVec& u) {
    const GridSpec g = u.grid;
    const int n = g.n;
    const int nx = n / 2 + 1;
    const std::complex<double>* ux = u[0].modes.data();
    const std::complex<double>* uy = u[1].modes.data();
    const std::complex<double>* uz = u[2].modes.data();
    std::vector<double> div_partial(size_t(n), 0.0);
    std::vector<double> mag_partial(size_t(n), 0.0);
#pragma omp parallel for schedule(static)
    for (int kz = 0; kz < n; ++kz) {
        const int skz = kz <= n / 2 ? kz : kz - n;
        double dmax = 0.0, mmax = 0.0;
        for (int ky = 0; ky < n; ++ky) {
            const int sky = ky <= n / 2 ? ky : ky - n;
            const size_t row = size_t(nx) * (size_t(ky) + size_t(n) * size_t(kz));
            for (int kx = 0; kx < nx; ++kx) {
                const size_t idx = row + size_t(kx);
                const double kn = std::sqrt(double(kx) * kx + double(sky) * sky +
                                            double(skz) * skz);
                const double umag = std::sqrt(std::norm(ux[idx]) + std::norm(uy[idx]) +
                                              std::norm(uz[idx]));
                const double d = std::abs(double(kx) * ux[idx] + double(sky) * uy[idx] +
                                          double(skz) * uz[idx]);
                dmax = std::max(dmax, d);
                mmax = std::max(mmax, kn * umag);
            }
        }
        div_partial[size_t(kz)] = dmax;
        mag_partial[size_t(kz)] = mmax;
    }
    double dmax = 0.0, mmax = 0.0;
    for (int kz = 0; kz < n; ++kz) {
        dmax = std::max(dmax, div_partial[size_t(kz)]);
        mmax = std::max(mmax, mag_partial[size_t(kz)]);
    }
    return mmax == 0.0 ? 0.0 : dmax / mmax;
}

SpectralVec curl_spectral(const SpectralVec& u) {
    SpectralVec w(u.grid);
    const int n = u.grid.n;
    const double k0 = 2.0 * M_PI / u.grid.domain_length;
    const std::complex<double>* ux = u[0].modes.data();
    const std::complex<double>* uy = u[1].modes.data();
    const std::complex<double>* uz = u[2].modes.data();
    std::complex<double>* wx = w[0].modes.data();
    std::complex<double>* wy = w[1].modes.data();
    std::complex<double>* wz = w[2].modes.data();
    for_each_mode(u.grid, [&](size_t idx, int kx, int sky, int skz) {
        // Nyquist wavenumbers contribute no derivative.
        const double fx = std::abs(kx) == n / 2 ? 0.0 : k0 * kx;
        const double fy = std::abs(sky) == n / 2 ? 0.0 : k0 * sky;
        const double fz = std::abs(skz) == n / 2 ? 0.0 : k0 * skz;
        const std::complex<double> I(0.0, 1.0);
        wx[idx] = I * (fy * uz[idx] - fz * uy[idx]);
        wy[idx] = I * (fz * ux[idx] - fx * uz[idx]);
        wz[idx] = I * (fx * uy[idx] - fy * ux[idx]);
    });
    return w;
}

// --- grid-space operators -------------------------------------------------------

ScalarField3 transform_roundtrip(const Spectral& sp, const ScalarField3& f) {
    return sp.inverse(sp.forward(f));
}

VectorField3 curl(const Spectral& sp, const VectorField3& u) {
    validate(u, "curl");
    SpectralVec uh(sp.grid());
    for (int c = 0; c < 3; ++c) uh[c] = sp.forward(u[c]);
    const SpectralVec wh = curl_spectral(uh);
    VectorField3 w(sp.grid());
    for (int c = 0; c < 3; ++c) w[c] = sp.inverse(wh[c]);
    return w;
}

ScalarField3 divergence(const Spectral& sp, const VectorField3& u) {
    validate(u, "divergence");
    SpectralField acc(sp.grid());
    for (int c = 0; c < 3; ++c) {
        SpectralField d = sp.forward(u[c]);
        derivative_inplace(d, c);
        for (size_t i = 0; i < acc.modes.size(); ++i) acc.modes[i] += d.modes[i];
    }
    return sp.inverse(acc);
}

VectorField3 gradient(const Spectral& sp, const ScalarField3& s) {
    validate(s, "gradient");
    const SpectralField sh = sp.forward(s);
    VectorField3 g(sp.grid());
    for (int c = 0; c < 3; ++c) {
        SpectralField d = sh;
        derivative_inplace(d, c);
        g[c] = sp.inverse(d);
    }
    return g;
}

VectorField3 leray_project(const Spectral& sp, const VectorField3& u) {
    validate(u, "leray_project");
    SpectralVec uh(sp.grid());
    for (int c = 0; c < 3; ++c) uh[c] = sp.forward(u[c]);
    project_divfree(uh);
    VectorField3 out(sp.grid());
    for (int c = 0; c < 3; ++c) out[c] = sp.inverse(uh[c]);
    return out;
}

}  // namespace rivlab
