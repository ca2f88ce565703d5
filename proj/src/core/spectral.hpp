#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "core/field.hpp"

namespace rivlab {

/// Spectral coefficients of a real field in real-to-complex layout:
/// modes[kx + (n/2+1)*(ky + n*kz)], kx in [0, n/2], ky/kz unsigned wrap.
struct SpectralField {
    GridSpec grid;
    std::vector<std::complex<double>> modes;

    SpectralField() = default;
    explicit SpectralField(const GridSpec& g)
        : grid(g), modes(size_t(g.n / 2 + 1) * size_t(g.n) * size_t(g.n)) {}

    size_t index(int kx, int ky, int kz) const {
        return size_t(kx) +
               size_t(grid.n / 2 + 1) * (size_t(ky) + size_t(grid.n) * size_t(kz));
    }
    /// Signed wavenumber for an unsigned storage index along y/z.
    int signed_k(int k) const { return k <= grid.n / 2 ? k : k - grid.n; }
};

struct SpectralVec {
    GridSpec grid;
    std::array<SpectralField, 3> comp;

    SpectralVec() = default;
    explicit SpectralVec(const GridSpec& g)
        : grid(g), comp{SpectralField(g), SpectralField(g), SpectralField(g)} {}

    SpectralField& operator[](int i) { return comp[size_t(i)]; }
    const SpectralField& operator[](int i) const { return comp[size_t(i)]; }
};

/// FFT plans for one grid size. Construction is serialized internally
/// (the FFTW planner is global); execution is const and safe to call
/// concurrently on distinct buffers. Transforms always run single-threaded
/// so results are bit-identical for any worker-thread count.
class Spectral {
public:
    explicit Spectral(const GridSpec& g);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    const GridSpec& grid() const { return grid_; }
    size_t mode_count() const;

    /// Unnormalized forward transform. Input is preserved.
    SpectralField forward(const ScalarField3& f) const;

    /// Inverse transform including the 1/n^3 normalization.
    ScalarField3 inverse(const SpectralField& f) const;

    /// Raw executors for preallocated buffers (sizes: n^3 reals,
    /// n^2*(n/2+1) complexes). The inverse destroys its input and does NOT
    /// normalize; callers fold 1/n^3 into a later pointwise pass.
    void forward_raw(const double* in, std::complex<double>* out) const;
    void inverse_raw(std::complex<double>* in, double* out) const;

private:
    GridSpec grid_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

// --- spectral-space operators (pure index arithmetic, no transforms) --------

/// d/dx_axis: multiply by i*k_phys; the Nyquist plane of the differentiated
/// axis is zeroed (its odd derivative is ill-defined).
void derivative_inplace(SpectralField& f, int axis);

/// Leray projection onto divergence-free fields; k=0 mode untouched.
void project_divfree(SpectralVec& u);

/// Spherical 2/3-rule truncation: zero all modes with 9*|k|^2 > n^2.
void dealias_truncate(SpectralField& f);
void dealias_truncate(SpectralVec& u);

/// max_k |k . u_hat(k)| / max_k |k| |u_hat(k)| (0 when the field is empty).
double relative_divergence(const SpectralVec& u);

/// i k x u_hat.
SpectralVec curl_spectral(const SpectralVec& u);

// --- grid-space operators (transform + spectral op + transform back) --------

/// Forward then inverse transform; exposes the round-trip contract.
ScalarField3 transform_roundtrip(const Spectral& sp, const ScalarField3& f);

VectorField3 curl(const Spectral& sp, const VectorField3& u);
ScalarField3 divergence(const Spectral& sp, const VectorField3& u);
VectorField3 gradient(const Spectral& sp, const ScalarField3& s);

/// Divergence-free part of u (spectral Leray projection).
VectorField3 leray_project(const Spectral& sp, const VectorField3& u);

}  // namespace rivlab
