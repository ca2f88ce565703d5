#include "core/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "core/util.hpp"

namespace rivlab {

// --- config -----------------------------------------------------------------

void SolverConfig::check() const {
    auto fail = [](const std::string& field, const std::string& msg) {
        throw std::invalid_argument("config error: field '" + field + "': " + msg);
    };
    if (grid.n < 4) fail("n", "must be >= 4, got " + std::to_string(grid.n));
    if (grid.n % 2 != 0) fail("n", "must be even, got " + std::to_string(grid.n));
    if (!(grid.domain_length > 0.0)) fail("domain_length", "must be positive");
    if (!(nu > 0.0)) fail("nu", "must be positive");
    if (!(u0_amplitude > 0.0)) fail("u0_amplitude", "must be positive");
    if (!(t_end > 0.0)) fail("t_end", "must be positive");
    const bool has_dt = dt > 0.0;
    const bool has_cfl = cfl_target > 0.0;
    if (has_dt == has_cfl) fail("dt", "exactly one of dt and cfl_target must be set");
    if (snapshot_stride < 0) fail("snapshot_stride", "must be >= 0");
    if (startup_substeps < 1) fail("startup_substeps", "must be >= 1");
}

// --- Kida initial condition ----------------------------------------------------

VectorField3 kida_initial_condition(const GridSpec& grid, double u0_amplitude) {
    VectorField3 u(grid);
    const double h = grid.spacing();
    const int n = grid.n;
    const double U0 = u0_amplitude;
#pragma omp parallel for schedule(static)
    for (int iz = 0; iz < n; ++iz) {
        const double z = iz * h;
        for (int iy = 0; iy < n; ++iy) {
            const double y = iy * h;
            for (int ix = 0; ix < n; ++ix) {
                const double x = ix * h;
                const size_t idx = grid.index(ix, iy, iz);
                u[0].values[idx] =
                    U0 * std::sin(x) * (std::cos(3 * y) * std::cos(z) - std::cos(y) * std::cos(3 * z));
                u[1].values[idx] =
                    U0 * std::sin(y) * (std::cos(3 * z) * std::cos(x) - std::cos(z) * std::cos(3 * x));
                u[2].values[idx] =
                    U0 * std::sin(z) * (std::cos(3 * x) * std::cos(y) - std::cos(x) * std::cos(3 * y));
            }
        }
    }
    return u;
}

double kida_ic_derivative(int i, int j, double x, double y, double z, double u0) {
    // d u_j / d x_i, straight from the closed-form components.
    using std::cos;
    using std::sin;
    switch (j * 3 + i) {
        case 0:  // d u_x / dx
            return u0 * cos(x) * (cos(3 * y) * cos(z) - cos(y) * cos(3 * z));
        case 1:  // d u_x / dy
            return u0 * sin(x) * (-3 * sin(3 * y) * cos(z) + sin(y) * cos(3 * z));
        case 2:  // d u_x / dz
            return u0 * sin(x) * (-cos(3 * y) * sin(z) + 3 * cos(y) * sin(3 * z));
        case 3:  // d u_y / dx
            return u0 * sin(y) * (-cos(3 * z) * sin(x) + 3 * cos(z) * sin(3 * x));
        case 4:  // d u_y / dy
            return u0 * cos(y) * (cos(3 * z) * cos(x) - cos(z) * cos(3 * x));
        case 5:  // d u_y / dz
            return u0 * sin(y) * (-3 * sin(3 * z) * cos(x) + sin(z) * cos(3 * x));
        case 6:  // d u_z / dx
            return u0 * sin(z) * (-3 * sin(3 * x) * cos(y) + sin(x) * cos(3 * y));
        case 7:  // d u_z / dy
            return u0 * sin(z) * (-cos(3 * x) * sin(y) + 3 * cos(x) * sin(3 * y));
        case 8:  // d u_z / dz
            return u0 * cos(z) * (cos(3 * x) * cos(y) - cos(x) * cos(3 * y));
        default:
            throw std::invalid_argument("kida_ic_derivative: component out of range");
    }
}

// --- RHS engine ------------------------------------------------------------------
// Evaluates the dealiased convective term and, as a by-product, the max-norm
// of the vorticity of the evaluated state (the velocity gradients are already
// in hand). All transforms run on preallocated buffers.

namespace {

class RhsEngine {
public:
    explicit RhsEngine(const Spectral& sp)
        : sp_(sp), nreal_(sp.grid().point_count()), nspec_(sp.mode_count()) {
        for (auto& b : uphys_) b.assign(nreal_, 0.0);
        for (auto& b : grad_) b.assign(nreal_, 0.0);
        for (auto& b : conv_) b.assign(nreal_, 0.0);
    }

    /// out = truncated spectral -(u.grad)u; omega_max (optional) receives the
    /// max-norm of curl u for the evaluated state.
    void convective(const SpectralVec& u_hat, SpectralVec& out, double* omega_max) {
        const GridSpec g = sp_.grid();
        const int n = g.n;
        const int nx = n / 2 + 1;
        const double k0 = 2.0 * M_PI / g.domain_length;

        // 12 independent inverse transforms: 3 velocity components and the
        // 9 velocity gradients. Each task owns its scratch, so the batch can
        // run on any number of threads with bit-identical results.
#pragma omp parallel for schedule(dynamic, 1)
        for (int task = 0; task < 12; ++task) {
            std::vector<std::complex<double>> scratch(nspec_);
            if (task < 3) {
                std::memcpy(scratch.data(), u_hat[task].modes.data(),
                            nspec_ * sizeof(std::complex<double>));
                sp_.inverse_raw(scratch.data(), uphys_[size_t(task)].data());
            } else {
                const int axis = (task - 3) / 3;  // derivative direction
                const int comp = (task - 3) % 3;
                const std::complex<double>* src = u_hat[comp].modes.data();
                for (int kz = 0; kz < n; ++kz) {
                    const int skz = kz <= n / 2 ? kz : kz - n;
                    for (int ky = 0; ky < n; ++ky) {
                        const int sky = ky <= n / 2 ? ky : ky - n;
                        const size_t row = size_t(nx) * (size_t(ky) + size_t(n) * size_t(kz));
                        for (int kx = 0; kx < nx; ++kx) {
                            const int k = axis == 0 ? kx : (axis == 1 ? sky : skz);
                            const size_t idx = row + size_t(kx);
                            if (std::abs(k) == n / 2) {
                                scratch[idx] = 0.0;  // Nyquist: odd derivative ill-defined
                            } else {
                                const std::complex<double> v = src[idx];
                                scratch[idx] = std::complex<double>(-k0 * k * v.imag(),
                                                                    k0 * k * v.real());
                            }
                        }
                    }
                }
                sp_.inverse_raw(scratch.data(), grad_[size_t(axis * 3 + comp)].data());
            }
        }

        // Fused pointwise pass: convective products and vorticity max-norm.
        // The inverse transforms above are unnormalized; fold the 1/n^3
        // factors in here.
        const double inv_n3 = 1.0 / double(nreal_);
        const double inv_n6 = inv_n3 * inv_n3;
        const size_t plane = size_t(n) * size_t(n);
        std::vector<double> omega_partial(size_t(n), 0.0);
        const double* ux = uphys_[0].data();
        const double* uy = uphys_[1].data();
        const double* uz = uphys_[2].data();
#pragma omp parallel for schedule(static)
        for (int iz = 0; iz < n; ++iz) {
            double om = 0.0;
            const size_t base = plane * size_t(iz);
            for (size_t p = base; p < base + plane; ++p) {
                const double g00 = grad_[0][p], g01 = grad_[1][p], g02 = grad_[2][p];
                const double g10 = grad_[3][p], g11 = grad_[4][p], g12 = grad_[5][p];
                const double g20 = grad_[6][p], g21 = grad_[7][p], g22 = grad_[8][p];
                conv_[0][p] = -(ux[p] * g00 + uy[p] * g10 + uz[p] * g20) * inv_n6;
                conv_[1][p] = -(ux[p] * g01 + uy[p] * g11 + uz[p] * g21) * inv_n6;
                conv_[2][p] = -(ux[p] * g02 + uy[p] * g12 + uz[p] * g22) * inv_n6;
                const double wx = std::fabs(g12 - g21);
                const double wy = std::fabs(g20 - g02);
                const double wz = std::fabs(g01 - g10);
                double m = wx > wy ? wx : wy;
                m = m > wz ? m : wz;
                om = om > m ? om : m;
            }
            omega_partial[size_t(iz)] = om;
        }
        double om = 0.0;
        for (double p : omega_partial) om = om > p ? om : p;
        if (omega_max) *omega_max = om * inv_n3;

#pragma omp parallel for schedule(static)
        for (int c = 0; c < 3; ++c)
            sp_.forward_raw(conv_[size_t(c)].data(), out[c].modes.data());
        dealias_truncate(out);
    }

private:
    const Spectral& sp_;
    size_t nreal_;
    size_t nspec_;
    std::array<std::vector<double>, 3> uphys_;
    std::array<std::vector<double>, 9> grad_;
    std::array<std::vector<double>, 3> conv_;
};

double parseval_energy(const SpectralVec& u) {
    const GridSpec g = u.grid;
    const int n = g.n;
    const int nx = n / 2 + 1;
    std::vector<double> partial(size_t(n), 0.0);
#pragma omp parallel for schedule(static)
    for (int kz = 0; kz < n; ++kz) {
        double s = 0.0;
        for (int ky = 0; ky < n; ++ky) {
            const size_t row = size_t(nx) * (size_t(ky) + size_t(n) * size_t(kz));
            for (int kx = 0; kx < nx; ++kx) {
                const size_t idx = row + size_t(kx);
                const double w = (kx == 0 || kx == n / 2) ? 1.0 : 2.0;
                s += w * (std::norm(u[0].modes[idx]) + std::norm(u[1].modes[idx]) +
                          std::norm(u[2].modes[idx]));
            }
        }
        partial[size_t(kz)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    const double L = g.domain_length;
    const double n3 = double(g.point_count());
    return 0.5 * total * L * L * L / (n3 * n3);
}

// Re-impose the cyclic component-permutation symmetry of the Kida class by
// averaging over the 3-element orbit. Pure index permutation in spectral
// space: F[v o P](k) = v_hat(P k) for the coordinate cycle P(x,y,z)=(y,z,x).
void symmetrize_cyclic(SpectralVec& u) {
    const GridSpec g = u.grid;
    const int n = g.n;
    const int nx = n / 2 + 1;

    auto fetch = [&](const SpectralField& f, int qx, int qy, int qz) {
        // Conjugate symmetry maps negative-qx wavevectors into storage.
        if (qx < 0) {
            qx = -qx;
            qy = -qy;
            qz = -qz;
            const size_t idx =
                size_t(qx) + size_t(nx) * (size_t(g.wrap(qy)) + size_t(n) * size_t(g.wrap(qz)));
            return std::conj(f.modes[idx]);
        }
        const size_t idx =
            size_t(qx) + size_t(nx) * (size_t(g.wrap(qy)) + size_t(n) * size_t(g.wrap(qz)));
        return f.modes[idx];
    };

    const SpectralVec orig = u;
#pragma omp parallel for schedule(static)
    for (int kz = 0; kz < n; ++kz) {
        const int skz = kz <= n / 2 ? kz : kz - n;
        for (int ky = 0; ky < n; ++ky) {
            const int sky = ky <= n / 2 ? ky : ky - n;
            const size_t row = size_t(nx) * (size_t(ky) + size_t(n) * size_t(kz));
            for (int kx = 0; kx < nx; ++kx) {
                const size_t idx = row + size_t(kx);
                // P k and P^2 k for k = (kx, sky, skz)
                const int p1x = sky, p1y = skz, p1z = kx;
                const int p2x = skz, p2y = kx, p2z = sky;
                // (Tu)_x = u_z(Pk), (Tu)_y = u_x(Pk), (Tu)_z = u_y(Pk)
                const auto t1x = fetch(orig[2], p1x, p1y, p1z);
                const auto t1y = fetch(orig[0], p1x, p1y, p1z);
                const auto t1z = fetch(orig[1], p1x, p1y, p1z);
                // (T^2 u)_x = u_y(P^2 k), (T^2 u)_y = u_z(P^2 k), (T^2 u)_z = u_x(P^2 k)
                const auto t2x = fetch(orig[1], p2x, p2y, p2z);
                const auto t2y = fetch(orig[2], p2x, p2y, p2z);
                const auto t2z = fetch(orig[0], p2x, p2y, p2z);
                u[0].modes[idx] = (orig[0].modes[idx] + t1x + t2x) / 3.0;
                u[1].modes[idx] = (orig[1].modes[idx] + t1y + t2y) / 3.0;
                u[2].modes[idx] = (orig[2].modes[idx] + t1z + t2z) / 3.0;
            }
        }
    }
}

}  // namespace

VectorField3 nonlinear_term(const Spectral& sp, const VectorField3& u) {
    validate(u, "nonlinear_term");
    SpectralVec uh(sp.grid());
    for (int c = 0; c < 3; ++c) uh[c] = sp.forward(u[c]);
    dealias_truncate(uh);
    RhsEngine engine(sp);
    SpectralVec nh(sp.grid());
    engine.convective(uh, nh, nullptr);
    VectorField3 out(sp.grid());
    for (int c = 0; c < 3; ++c) out[c] = sp.inverse(nh[c]);
    return out;
}

// --- NsSolver ---------------------------------------------------------------------

struct NsSolver::Impl {
    SolverConfig cfg;
    Spectral sp;
    RhsEngine engine;
    double dt = 0.0;
    double t = 0.0;
    long long step_index = 0;
    int hist_len = 0;

    SpectralVec u_hat, u_hat_prev;
    SpectralVec n_hist0, n_hist1;  // N_{k-1}, N_{k-2}
    SpectralVec n_new;
    double omega_last = std::nan("");
    bool seeded = false;

    explicit Impl(const SolverConfig& c)
        : cfg(c),
          sp(c.grid),
          engine(sp),
          u_hat(c.grid),
          u_hat_prev(c.grid),
          n_hist0(c.grid),
          n_hist1(c.grid),
          n_new(c.grid) {}

    void compute_rhs(double* omega_out) {
        engine.convective(u_hat, n_new, omega_out);
        if (!cfg.nonlinear_enabled) {
            for (int c = 0; c < 3; ++c)
                std::fill(n_new[c].modes.begin(), n_new[c].modes.end(),
                          std::complex<double>(0.0, 0.0));
            return;
        }
        project_divfree(n_new);
    }

    // One update of the given order writing into `target`.
    void apply_update(int order, double h, SpectralVec& target) {
        const GridSpec g = cfg.grid;
        const int n = g.n;
        const int nx = n / 2 + 1;
        const double k0 = 2.0 * M_PI / g.domain_length;
        const double nu = cfg.nu;
        const std::complex<double>* u0c[3] = {u_hat[0].modes.data(), u_hat[1].modes.data(),
                                              u_hat[2].modes.data()};
        const std::complex<double>* up[3] = {u_hat_prev[0].modes.data(),
                                             u_hat_prev[1].modes.data(),
                                             u_hat_prev[2].modes.data()};
        const std::complex<double>* nn[3] = {n_new[0].modes.data(), n_new[1].modes.data(),
                                             n_new[2].modes.data()};
        const std::complex<double>* n0[3] = {n_hist0[0].modes.data(), n_hist0[1].modes.data(),
                                             n_hist0[2].modes.data()};
        const std::complex<double>* n1[3] = {n_hist1[0].modes.data(), n_hist1[1].modes.data(),
                                             n_hist1[2].modes.data()};
        std::complex<double>* out[3] = {target[0].modes.data(), target[1].modes.data(),
                                        target[2].modes.data()};
#pragma omp parallel for schedule(static)
        for (int kz = 0; kz < n; ++kz) {
            const int skz = kz <= n / 2 ? kz : kz - n;
            for (int ky = 0; ky < n; ++ky) {
                const int sky = ky <= n / 2 ? ky : ky - n;
                const size_t row = size_t(nx) * (size_t(ky) + size_t(n) * size_t(kz));
                for (int kx = 0; kx < nx; ++kx) {
                    const size_t idx = row + size_t(kx);
                    const double K2 =
                        k0 * k0 * (double(kx) * kx + double(sky) * sky + double(skz) * skz);
                    const double d = nu * h * K2;
                    for (int c = 0; c < 3; ++c) {
                        std::complex<double> v;
                        switch (order) {
                            case 1:
                                v = (u0c[c][idx] + h * nn[c][idx]) / (1.0 + d);
                                break;
                            case 2:
                                v = (u0c[c][idx] * (1.0 - 0.5 * d) +
                                     h * (1.5 * nn[c][idx] - 0.5 * n0[c][idx])) /
                                    (1.0 + 0.5 * d);
                                break;
                            default:
                                v = (u0c[c][idx] * (1.0 - (8.0 / 12.0) * d) +
                                     (1.0 / 12.0) * d * up[c][idx] +
                                     h * ((23.0 / 12.0) * nn[c][idx] -
                                          (16.0 / 12.0) * n0[c][idx] +
                                          (5.0 / 12.0) * n1[c][idx])) /
                                    (1.0 + (5.0 / 12.0) * d);
                        }
                        out[c][idx] = v;
                    }
                }
            }
        }
    }

    void check_finite() {
        const double e = parseval_energy(u_hat);
        if (!std::isfinite(e)) {
            std::ostringstream msg;
            msg << "blow-up or instability detected: non-finite state at t=" << t
                << " dt=" << dt << " last ||omega||_inf=" << omega_last;
            throw InstabilityError(msg.str());
        }
    }

    void plain_step(int order, double h) {
        double om = 0.0;
        compute_rhs(&om);
        omega_last = om;
        SpectralVec fresh(cfg.grid);
        apply_update(order, h, fresh);
        std::swap(n_hist1, n_hist0);
        std::swap(n_hist0, n_new);
        hist_len = std::min(hist_len + 1, 2);
        std::swap(u_hat_prev, u_hat);
        std::swap(u_hat, fresh);
        if (cfg.kida_symmetrize) symmetrize_cyclic(u_hat);
    }

    // Bootstrap a main step of size dt with `m` first-order substeps. With
    // m of order 1/dt the bootstrap error stays at the O(dt^3) level of the
    // main scheme instead of capping the observable order at two.
    void substepped_startup_step() {
        const int m = cfg.startup_substeps;
        const double h = dt / m;
        double om = 0.0;
        compute_rhs(&om);
        omega_last = om;
        SpectralVec n_at_state = n_new;  // kept for the AB3 history
        for (int s = 0; s < m; ++s) {
            if (s > 0) compute_rhs(nullptr);
            SpectralVec fresh(cfg.grid);
            apply_update(1, h, fresh);
            std::swap(u_hat, fresh);
        }
        if (cfg.kida_symmetrize) symmetrize_cyclic(u_hat);
        std::swap(n_hist1, n_hist0);
        n_hist0 = std::move(n_at_state);
        hist_len = std::min(hist_len + 1, 2);
    }

    void step() {
        if (!seeded) throw std::logic_error("NsSolver::step before initial condition");
        if (step_index < 2 && cfg.startup_substeps > 1) {
            SpectralVec state_before = u_hat;
            substepped_startup_step();
            // AM3 needs the state at the previous main grid point.
            u_hat_prev = std::move(state_before);
        } else {
            plain_step(step_index == 0 ? 1 : (step_index == 1 ? 2 : 3), dt);
        }
        ++step_index;
        t = double(step_index) * dt;
        check_finite();
    }
};

NsSolver::NsSolver(const SolverConfig& cfg) : impl_((cfg.check(), std::make_unique<Impl>(cfg))) {}

NsSolver::~NsSolver() = default;

void NsSolver::set_initial_condition(const VectorField3& u) {
    validate(u, "initial condition");
    Impl& im = *impl_;
    for (int c = 0; c < 3; ++c) im.u_hat[c] = im.sp.forward(u[c]);
    project_divfree(im.u_hat);
    dealias_truncate(im.u_hat);
    if (im.cfg.kida_symmetrize) symmetrize_cyclic(im.u_hat);
    im.u_hat_prev = im.u_hat;

    if (im.cfg.dt > 0.0) {
        im.dt = im.cfg.dt;
    } else {
        const double umax = max_norm(u);
        if (!(umax > 0.0))
            throw std::invalid_argument(
                "config error: field 'cfl_target': initial condition has zero max speed; "
                "set dt explicitly");
        im.dt = im.cfg.cfl_target * im.cfg.grid.spacing() / umax;
    }
    im.t = 0.0;
    im.step_index = 0;
    im.hist_len = 0;
    im.seeded = true;
}

void NsSolver::seed_kida() {
    set_initial_condition(kida_initial_condition(impl_->cfg.grid, impl_->cfg.u0_amplitude));
}

void NsSolver::step() { impl_->step(); }

double NsSolver::time() const { return impl_->t; }
long long NsSolver::step_index() const { return impl_->step_index; }
double NsSolver::dt() const { return impl_->dt; }

double NsSolver::vorticity_max() const {
    const SpectralVec wh = curl_spectral(impl_->u_hat);
    VectorField3 w(impl_->cfg.grid);
    for (int c = 0; c < 3; ++c) w[c] = impl_->sp.inverse(wh[c]);
    return max_norm(w);
}

double NsSolver::last_step_vorticity_max() const { return impl_->omega_last; }

double NsSolver::energy() const { return parseval_energy(impl_->u_hat); }

double NsSolver::relative_divergence() const {
    return rivlab::relative_divergence(impl_->u_hat);
}

VectorField3 NsSolver::velocity() const {
    VectorField3 u(impl_->cfg.grid);
    for (int c = 0; c < 3; ++c) u[c] = impl_->sp.inverse(impl_->u_hat[c]);
    return u;
}

VectorField3 NsSolver::vorticity() const {
    const SpectralVec wh = curl_spectral(impl_->u_hat);
    VectorField3 w(impl_->cfg.grid);
    for (int c = 0; c < 3; ++c) w[c] = impl_->sp.inverse(wh[c]);
    return w;
}

const Spectral& NsSolver::spectral() const { return impl_->sp; }
const SpectralVec& NsSolver::velocity_hat() const { return impl_->u_hat; }

// --- simulate -----------------------------------------------------------------------

std::vector<StepRecord> simulate(const SolverConfig& cfg, const SimulateSinks& sinks) {
    cfg.check();
    NsSolver solver(cfg);
    solver.seed_kida();

    const double dt = solver.dt();
    const long long n_steps =
        std::max<long long>(1, llround(std::ceil(cfg.t_end / dt - 1e-9)));

    std::vector<StepRecord> records;
    records.reserve(size_t(n_steps) + 1);
    records.push_back({0, 0.0, solver.vorticity_max(), solver.energy()});

    auto emit_snapshot = [&](long long s) {
        if (!sinks.on_snapshot) return;
        FieldSnapshot snap;
        snap.grid = cfg.grid;
        snap.nu = cfg.nu;
        snap.time = solver.time();
        snap.step = s;
        snap.velocity = solver.velocity();
        snap.vorticity = solver.vorticity();
        sinks.on_snapshot(snap);
    };

    if (cfg.snapshot_stride > 0) emit_snapshot(0);

    for (long long s = 1; s <= n_steps; ++s) {
        solver.step();
        // This step's RHS evaluation measured omega at the previous time.
        records[size_t(s - 1)].omega_max = solver.last_step_vorticity_max();
        if (sinks.on_step) sinks.on_step(records[size_t(s - 1)]);
        records.push_back({s, solver.time(), std::nan(""), solver.energy()});
        if (cfg.snapshot_stride > 0 && (s % cfg.snapshot_stride == 0 || s == n_steps))
            emit_snapshot(s);
    }
    records.back().omega_max = solver.vorticity_max();
    if (sinks.on_step) sinks.on_step(records.back());
    return records;
}

}  // namespace rivlab
