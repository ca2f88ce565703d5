#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "core/field.hpp"
#include "core/spectral.hpp"

namespace rivlab {

/// Thrown when the integration produces non-finite values.
struct InstabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    GridSpec grid{128, 2.0 * M_PI};
    double nu = 0.0;
    double u0_amplitude = 0.0;
    double dt = 0.0;          // set either dt or cfl_target
    double cfl_target = 0.0;  // dt = cfl * spacing / max point speed of the IC
    double t_end = 0.0;
    int snapshot_stride = 0;  // 0 = no snapshots

    // Advanced knobs (documented in the config schema).
    int startup_substeps = 1;      // first-order substeps inside the two bootstrap steps
    bool kida_symmetrize = false;  // re-impose the cyclic permutation symmetry each step
    bool nonlinear_enabled = true; // off = Stokes diagnostic mode

    double reynolds() const { return u0_amplitude * grid.domain_length / nu; }

    /// Throws std::invalid_argument naming the offending field.
    void check() const;
};

/// Kida initial velocity: the classic one-parameter symmetric family sampled
/// exactly on grid points. Divergence-free by construction.
VectorField3 kida_initial_condition(const GridSpec& grid, double u0_amplitude);

/// Analytic spatial derivative d(u0_j)/d(x_i) of the Kida initial velocity;
/// used as an independent differentiation oracle in tests and validation.
double kida_ic_derivative(int i, int j, double x, double y, double z, double u0);

/// Dealiased pseudospectral evaluation of -(u . grad) u (convective form,
/// spherical 2/3-rule truncation). Not Leray-projected; the stepper projects.
VectorField3 nonlinear_term(const Spectral& sp, const VectorField3& u);

/// Incompressible Navier-Stokes integrator on the periodic box.
/// IMEX-3: Adams-Bashforth 3 on the projected nonlinear term, Adams-Moulton 3
/// on diffusion (diagonal in spectral space). Steps 0 and 1 bootstrap with
/// the first- and second-order IMEX variants.
class NsSolver {
public:
    explicit NsSolver(const SolverConfig& cfg);
    ~NsSolver();
    NsSolver(const NsSolver&) = delete;
    NsSolver& operator=(const NsSolver&) = delete;

    /// Projects onto divergence-free fields and applies the dealiasing
    /// truncation, then freezes the state at t = 0.
    void set_initial_condition(const VectorField3& u);
    /// set_initial_condition(kida_initial_condition(...)).
    void seed_kida();

    /// Advance one time step. Throws InstabilityError on blow-up.
    void step();

    double time() const;
    long long step_index() const;
    double dt() const;

    /// max-norm of vorticity at the state's current time (computed fresh).
    double vorticity_max() const;
    /// max-norm of vorticity at the previous step's start, captured for free
    /// during the RHS evaluation (NaN before the first step).
    double last_step_vorticity_max() const;
    /// Kinetic energy of the current state (spectral Parseval sum).
    double energy() const;
    /// max_k |k.u_hat| / max_k |k||u_hat| for the current state.
    double relative_divergence() const;

    VectorField3 velocity() const;
    VectorField3 vorticity() const;

    const Spectral& spectral() const;
    const SpectralVec& velocity_hat() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Per-step record captured during simulate().
struct StepRecord {
    long long step;
    double t;
    double omega_max;
    double energy;
};

/// In-memory snapshot handed to the sink during simulate().
struct FieldSnapshot {
    GridSpec grid;
    double nu = 0.0;
    double time = 0.0;
    long long step = 0;
    VectorField3 velocity;
    VectorField3 vorticity;
};

struct SimulateSinks {
    std::function<void(const StepRecord&)> on_step;            // every step (incl. t=0)
    std::function<void(const FieldSnapshot&)> on_snapshot;     // per snapshot_stride
};

/// Integrate the Kida-initialized flow to t_end per config, emitting
/// snapshots every snapshot_stride steps (plus the initial and final states).
/// Returns the full step series.
std::vector<StepRecord> simulate(const SolverConfig& cfg, const SimulateSinks& sinks);

}  // namespace rivlab
