#pragma once

#include "qkdv/profile.hpp"
#include "qkdv/spectral.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qkdv {

struct SolverConfig {
    double dt0 = 0.05;    // accuracy cap on the step
    double t_end = 10.0;
    double safety = 0.8;  // stability factor on the nonlinear bound
    double mass_alarm = 1e-8;
    double hamiltonian_alarm = 1e-6;
    std::vector<double> snapshot_times; // sorted ascending
    double pair_offset = 0.0;           // also snapshot at t_k -/+ offset when > 0
    bool nonlinear = true;
    double boundary_alarm = 1e-8;       // boundary amplitude / sup amplitude
    int boundary_check_stride = 16;
    bool abort_on_alarm = false;
    std::string run_id;
};

struct ConservedLedger {
    double mass0 = 0.0;
    double hamiltonian0 = 0.0;
    std::vector<double> times;
    std::vector<double> mass;
    std::vector<double> hamiltonian;
    double max_mass_drift = 0.0;        // relative
    double max_hamiltonian_drift = 0.0; // relative
    bool mass_alarmed = false;
    bool hamiltonian_alarmed = false;
    bool boundary_alarmed = false;
    double worst_boundary_ratio = 0.0;
};

struct EvolveResult {
    std::vector<ProfileSnapshot> snapshots;
    ConservedLedger ledger;
    long steps = 0;
    bool aborted = false;
    std::string abort_reason;
};

double mass_of(SpectralEngine& eng, const FieldState& s);
double hamiltonian_of(SpectralEngine& eng, const FieldState& s);

// One integrating-factor RK4 step of u_t = d_x^5 u - u^4 u_x (nonlinearity in
// conservative form -(1/5) d_x u^5). The linear factor is unimodular, so the
// stiff part is integrated exactly; dt may be negative.
FieldState step(SpectralEngine& eng, const FieldState& state, double dt, bool nonlinear = true);

using SnapshotSink = std::function<void(const ProfileSnapshot&, const FieldState&)>;

// Advances u0 to cfg.t_end, emitting profile snapshots at the scheduled times
// (plus the -/+ pair offsets when configured) and filling the conserved-quantity
// ledger. Throws nothing; NaN/overflow aborts are reported in the result.
EvolveResult evolve(SpectralEngine& eng, const FieldState& u0, const SolverConfig& cfg,
                    const SnapshotSink& sink = nullptr);

struct ScalingCheckRecord {
    double lambda = 1.0;
    double discrepancy = 0.0; // max |lambda u(lambda^5 t, lambda x) - u_lambda(t, x)|
    double scale = 0.0;       // max |u_lambda| for reference
};

// Exact symmetry u_lambda(t, x) = lambda u(lambda^5 t, lambda x) maps solutions
// to solutions; both runs share the grid, so content must fit at both scales.
// Data is supplied as a spectral profile u0^(xi) so the rescaled run can be
// constructed exactly (no interpolation).
ScalingCheckRecord scaling_symmetry_check(SpectralEngine& eng,
                                          const std::function<complexd(double)>& u0hat,
                                          double lambda, double t_compare, double dt);

} // namespace qkdv
