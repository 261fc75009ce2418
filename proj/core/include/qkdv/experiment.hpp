#pragma once

#include "qkdv/asymptotics.hpp"
#include "qkdv/io.hpp"
#include "qkdv/profile.hpp"
#include "qkdv/resonance.hpp"
#include "qkdv/solver.hpp"
#include "qkdv/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qkdv {

struct GridConfig {
    double half_length = 256.0;
    int node_count = 8192;
    int dealias_factor = 3;
};

// Initial data families. amplitude is the smallness parameter eps0; for the
// spectral families it sets max |u0^| (the profile scale the asymptotics see).
struct DataConfig {
    std::string family = "spectral_bump"; // gaussian | sech2 | spectral_bump | custom_samples
    double amplitude = 0.1;
    double width = 0.31;  // physical width, or xi width for spectral_bump
    double center = 0.0;  // physical center, or |xi| center for spectral_bump
    int order = 8;        // spectral_bump taper exponent
    std::string samples_file;
};

struct ScheduleConfig {
    double t_first = 1.0;
    double ratio = 1.189207115002721; // 2^{1/4}
    double pair_offset = 0.0;         // when > 0, snapshot pairs t_k -/+ offset
};

struct DiagnosticsConfig {
    double band_lo = 0.0, band_hi = 0.0; // ODE/scattering xi band; 0 disables
    std::vector<double> stations_z;      // oscillatory-region stations -x/t^{1/5}
    double gamma = 0.01;                 // region exponent (1/10 - C eps0^{2/5})/5
    double k_eff = 200.0;                // phase-correction constant
    double duhamel_scale = 0.2;          // nonlinearity normalization vs -i xi/(4 pi^2)
};

struct ExperimentConfig {
    GridConfig grid;
    DataConfig data;
    double dt0 = 0.05;
    double t_end = 100.0;
    double safety = 0.8;
    double mass_alarm = 1e-8;
    double hamiltonian_alarm = 1e-6;
    double boundary_alarm = 1e-6;
    bool nonlinear = true;
    ScheduleConfig schedule;
    DiagnosticsConfig diag;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    double smallness_limit = 4.0; // gate on ||u0||_{H2} + ||x u0||_{L2}
    std::string run_id = "run";
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
std::string config_hash(const ExperimentConfig& cfg);

// Builds the configured initial data on the configured grid.
FieldState make_initial_data(SpectralEngine& eng, const ExperimentConfig& cfg);

// Snapshot schedule: {0, t_first, t_first * ratio, ...} up to t_end.
std::vector<double> snapshot_schedule(const ExperimentConfig& cfg);

struct CheckRow {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string note;
};

struct RunManifest {
    std::string version;
    std::string config_hash;
    ExperimentConfig config;
    bool completed = false;
    std::string abort_reason;
    long steps = 0;
    double smallness_norm = 0.0;
    double mass_drift = 0.0;
    double hamiltonian_drift = 0.0;
    double worst_boundary_ratio = 0.0;
    struct SnapshotRef {
        std::string file;
        double t = 0.0;
        std::string checksum;
    };
    std::vector<SnapshotRef> snapshots;
    std::vector<CheckRow> checks;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

struct RunResult {
    RunManifest manifest;
    std::vector<ProfileSnapshot> snapshots; // in-memory copies (centers and pairs)
    ConservedLedger ledger;
};

// Executes the configured run: streams snapshots to out_dir, maintains a
// parsable partial manifest during the run, finalizes manifest.json at the
// end. Deterministic for a fixed config and seed.
RunResult run_experiment(const ExperimentConfig& cfg);

// Re-evaluates the quality checks of a stored run from its snapshot files.
struct VerifyResult {
    bool ok = false;
    std::vector<CheckRow> rows;
};
VerifyResult verify_manifest(const std::filesystem::path& manifest_path);

} // namespace qkdv
