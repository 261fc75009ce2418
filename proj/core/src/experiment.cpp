#include "qkdv/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace qkdv {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json grid_to_json(const GridConfig& g) {
    return ordered_json{{"L", g.half_length}, {"N", g.node_count}, {"p", g.dealias_factor}};
}
GridConfig grid_from_json(const ordered_json& j) {
    GridConfig g;
    g.half_length = j.at("L").get<double>();
    g.node_count = j.at("N").get<int>();
    g.dealias_factor = j.value("p", 3);
    return g;
}

ordered_json data_to_json(const DataConfig& d) {
    return ordered_json{{"family", d.family},   {"amplitude", d.amplitude}, {"width", d.width},
                        {"center", d.center},   {"order", d.order},         {"samples_file", d.samples_file}};
}
DataConfig data_from_json(const ordered_json& j) {
    DataConfig d;
    d.family = j.at("family").get<std::string>();
    d.amplitude = j.at("amplitude").get<double>();
    d.width = j.value("width", 0.31);
    d.center = j.value("center", 0.0);
    d.order = j.value("order", 8);
    d.samples_file = j.value("samples_file", std::string());
    return d;
}

} // namespace

std::string config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["grid"] = grid_to_json(c.grid);
    j["data"] = data_to_json(c.data);
    j["dt0"] = c.dt0;
    j["t_end"] = c.t_end;
    j["safety"] = c.safety;
    j["mass_alarm"] = c.mass_alarm;
    j["hamiltonian_alarm"] = c.hamiltonian_alarm;
    j["boundary_alarm"] = c.boundary_alarm;
    j["nonlinear"] = c.nonlinear;
    j["schedule"] = ordered_json{{"t_first", c.schedule.t_first},
                                 {"ratio", c.schedule.ratio},
                                 {"pair_offset", c.schedule.pair_offset}};
    j["diag"] = ordered_json{{"band_lo", c.diag.band_lo},
                             {"band_hi", c.diag.band_hi},
                             {"stations_z", c.diag.stations_z},
                             {"gamma", c.diag.gamma},
                             {"k_eff", c.diag.k_eff},
                             {"duhamel_scale", c.diag.duhamel_scale}};
    j["out_dir"] = c.out_dir;
    j["seed"] = c.seed;
    j["smallness_limit"] = c.smallness_limit;
    j["run_id"] = c.run_id;
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    ExperimentConfig c;
    c.grid = grid_from_json(j.at("grid"));
    c.data = data_from_json(j.at("data"));
    c.dt0 = j.at("dt0").get<double>();
    c.t_end = j.at("t_end").get<double>();
    c.safety = j.value("safety", 0.8);
    c.mass_alarm = j.value("mass_alarm", 1e-8);
    c.hamiltonian_alarm = j.value("hamiltonian_alarm", 1e-6);
    c.boundary_alarm = j.value("boundary_alarm", 1e-6);
    c.nonlinear = j.value("nonlinear", true);
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        c.schedule.t_first = s.value("t_first", 1.0);
        c.schedule.ratio = s.value("ratio", c.schedule.ratio);
        c.schedule.pair_offset = s.value("pair_offset", 0.0);
    }
    if (j.contains("diag")) {
        const auto& d = j.at("diag");
        c.diag.band_lo = d.value("band_lo", 0.0);
        c.diag.band_hi = d.value("band_hi", 0.0);
        c.diag.stations_z = d.value("stations_z", std::vector<double>());
        c.diag.gamma = d.value("gamma", 0.01);
        c.diag.k_eff = d.value("k_eff", 200.0);
        c.diag.duhamel_scale = d.value("duhamel_scale", 0.2);
    }
    c.out_dir = j.value("out_dir", "out");
    c.seed = j.value("seed", std::uint64_t(1));
    c.smallness_limit = j.value("smallness_limit", 4.0);
    c.run_id = j.value("run_id", "run");
    return c;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string s = config_to_json(cfg);
    return fnv1a64_hex(s.data(), s.size());
}

FieldState make_initial_data(SpectralEngine& eng, const ExperimentConfig& cfg) {
    GridPtr grid = eng.grid_ptr();
    const int n = grid->node_count();
    const DataConfig& d = cfg.data;
    if (d.family == "gaussian" || d.family == "sech2") {
        std::vector<double> u(n);
        for (int m = 0; m < n; ++m) {
            const double s = (grid->node(m) - d.center) / d.width;
            u[m] = d.family == "gaussian" ? d.amplitude * std::exp(-0.5 * s * s)
                                          : d.amplitude / std::pow(std::cosh(s), 2.0);
        }
        return FieldState::from_physical(grid, std::move(u), 0.0);
    }
    if (d.family == "spectral_bump") {
        std::vector<complexd> uh(n, complexd(0.0, 0.0));
        for (int j = 0; j < n; ++j) {
            if (j == grid->nyquist_index()) continue;
            const double xi = grid->frequency(j);
            const double arg = (std::abs(xi) - d.center) / d.width;
            uh[j] = d.amplitude * std::exp(-std::pow(std::abs(arg), double(d.order)));
        }
        return FieldState::from_spectrum(grid, std::move(uh), 0.0);
    }
    if (d.family == "custom_samples") {
        std::vector<double> u = read_sample_file(d.samples_file);
        return FieldState::from_physical(grid, std::move(u), 0.0);
    }
    throw std::invalid_argument("unknown data family: " + d.family);
}

std::vector<double> snapshot_schedule(const ExperimentConfig& cfg) {
    std::vector<double> ts{0.0};
    double t = cfg.schedule.t_first;
    while (t < cfg.t_end * (1.0 - 1e-12)) {
        ts.push_back(t);
        t *= cfg.schedule.ratio;
    }
    ts.push_back(cfg.t_end);
    return ts;
}

namespace {

ordered_json manifest_json(const RunManifest& m) {
    ordered_json j;
    j["version"] = m.version;
    j["config_hash"] = m.config_hash;
    j["config"] = ordered_json::parse(config_to_json(m.config));
    j["completed"] = m.completed;
    j["abort_reason"] = m.abort_reason;
    j["steps"] = m.steps;
    j["smallness_norm"] = m.smallness_norm;
    j["mass_drift"] = m.mass_drift;
    j["hamiltonian_drift"] = m.hamiltonian_drift;
    j["worst_boundary_ratio"] = m.worst_boundary_ratio;
    ordered_json snaps = ordered_json::array();
    for (const auto& s : m.snapshots)
        snaps.push_back(ordered_json{{"file", s.file}, {"t", s.t}, {"checksum", s.checksum}});
    j["snapshots"] = snaps;
    ordered_json checks = ordered_json::array();
    for (const auto& c : m.checks)
        checks.push_back(ordered_json{{"name", c.name},
                                      {"pass", c.pass},
                                      {"measured", c.measured},
                                      {"threshold", c.threshold},
                                      {"note", c.note}});
    j["checks"] = checks;
    return j;
}

} // namespace

std::string manifest_to_json(const RunManifest& m) { return manifest_json(m).dump(2); }

RunManifest manifest_from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    RunManifest m;
    m.version = j.value("version", "");
    m.config_hash = j.value("config_hash", "");
    m.config = config_from_json(j.at("config").dump());
    m.completed = j.value("completed", false);
    m.abort_reason = j.value("abort_reason", "");
    m.steps = j.value("steps", 0L);
    m.smallness_norm = j.value("smallness_norm", 0.0);
    m.mass_drift = j.value("mass_drift", 0.0);
    m.hamiltonian_drift = j.value("hamiltonian_drift", 0.0);
    m.worst_boundary_ratio = j.value("worst_boundary_ratio", 0.0);
    for (const auto& s : j.value("snapshots", ordered_json::array())) {
        RunManifest::SnapshotRef r;
        r.file = s.at("file").get<std::string>();
        r.t = s.at("t").get<double>();
        r.checksum = s.at("checksum").get<std::string>();
        m.snapshots.push_back(r);
    }
    for (const auto& c : j.value("checks", ordered_json::array())) {
        CheckRow r;
        r.name = c.at("name").get<std::string>();
        r.pass = c.at("pass").get<bool>();
        r.measured = c.value("measured", 0.0);
        r.threshold = c.value("threshold", 0.0);
        r.note = c.value("note", "");
        m.checks.push_back(r);
    }
    return m;
}

namespace {

double smallness_norm_of(SpectralEngine& eng, const FieldState& u0) {
    const auto& g = u0.grid();
    eng.ensure_spectral(u0);
    double h2 = 0.0;
    for (int j = 0; j < g.node_count(); ++j) {
        const double xi = g.frequency(j);
        const double w = 1.0 + xi * xi;
        h2 += w * w * std::norm(u0.spectral_raw()[j]);
    }
    eng.ensure_physical(u0);
    double xw = 0.0;
    for (int m = 0; m < g.node_count(); ++m) {
        const double v = g.node(m) * u0.physical_raw()[m];
        xw += v * v;
    }
    return std::sqrt(h2 * g.dxi()) + std::sqrt(xw * g.dx());
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunResult res;
    RunManifest& man = res.manifest;
    man.version = QKDV_VERSION;
    man.config = cfg;
    man.config_hash = config_hash(cfg);

    fs::create_directories(cfg.out_dir);
    const fs::path outdir(cfg.out_dir);
    const fs::path partial = outdir / "manifest.partial.json";
    const fs::path final_path = outdir / "manifest.json";

    GridPtr grid = make_grid(cfg.grid.half_length, cfg.grid.node_count, cfg.grid.dealias_factor);
    SpectralEngine eng(grid);
    FieldState u0 = make_initial_data(eng, cfg);
    man.smallness_norm = smallness_norm_of(eng, u0);
    {
        CheckRow row;
        row.name = "smallness_gate";
        row.measured = man.smallness_norm;
        row.threshold = cfg.smallness_limit;
        row.pass = man.smallness_norm <= cfg.smallness_limit;
        row.note = "||u0||_{H2} + ||x u0||_{L2} vs configured limit";
        man.checks.push_back(row);
    }

    SolverConfig scfg;
    scfg.dt0 = cfg.dt0;
    scfg.t_end = cfg.t_end;
    scfg.safety = cfg.safety;
    scfg.mass_alarm = cfg.mass_alarm;
    scfg.hamiltonian_alarm = cfg.hamiltonian_alarm;
    scfg.boundary_alarm = cfg.boundary_alarm;
    scfg.nonlinear = cfg.nonlinear;
    scfg.snapshot_times = snapshot_schedule(cfg);
    scfg.pair_offset = cfg.schedule.pair_offset;
    scfg.run_id = cfg.run_id;

    int snap_counter = 0;
    auto flush_partial = [&]() {
        std::ofstream os(partial);
        os << manifest_to_json(man) << "\n";
    };
    SnapshotSink sink = [&](const ProfileSnapshot& snap, const FieldState&) {
        char name[64];
        std::snprintf(name, sizeof(name), "snap_%05d.qkdv", snap_counter++);
        const fs::path p = outdir / name;
        write_profile_snapshot(p, *grid, snap);
        const LoadedSnapshot back = read_profile_snapshot(p);
        RunManifest::SnapshotRef ref;
        ref.file = name;
        ref.t = snap.t;
        ref.checksum = back.checksum;
        man.snapshots.push_back(ref);
        flush_partial();
    };

    flush_partial();
    EvolveResult ev = evolve(eng, u0, scfg, sink);
    res.snapshots = std::move(ev.snapshots);
    res.ledger = ev.ledger;
    man.steps = ev.steps;
    man.completed = !ev.aborted;
    man.abort_reason = ev.abort_reason;
    man.mass_drift = ev.ledger.max_mass_drift;
    man.hamiltonian_drift = ev.ledger.max_hamiltonian_drift;
    man.worst_boundary_ratio = ev.ledger.worst_boundary_ratio;

    {
        CheckRow row;
        row.name = "mass_conservation";
        row.measured = man.mass_drift;
        row.threshold = cfg.mass_alarm;
        row.pass = !ev.ledger.mass_alarmed;
        man.checks.push_back(row);
        row = CheckRow{};
        row.name = "hamiltonian_conservation";
        row.measured = man.hamiltonian_drift;
        row.threshold = cfg.hamiltonian_alarm;
        row.pass = !ev.ledger.hamiltonian_alarmed;
        man.checks.push_back(row);
        row = CheckRow{};
        row.name = "boundary_amplitude";
        row.measured = man.worst_boundary_ratio;
        row.threshold = cfg.boundary_alarm;
        row.pass = !ev.ledger.boundary_alarmed;
        man.checks.push_back(row);
    }

    std::ofstream os(final_path);
    os << manifest_to_json(man) << "\n";
    os.close();
    fs::remove(partial);
    return res;
}

VerifyResult verify_manifest(const std::filesystem::path& manifest_path) {
    VerifyResult out;
    std::ifstream is(manifest_path);
    if (!is) {
        out.rows.push_back({"manifest_readable", false, 0.0, 0.0, "cannot open"});
        return out;
    }
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    RunManifest man = manifest_from_json(text);
    const auto dir = manifest_path.parent_path();

    bool files_ok = true;
    double worst_herm = 0.0;
    GridPtr grid = make_grid(man.config.grid.half_length, man.config.grid.node_count,
                             man.config.grid.dealias_factor);
    for (const auto& ref : man.snapshots) {
        try {
            const LoadedSnapshot snap = read_profile_snapshot(dir / ref.file);
            if (snap.checksum != ref.checksum) files_ok = false;
            worst_herm = std::max(worst_herm, SpectralEngine::hermitian_defect(*grid, snap.snap.fhat));
        } catch (const std::exception&) {
            files_ok = false;
        }
    }
    out.rows.push_back({"snapshot_files_and_checksums", files_ok,
                        static_cast<double>(man.snapshots.size()), 0.0, ""});
    out.rows.push_back({"profile_hermitian_symmetry", worst_herm <= 1e-10, worst_herm, 1e-10, ""});
    out.rows.push_back({"run_completed", man.completed, 0.0, 0.0, man.abort_reason});
    for (const auto& c : man.checks) out.rows.push_back(c);

    out.ok = true;
    for (const auto& r : out.rows) out.ok = out.ok && r.pass;
    return out;
}

} // namespace qkdv
