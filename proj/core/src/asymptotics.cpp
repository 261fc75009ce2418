#include "qkdv/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkdv {

namespace {
constexpr double kPi = 3.14159265358979323846;
inline double pow5(double s) { return s * s * s * s * s; }

// u^(t) = e^{i t xi^5} f^(t); evaluate u at x via the inverse-transform sum.
complexd field_sum(const SpectralGrid& grid, const ProfileSnapshot& snap, double x,
                   int derivative = 0) {
    complexd acc(0.0, 0.0);
    const int n = grid.node_count();
    for (int j = 0; j < n; ++j) {
        if (j == grid.nyquist_index()) continue;
        const double xi = grid.frequency(j);
        const complexd coeff = snap.fhat[j] * std::polar(1.0, snap.t * pow5(xi) + xi * x);
        if (derivative == 0) {
            acc += coeff;
        } else {
            complexd d(1.0, 0.0);
            for (int q = 0; q < derivative; ++q) d *= complexd(0.0, xi);
            acc += d * coeff;
        }
    }
    return acc * std::sqrt(2.0 * kPi) / (2.0 * grid.half_length());
}
} // namespace

double evaluate_field_at(const SpectralGrid& grid, const ProfileSnapshot& snap, double x) {
    return field_sum(grid, snap, x).real();
}

PhaseCorrection accumulate_phase(const SpectralGrid& grid,
                                 const std::vector<ProfileSnapshot>& snapshots, double k_eff) {
    PhaseCorrection pc;
    pc.k_eff = k_eff;
    const int n = grid.node_count();
    std::vector<double> prev4(n, 0.0), cur4(n, 0.0);
    std::vector<double> B(n, 0.0);
    double prev_t = 0.0;
    bool first = true;
    for (const auto& s : snapshots) {
        if (s.t < 1.0) continue;
        for (int j = 0; j < n; ++j) {
            const double a2 = std::norm(s.fhat[j]);
            cur4[j] = a2 * a2;
        }
        if (!first) {
            for (int j = 0; j < n; ++j) {
                const double xi = grid.frequency(j);
                if (xi == 0.0 || j == grid.nyquist_index()) continue;
                // indicator |xi| > s^{-1/5}: accumulate only past the onset time
                const double onset = std::pow(std::abs(xi), -5.0);
                const double lo = std::max(prev_t, std::max(1.0, onset));
                if (s.t <= lo) continue;
                const double wlo = std::max(lo, prev_t);
                const double integrand_lo = prev4[j] / (wlo * wlo);
                const double integrand_hi = cur4[j] / (s.t * s.t);
                B[j] += 0.5 * (integrand_lo + integrand_hi) * (s.t - wlo) / (k_eff * pow5(xi));
                if (prev4[j] > 0.0 && std::abs(cur4[j] - prev4[j]) > 0.1 * prev4[j] &&
                    prev4[j] > 1e-12 * cur4[j]) {
                    const double amax = *std::max_element(cur4.begin(), cur4.end());
                    if (cur4[j] > 1e-6 * amax) pc.spacing_warning = true;
                }
            }
        }
        pc.times.push_back(s.t);
        pc.B.push_back(B);
        prev4.swap(cur4);
        prev_t = s.t;
        first = false;
    }
    return pc;
}

std::vector<complexd> modified_profile(const std::vector<complexd>& fhat,
                                       const std::vector<double>& B) {
    std::vector<complexd> w(fhat.size());
    for (size_t j = 0; j < fhat.size(); ++j) w[j] = std::polar(1.0, B[j]) * fhat[j];
    return w;
}

ScatteringLimit scattering_limit(const SpectralGrid& grid,
                                 const std::vector<ProfileSnapshot>& snapshots, double band_lo,
                                 double band_hi, double k_eff, double delta) {
    ScatteringLimit out;
    out.k_eff = k_eff;
    out.band_lo = band_lo;
    out.band_hi = band_hi;

    std::vector<const ProfileSnapshot*> snaps;
    for (const auto& s : snapshots)
        if (s.t >= 1.0) snaps.push_back(&s);
    if (snaps.size() < 3) throw std::invalid_argument("scattering_limit: need >= 3 snapshots");

    std::vector<ProfileSnapshot> centered;
    for (const auto* s : snaps) centered.push_back(*s);
    const PhaseCorrection pc = accumulate_phase(grid, centered, k_eff);

    const int n = grid.node_count();
    std::vector<int> band;
    for (int j = 0; j < n; ++j) {
        const double xi = std::abs(grid.frequency(j));
        if (j != grid.nyquist_index() && xi >= band_lo && xi <= band_hi) band.push_back(j);
    }
    if (band.empty()) throw std::invalid_argument("scattering_limit: empty band");

    std::vector<std::vector<complexd>> wts;
    for (size_t i = 0; i < pc.times.size(); ++i) {
        // find the matching snapshot
        const ProfileSnapshot* s = nullptr;
        for (const auto* c : snaps)
            if (std::abs(c->t - pc.times[i]) < 1e-12 * std::max(1.0, c->t)) s = c;
        if (!s) continue;
        out.times.push_back(s->t);
        wts.push_back(modified_profile(s->fhat, pc.B[i]));
    }

    auto band_sup_diff = [&](const std::vector<complexd>& a, const std::vector<complexd>& b) {
        double m = 0.0;
        for (int j : band) m = std::max(m, std::abs(a[j] - b[j]));
        return m;
    };

    std::vector<double> mid_times;
    for (size_t i = 0; i + 1 < wts.size(); ++i) {
        out.diffs_w.push_back(band_sup_diff(wts[i], wts[i + 1]));
        double df = 0.0;
        for (int j : band) {
            const ProfileSnapshot& a = *snaps[i];
            const ProfileSnapshot& b = *snaps[i + 1];
            df = std::max(df, std::abs(a.fhat[j] - b.fhat[j]));
        }
        out.diffs_f.push_back(df);
        mid_times.push_back(std::sqrt(out.times[i] * out.times[i + 1]));
    }
    out.rate_in_t = fit_power_law(mid_times, out.diffs_w);
    out.rate_in_scaled = 5.0 * out.rate_in_t.exponent;
    (void)delta;

    // Cauchy certificate: tail diffs below head diffs
    if (out.diffs_w.size() >= 4) {
        const size_t h = out.diffs_w.size() / 2;
        double head = 0.0, tail = 0.0;
        for (size_t i = 0; i < h; ++i) head = std::max(head, out.diffs_w[i]);
        for (size_t i = h; i < out.diffs_w.size(); ++i) tail = std::max(tail, out.diffs_w[i]);
        out.cauchy_ok = tail <= head;
    }

    // terminal limits
    const ProfileSnapshot& last = *snaps.back();
    out.w_inf = wts.back();
    out.A_inf.assign(n, 0.0);
    out.f_inf.assign(n, complexd(0.0, 0.0));
    const std::vector<double>& Bl = pc.B.back();
    for (int j = 0; j < n; ++j) {
        const double xi = grid.frequency(j);
        if (xi == 0.0 || j == grid.nyquist_index()) continue;
        const double a2 = std::norm(last.fhat[j]);
        out.A_inf[j] = Bl[j] + a2 * a2 / (k_eff * last.t * pow5(xi));
        out.f_inf[j] = out.w_inf[j] * std::polar(1.0, -out.A_inf[j]);
    }

    // drift comparison over [t_mid, t_end]
    size_t imid = 0;
    for (size_t i = 0; i < out.times.size(); ++i)
        if (out.times[i] <= std::sqrt(out.times.front() * out.times.back())) imid = i;
    double du = 0.0, dw = 0.0;
    for (int j : band) {
        du = std::max(du, std::abs(snaps.back()->fhat[j] - snaps[imid]->fhat[j]));
        dw = std::max(dw, std::abs(wts.back()[j] - wts[imid][j]));
    }
    out.drift_uncorrected = du;
    out.drift_corrected = dw;
    out.drift_ratio = dw > 0.0 ? du / dw : 0.0;
    return out;
}

AsymptoticReport oscillatory_prediction(const SpectralGrid& grid, const ProfileSnapshot& snap,
                                        const std::vector<complexd>& f_inf,
                                        const std::vector<double>& stations_z, double eps0,
                                        double gamma, double k_eff) {
    AsymptoticReport rep;
    rep.region = "oscillatory";
    const double t = snap.t;
    const double t15 = std::pow(t, 0.2);

    // cubic interpolation tables for f_inf on xi >= 0
    std::vector<double> xs, re, im;
    for (int k = 0; k <= grid.node_count() / 2 - 1; ++k) {
        const int j = grid.index_of(k);
        xs.push_back(grid.frequency(j));
        re.push_back(f_inf[j].real());
        im.push_back(f_inf[j].imag());
    }

    const double z_min_region = std::pow(t, 4.0 * gamma);
    for (double z : stations_z) {
        if (z < z_min_region) continue; // outside x <= -t^{1/5 + 4 gamma}
        StationRecord r;
        r.t = t;
        r.z = z;
        r.x = -z * t15;
        if (-r.x >= grid.half_length()) continue;
        const double xi0 = std::pow(z / 5.0, 0.25) / t15;
        if (xi0 > xs.back()) continue;
        const complexd fi(interp_cubic(xs, re, xi0), interp_cubic(xs, im, xi0));
        const double a2 = std::norm(fi);
        const double phase = -4.0 * t * pow5(xi0) + 0.25 * kPi + a2 * a2 / (k_eff * t * pow5(xi0));
        const double amp = 1.0 / std::sqrt(5.0 * t * xi0 * xi0 * xi0);
        r.predicted = amp * (std::cos(phase) * fi.real() - std::sin(phase) * fi.imag());
        r.measured = evaluate_field_at(grid, snap, r.x);
        r.error = std::abs(r.measured - r.predicted);
        r.budget = eps0 * std::pow(t, -0.2) * std::pow(z, -0.45);
        r.within_budget = r.error <= 3.0 * r.budget;
        rep.worst_ratio = std::max(rep.worst_ratio, r.budget > 0 ? r.error / r.budget : 0.0);
        rep.stations.push_back(r);
    }
    rep.note = "phase correction evaluated at xi0 throughout";
    return rep;
}

SelfSimilarFrame self_similar_extract(const SpectralGrid& grid,
                                      const std::vector<ProfileSnapshot>& snapshots, double gamma,
                                      int window_points) {
    SelfSimilarFrame fr;
    fr.gamma = gamma;
    std::vector<const ProfileSnapshot*> snaps;
    for (const auto& s : snapshots)
        if (s.t >= 1.0) snaps.push_back(&s);
    if (snaps.size() < 3) throw std::invalid_argument("self_similar_extract: need >= 3 snapshots");

    const double t_last = snaps.back()->t;
    const double half_window = std::pow(t_last, 4.0 * gamma);
    fr.window_x.resize(window_points);
    for (int i = 0; i < window_points; ++i)
        fr.window_x[i] = -half_window + 2.0 * half_window * i / (window_points - 1);

    for (const auto* s : snaps) {
        const double t = s->t;
        const double t15 = std::pow(t, 0.2);
        if (half_window * t15 >= grid.half_length()) fr.window_warning = true;
        std::vector<double> v(window_points), r4(window_points);
        for (int i = 0; i < window_points; ++i) {
            const double X = fr.window_x[i] * t15;
            v[i] = t15 * field_sum(grid, *s, X).real();
            r4[i] = t * field_sum(grid, *s, X, 4).real(); // d_x^4 v in frame coords
        }
        double acc = 0.0;
        for (int i = 0; i < window_points; ++i) {
            const double x = fr.window_x[i];
            const double res = r4[i] + x * v[i] / 5.0 - pow5(v[i]) / 5.0;
            acc += res * res;
        }
        const double dxw = 2.0 * half_window / (window_points - 1);
        fr.times.push_back(t);
        fr.v.push_back(std::move(v));
        fr.ode_residual_l2.push_back(std::sqrt(acc * dxw));
    }
    fr.Q = fr.v.back();
    for (double q : fr.Q) fr.q_sup = std::max(fr.q_sup, std::abs(q));
    for (size_t k = 0; k + 1 < fr.v.size(); ++k) {
        double d = 0.0;
        for (int i = 0; i < window_points; ++i) d = std::max(d, std::abs(fr.v[k][i] - fr.v[k + 1][i]));
        fr.cauchy_diffs.push_back(d);
    }
    fr.residual_decay = fit_power_law(fr.times, fr.ode_residual_l2);
    return fr;
}

AsymptoticReport decay_region_check(const SpectralGrid& grid,
                                    const std::vector<ProfileSnapshot>& snapshots, double z_lo,
                                    double z_hi) {
    AsymptoticReport rep;
    rep.region = "decaying";
    std::vector<double> zs, vals;
    for (const auto& s : snapshots) {
        if (s.t < 1.0) continue;
        const double t15 = std::pow(s.t, 0.2);
        for (int i = 0; i < 40; ++i) {
            const double z = z_lo * std::pow(z_hi / z_lo, i / 39.0);
            const double x = z * t15;
            if (x >= grid.half_length()) break;
            // envelope: local max of |u| over a half-oscillation neighborhood
            double amp = std::abs(evaluate_field_at(grid, s, x));
            const double val = amp * t15;
            StationRecord r;
            r.t = s.t;
            r.x = x;
            r.z = z;
            r.measured = amp;
            rep.stations.push_back(r);
            if (val > 0.0) {
                zs.push_back(z);
                vals.push_back(val);
            }
        }
    }
    rep.fit = fit_power_law(zs, vals);
    return rep;
}

} // namespace qkdv
