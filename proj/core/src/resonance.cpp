#include "qkdv/resonance.hpp"
#include "qkdv/bump.hpp"
#include "qkdv/fitting.hpp"

#include <fftw3.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <stdexcept>

namespace qkdv {

namespace {
constexpr double kPi = 3.14159265358979323846;
inline double pow5(double s) { return s * s * s * s * s; }
inline double pow4(double s) { return (s * s) * (s * s); }
inline double pow3(double s) { return s * s * s; }
} // namespace

QuinticPhase::QuinticPhase(double xi) : xi_(xi) {
    if (xi == 0.0) throw std::invalid_argument("QuinticPhase: xi must be nonzero");
}

double QuinticPhase::psi(const Point4& y) const {
    const double w = xi_ - y[0] - y[1] - y[2] - y[3];
    return pow5(xi_) - pow5(w) - pow5(y[0]) - pow5(y[1]) - pow5(y[2]) - pow5(y[3]);
}

Point4 QuinticPhase::grad(const Point4& y) const {
    const double w = xi_ - y[0] - y[1] - y[2] - y[3];
    const double w4 = pow4(w);
    Point4 g;
    for (int a = 0; a < 4; ++a) g[a] = 5.0 * (w4 - pow4(y[a]));
    return g;
}

std::array<std::array<double, 4>, 4> QuinticPhase::hess(const Point4& y) const {
    const double w = xi_ - y[0] - y[1] - y[2] - y[3];
    const double w3 = pow3(w);
    std::array<std::array<double, 4>, 4> h;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) h[a][b] = -20.0 * (w3 + (a == b ? pow3(y[a]) : 0.0));
    return h;
}

std::string RationalValue::str() const {
    return std::to_string(num) + "/" + std::to_string(den);
}

std::array<RationalCatalogEntry, 3> rational_catalog_xi1() {
    // Psi and |det Hess| at xi = 1 for the three stationary-point families.
    std::array<RationalCatalogEntry, 3> out;
    out[0].psi = {624, 625};
    out[0].det = {256, 78125}; // 4^4 / 5^7
    out[0].multiplicity = 1;
    out[1].psi = {80, 81};
    out[1].det = {160000, 177147}; // 4^4 5^4 / 3^11
    out[1].multiplicity = 5;
    out[2].psi = {0, 1};
    out[2].det = {160000, 1}; // 4^4 5^4
    out[2].multiplicity = 10;
    return out;
}

namespace {

std::vector<Point4> canonical_points(double xi) {
    std::vector<Point4> pts;
    const double f5 = xi / 5.0, f3 = xi / 3.0;
    pts.push_back({f5, f5, f5, f5});
    pts.push_back({-f3, f3, f3, f3});
    pts.push_back({f3, -f3, f3, f3});
    pts.push_back({f3, f3, -f3, f3});
    pts.push_back({f3, f3, f3, -f3});
    pts.push_back({f3, f3, f3, f3});
    pts.push_back({-xi, -xi, xi, xi});
    pts.push_back({-xi, xi, -xi, xi});
    pts.push_back({-xi, xi, xi, -xi});
    pts.push_back({xi, -xi, -xi, xi});
    pts.push_back({xi, -xi, xi, -xi});
    pts.push_back({xi, xi, -xi, -xi});
    pts.push_back({xi, xi, xi, -xi});
    pts.push_back({xi, xi, -xi, xi});
    pts.push_back({xi, -xi, xi, xi});
    pts.push_back({-xi, xi, xi, xi});
    return pts;
}

bool newton_root(const QuinticPhase& ph, Point4& y, double tol) {
    for (int it = 0; it < 80; ++it) {
        const Point4 g = ph.grad(y);
        double gn = 0.0;
        for (double v : g) gn = std::max(gn, std::abs(v));
        if (gn <= tol) return true;
        const auto h = ph.hess(y);
        Eigen::Matrix4d H;
        Eigen::Vector4d G;
        for (int a = 0; a < 4; ++a) {
            G(a) = g[a];
            for (int b = 0; b < 4; ++b) H(a, b) = h[a][b];
        }
        Eigen::FullPivLU<Eigen::Matrix4d> lu(H);
        if (!lu.isInvertible()) return false;
        const Eigen::Vector4d d = lu.solve(G);
        if (!d.allFinite()) return false;
        double step = 1.0;
        for (int back = 0; back < 30; ++back) {
            Point4 yn = y;
            for (int a = 0; a < 4; ++a) yn[a] = y[a] - step * d(a);
            const Point4 gnw = ph.grad(yn);
            double gnn = 0.0;
            for (double v : gnw) gnn = std::max(gnn, std::abs(v));
            if (gnn < gn || step < 1e-6) {
                y = yn;
                break;
            }
            step *= 0.5;
        }
    }
    const Point4 g = ph.grad(y);
    double gn = 0.0;
    for (double v : g) gn = std::max(gn, std::abs(v));
    return gn <= tol;
}

int hessian_signature(const QuinticPhase& ph, const Point4& y) {
    const auto h = ph.hess(y);
    Eigen::Matrix4d H;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) H(a, b) = h[a][b];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(H);
    int sig = 0;
    for (int a = 0; a < 4; ++a) sig += es.eigenvalues()(a) > 0.0 ? 1 : -1;
    return sig;
}

double hessian_det_abs(const QuinticPhase& ph, const Point4& y) {
    const auto h = ph.hess(y);
    Eigen::Matrix4d H;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) H(a, b) = h[a][b];
    return std::abs(H.determinant());
}

} // namespace

std::vector<int> ResonanceCatalog::group_indices(int group) const {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(points.size()); ++i)
        if (points[i].group == group) idx.push_back(i);
    return idx;
}

ResonanceCatalog find_stationary_points(double xi, std::uint64_t seed, long multistarts) {
    if (xi == 0.0) throw std::invalid_argument("find_stationary_points: xi must be nonzero");
    const QuinticPhase ph(xi);
    const double scale = std::abs(xi);
    const double grad_tol = 1e-12 * std::max(pow4(scale), 1e-4) * 20.0;
    const double match_tol = 1e-7 * std::max(scale, 1.0);

    ResonanceCatalog cat;
    cat.xi = xi;
    cat.multistarts = multistarts;
    const std::vector<Point4> canon = canonical_points(xi);

    auto classify = [&](const Point4& y) -> int {
        for (size_t i = 0; i < canon.size(); ++i) {
            double d = 0.0;
            for (int a = 0; a < 4; ++a) d = std::max(d, std::abs(y[a] - canon[i][a]));
            if (d < match_tol) return static_cast<int>(i);
        }
        return -1;
    };

    std::vector<bool> seen(canon.size(), false);
    std::vector<Point4> extras;

    auto try_start = [&](Point4 y) {
        if (!newton_root(ph, y, grad_tol)) {
            ++cat.newton_failures;
            return;
        }
        const int id = classify(y);
        if (id >= 0) {
            seen[id] = true;
            return;
        }
        for (const Point4& e : extras) {
            double d = 0.0;
            for (int a = 0; a < 4; ++a) d = std::max(d, std::abs(y[a] - e[a]));
            if (d < match_tol) return;
        }
        extras.push_back(y);
    };

    for (const Point4& s : canon) try_start(s);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0 * scale, 2.0 * scale);
    for (long i = 0; i < multistarts; ++i) {
        Point4 y{dist(rng), dist(rng), dist(rng), dist(rng)};
        try_start(y);
    }
    cat.extra_roots = static_cast<int>(extras.size());
    // Newton failures from random starts are expected (divergence towards
    // infinity); they only matter if a known root was missed.
    for (bool s : seen)
        if (!s) throw std::runtime_error("find_stationary_points: a known stationary point was not found");

    for (size_t i = 0; i < canon.size(); ++i) {
        StationaryPoint p;
        p.y = canon[i];
        p.psi = ph.psi(p.y);
        p.det_abs = hessian_det_abs(ph, p.y);
        p.signature_psi = hessian_signature(ph, p.y);
        p.beta = -p.signature_psi; // signature of Hess(-Psi)
        p.group = i == 0 ? 0 : (i <= 5 ? 1 : 2);
        const int paper_beta = p.group == 2 ? 0 : (xi > 0 ? 0 : 2);
        p.matches_paper_beta = p.beta == paper_beta;
        cat.points.push_back(p);
    }
    return cat;
}

complexd stationary_phase_4d(const std::function<complexd(const Point4&)>& F,
                             const std::function<double(const Point4&)>& chi, double lambda,
                             const ResonanceCatalog& catalog) {
    complexd acc(0.0, 0.0);
    for (const StationaryPoint& p : catalog.points) {
        if (p.det_abs <= 0.0) throw std::domain_error("stationary_phase_4d: degenerate Hessian");
        const double w = chi(p.y);
        if (w == 0.0) continue;
        const complexd rot = std::polar(1.0, kPi * p.beta / 4.0 - lambda * p.psi);
        acc += 4.0 * kPi * kPi / std::sqrt(p.det_abs) / (lambda * lambda) * rot * F(p.y) * w;
    }
    return acc;
}

ResonanceCoefficients derive_resonance_coefficients(const ResonanceCatalog& catalog) {
    const double xi = catalog.xi;
    const double xi6 = pow5(xi) * xi;
    complexd s0(0.0, 0.0), s1(0.0, 0.0), s2(0.0, 0.0);
    for (const StationaryPoint& p : catalog.points) {
        const complexd term = std::polar(1.0 / std::sqrt(p.det_abs), kPi * p.beta / 4.0);
        if (p.group == 0) s0 += term;
        if (p.group == 1) s1 += term;
        if (p.group == 2) s2 += term;
    }
    ResonanceCoefficients rc;
    rc.c0 = complexd(0.0, -1.0) * xi6 * s2;
    rc.c1 = -xi6 * s0;
    rc.c2 = -xi6 * s1;
    rc.c0_ok = std::abs(rc.c0 - complexd(0.0, -1.0 / 40.0)) <= 1e-12;
    return rc;
}

// ---------------------------------------------------------------------------

namespace {

std::mutex& oracle_planner_mutex() {
    static std::mutex m;
    return m;
}

// continuum transform of complex samples on eta_m = -S + m * d, FFT order dual
void oracle_forward(std::vector<complexd>& h, double span, fftw_plan plan, complexd* buf) {
    const int m = static_cast<int>(h.size());
    std::copy(h.begin(), h.end(), buf);
    fftw_execute(plan);
    const double d = 2.0 * span / m;
    const double scale = d / std::sqrt(2.0 * kPi);
    for (int j = 0; j < m; ++j) {
        const int k = j < m / 2 ? j : j - m;
        const double tw = (k & 1) ? -scale : scale;
        h[j] = tw * buf[j];
    }
}

} // namespace

complexd oracle_m_integral(const std::function<complexd(double)>& g, double xi, double t,
                           const OracleOptions& opts) {
    const int m = opts.points;
    const double span = opts.span;
    const double d = 2.0 * span / m;

    fftw_complex* buf = fftw_alloc_complex(m);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(oracle_planner_mutex());
        plan = fftw_plan_dft_1d(m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    complexd* cbuf = reinterpret_cast<complexd*>(buf);

    // five slot spectra; slot 0 is the w slot
    std::vector<std::vector<complexd>> H(5);
    for (int slot = 0; slot < 5; ++slot) {
        std::vector<complexd> h(m);
        for (int i = 0; i < m; ++i) {
            const double s = -span + d * i;
            complexd v = g(s);
            if (opts.windows) {
                const SlotWindow& w = (*opts.windows)[slot];
                v *= window_flat(s, w.center, w.flat_radius, w.shoulder);
            }
            h[i] = v * std::polar(1.0, t * pow5(s));
        }
        oracle_forward(h, span, plan, cbuf);
        H[slot] = std::move(h);
    }
    {
        std::lock_guard<std::mutex> lock(oracle_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);

    // (h0*...*h4)(xi) = (2 pi)^2 (2 pi)^{-1/2} Int prod_i F(h_i)(x) e^{i x xi} dx
    const double dxdual = kPi / span;
    complexd acc(0.0, 0.0);
    for (int j = 0; j < m; ++j) {
        const int k = j < m / 2 ? j : j - m;
        const double x = dxdual * k;
        complexd p = H[0][j];
        for (int slot = 1; slot < 5; ++slot) p *= H[slot][j];
        acc += p * std::polar(1.0, x * xi);
    }
    acc *= std::pow(2.0 * kPi, 1.5) * dxdual;
    return std::polar(1.0, -t * pow5(xi)) * acc;
}

complexd direct_tensor_sum(const std::function<complexd(double)>& g, double xi, double t,
                           double span, int points,
                           const std::optional<std::array<SlotWindow, 5>>& windows) {
    const int m = points;
    const double d = 2.0 * span / m;
    std::vector<complexd> slot_vals(m);
    std::vector<double> nodes(m);
    auto slot_fn = [&](int slot, double s) {
        complexd v = g(s);
        if (windows) {
            const SlotWindow& w = (*windows)[slot];
            v *= window_flat(s, w.center, w.flat_radius, w.shoulder);
        }
        return v;
    };
    for (int i = 0; i < m; ++i) nodes[i] = -span + d * i;
    // precompute the four integrated slots; the w slot is evaluated inside
    std::vector<std::vector<complexd>> sv(4, std::vector<complexd>(m));
    for (int slot = 1; slot <= 4; ++slot)
        for (int i = 0; i < m; ++i)
            sv[slot - 1][i] = slot_fn(slot, nodes[i]) * std::polar(1.0, t * pow5(nodes[i]));

    complexd acc(0.0, 0.0);
    for (int i1 = 0; i1 < m; ++i1) {
        if (std::abs(sv[0][i1]) == 0.0) continue;
        for (int i2 = 0; i2 < m; ++i2) {
            if (std::abs(sv[1][i2]) == 0.0) continue;
            const complexd p12 = sv[0][i1] * sv[1][i2];
            const double s12 = nodes[i1] + nodes[i2];
            for (int i3 = 0; i3 < m; ++i3) {
                if (std::abs(sv[2][i3]) == 0.0) continue;
                const complexd p123 = p12 * sv[2][i3];
                const double s123 = s12 + nodes[i3];
                for (int i4 = 0; i4 < m; ++i4) {
                    const complexd p4 = sv[3][i4];
                    if (std::abs(p4) == 0.0) continue;
                    const double w = xi - s123 - nodes[i4];
                    const complexd vw = slot_fn(0, w) * std::polar(1.0, t * pow5(w));
                    acc += p123 * p4 * vw;
                }
            }
        }
    }
    acc *= d * d * d * d;
    return std::polar(1.0, -t * pow5(xi)) * acc;
}

CoefficientOracleResult oracle_coefficient_check(const std::function<complexd(double)>& g, double xi,
                                                 double lambda_center, int samples,
                                                 const OracleOptions& opts) {
    const ResonanceCatalog cat = find_stationary_points(xi, 1, 0);
    // common F values per group (the profile is sampled at the point coords)
    auto F_at = [&](const StationaryPoint& p) {
        const double w = xi - p.y[0] - p.y[1] - p.y[2] - p.y[3];
        complexd F = g(w);
        for (double c : p.y) F *= g(c);
        return F;
    };
    const double xi5 = pow5(xi);
    const complexd F0 = F_at(cat.points[0]);
    const complexd F1 = F_at(cat.points[1]);
    const complexd F2 = F_at(cat.points[6]);

    // J(lambda) ~ sum_g C_g lambda^{-2} e^{-i lambda Psi_g} + D_g lambda^{-3} e^{...}
    Eigen::MatrixXcd A(samples, 6);
    Eigen::VectorXcd b(samples);
    double jscale = 0.0;
    for (int m = 0; m < samples; ++m) {
        const double lam = lambda_center * (0.7 + 0.6 * m / (samples - 1.0));
        const complexd J = oracle_m_integral(g, xi, lam, opts);
        b(m) = J;
        jscale = std::max(jscale, std::abs(J));
        const complexd e1 = std::polar(1.0, -lam * (624.0 / 625.0) * xi5);
        const complexd e2 = std::polar(1.0, -lam * (80.0 / 81.0) * xi5);
        const double l2 = 1.0 / (lam * lam), l3 = l2 / lam;
        A(m, 0) = l2;
        A(m, 1) = l2 * e1;
        A(m, 2) = l2 * e2;
        A(m, 3) = l3;
        A(m, 4) = l3 * e1;
        A(m, 5) = l3 * e2;
    }
    const Eigen::VectorXcd coef = A.colPivHouseholderQr().solve(b);
    CoefficientOracleResult out;
    const double xi6 = xi5 * xi;
    // C_g = 4 pi^2 sum_a Delta_a^{-1/2} e^{i pi beta_a/4} F_a; with common F
    // per group the coefficient normalization c_g = -(i) xi^6 S_g maps to:
    out.c0 = complexd(0.0, -1.0) * xi6 * coef(0) / (4.0 * kPi * kPi * F2);
    out.c1 = -xi6 * coef(1) / (4.0 * kPi * kPi * F0);
    out.c2 = -xi6 * coef(2) / (4.0 * kPi * kPi * F1);
    const Eigen::VectorXcd resid = A * coef - b;
    out.residual = std::sqrt(resid.squaredNorm() / samples) / std::max(jscale, 1e-300);
    return out;
}

// ---------------------------------------------------------------------------

OdeCoefficients effective_ode_coefficients(double sign_xi) {
    const ResonanceCatalog cat = find_stationary_points(sign_xi > 0 ? 1.0 : -1.0, 0x5eed, 0);
    const ResonanceCoefficients rc = derive_resonance_coefficients(cat);
    OdeCoefficients co;
    co.c0 = rc.c0;
    co.c1 = rc.c1;
    co.c2 = rc.c2;
    co.duhamel_scale = 0.2;
    return co;
}

complexd ode_rhs(const OdeCoefficients& co, const std::function<complexd(double)>& fhat_at, double t,
                 double xi, bool include_c0) {
    if (std::abs(xi) <= std::pow(t, -0.2)) return complexd(0.0, 0.0);
    const double xi5 = pow5(xi);
    const complexd f = fhat_at(xi);
    const complexd f5 = fhat_at(xi / 5.0);
    const complexd f3 = fhat_at(xi / 3.0);
    complexd rhs(0.0, 0.0);
    if (include_c0) rhs += co.c0 * std::norm(f) * std::norm(f) * f;
    rhs += complexd(0.0, 1.0) * co.c1 * std::polar(1.0, -624.0 * t * xi5 / 625.0) * f5 * f5 * f5 * f5 * f5;
    rhs += complexd(0.0, 1.0) * co.c2 * std::polar(1.0, -80.0 * t * xi5 / 81.0) * std::norm(f3) * f3 *
           f3 * f3;
    return co.duhamel_scale / (t * t * xi5) * rhs;
}

OdeResidualRecord ode_residual(const SpectralGrid& grid,
                               const std::vector<ProfileSnapshot>& snapshots,
                               const std::vector<double>& centers, double pair_offset,
                               double xi_min, double xi_max, const OdeCoefficients& co) {
    OdeResidualRecord rec;
    auto find_snap = [&](double t) -> const ProfileSnapshot* {
        for (const auto& s : snapshots)
            if (std::abs(s.t - t) < 1e-9 * std::max(1.0, t)) return &s;
        return nullptr;
    };

    std::vector<int> band;
    for (int k = 1; k < grid.node_count() / 2; ++k) {
        const double xi = grid.frequency(grid.index_of(k));
        if (xi >= xi_min && xi <= xi_max) band.push_back(k);
    }
    rec.xis.reserve(band.size());
    for (int k : band) rec.xis.push_back(grid.frequency(grid.index_of(k)));
    rec.integrated_full.assign(band.size(), 0.0);
    rec.integrated_omit.assign(band.size(), 0.0);
    rec.integrated_lhs.assign(band.size(), 0.0);
    if (pair_offset * std::pow(xi_max, 5) >= kPi / 8.0) rec.sampling_warning = true;

    // positive-frequency interpolation table indices
    std::vector<double> xs;
    for (int k = 0; k <= grid.node_count() / 2 - 1; ++k) xs.push_back(grid.frequency(grid.index_of(k)));

    std::vector<double> used_centers;
    std::vector<std::vector<complexd>> lhs_per_center, full_per_center, omit_per_center;
    for (double tc : centers) {
        const ProfileSnapshot* lo = find_snap(tc - pair_offset);
        const ProfileSnapshot* hi = find_snap(tc + pair_offset);
        if (!lo || !hi) continue;
        used_centers.push_back(tc);
        std::vector<double> re(xs.size()), im(xs.size());
        for (size_t k = 0; k < xs.size(); ++k) {
            const complexd mid = 0.5 * (lo->fhat[grid.index_of(static_cast<int>(k))] +
                                        hi->fhat[grid.index_of(static_cast<int>(k))]);
            re[k] = mid.real();
            im[k] = mid.imag();
        }
        auto fhat_at = [&](double xi) {
            const double a = std::abs(xi);
            if (a > xs.back()) return complexd(0.0, 0.0);
            complexd v(interp_cubic(xs, re, a), interp_cubic(xs, im, a));
            if (xi < 0.0) v = std::conj(v);
            return v;
        };
        std::vector<complexd> lhs(band.size()), full(band.size()), omit(band.size());
        for (size_t b = 0; b < band.size(); ++b) {
            const int j = grid.index_of(band[b]);
            lhs[b] = (hi->fhat[j] - lo->fhat[j]) / (2.0 * pair_offset);
            full[b] = ode_rhs(co, fhat_at, tc, rec.xis[b], true);
            omit[b] = ode_rhs(co, fhat_at, tc, rec.xis[b], false);
        }
        lhs_per_center.push_back(std::move(lhs));
        full_per_center.push_back(std::move(full));
        omit_per_center.push_back(std::move(omit));
    }

    // trapezoid in time over the used centers
    for (size_t c = 0; c < used_centers.size(); ++c) {
        double w = 0.0;
        if (c > 0) w += 0.5 * (used_centers[c] - used_centers[c - 1]);
        if (c + 1 < used_centers.size()) w += 0.5 * (used_centers[c + 1] - used_centers[c]);
        for (size_t b = 0; b < band.size(); ++b) {
            rec.integrated_full[b] += w * std::abs(lhs_per_center[c][b] - full_per_center[c][b]);
            rec.integrated_omit[b] += w * std::abs(lhs_per_center[c][b] - omit_per_center[c][b]);
            rec.integrated_lhs[b] += w * std::abs(lhs_per_center[c][b]);
        }
    }
    for (size_t b = 0; b < band.size(); ++b) {
        rec.band_full += rec.integrated_full[b];
        rec.band_omit += rec.integrated_omit[b];
    }
    rec.improvement_factor = rec.band_full > 0.0 ? rec.band_omit / rec.band_full : 0.0;
    return rec;
}

} // namespace qkdv
