#include "qkdv/propagator.hpp"

#include <cmath>
#include <stdexcept>

namespace qkdv {

void free_evolve(SpectralEngine& eng, FieldState& s, double t) {
    eng.apply_multiplier(s, [t](double xi) {
        const double ph = t * xi * xi * xi * xi * xi;
        return complexd(std::cos(ph), std::sin(ph));
    });
    s.set_time(s.time() + t);
}

LinearPhase::LinearPhase(double x_, double t_) : x(x_), t(t_) {
    if (t <= 0.0) throw std::invalid_argument("LinearPhase: t must be positive");
    if (x < 0.0) xi0 = std::pow(-x / (5.0 * t), 0.25);
}

namespace {

// 20-point Gauss-Legendre rule on [-1, 1], nodes and weights by Newton on
// P_20 (machine-exact, computed once).
constexpr int kGL = 20;
struct GaussLegendre {
    double x[kGL];
    double w[kGL];
    GaussLegendre() {
        const int n = kGL;
        for (int i = 0; i < n; ++i) {
            double z = std::cos(SpectralGrid::pi() * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }
};
const GaussLegendre& gl_rule() {
    static const GaussLegendre rule;
    return rule;
}

struct Integrand {
    const std::function<complexd(double)>* ghat;
    double x, t, beta;
    complexd operator()(double xi) const {
        const double ph = x * xi + t * xi * xi * xi * xi * xi;
        const double amp = beta == 0.0 ? 1.0 : std::pow(xi, beta);
        return complexd(std::cos(ph), std::sin(ph)) * amp * (*ghat)(xi);
    }
};

complexd gl20(const Integrand& f, double a, double b) {
    const GaussLegendre& r = gl_rule();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    complexd acc(0.0, 0.0);
    for (int i = 0; i < kGL; ++i) acc += r.w[i] * f(c + h * r.x[i]);
    return h * acc;
}

struct AdaptiveState {
    const Integrand* f;
    double tol_per_unit;
    long panels = 0;
    double err = 0.0;
    bool converged = true;
    int max_depth;
};

complexd adapt(AdaptiveState& st, double a, double b, const complexd& whole, int depth) {
    const double mid = 0.5 * (a + b);
    const complexd left = gl20(*st.f, a, mid);
    const complexd right = gl20(*st.f, mid, b);
    const complexd sum = left + right;
    const double diff = std::abs(sum - whole);
    st.panels += 2;
    if (diff <= st.tol_per_unit * (b - a) || depth >= st.max_depth) {
        if (depth >= st.max_depth && diff > st.tol_per_unit * (b - a)) st.converged = false;
        st.err += diff;
        return sum;
    }
    return adapt(st, a, mid, left, depth + 1) + adapt(st, mid, b, right, depth + 1);
}

} // namespace

OscillatoryQuadResult oscillatory_quadrature(const std::function<complexd(double)>& ghat, double x,
                                             double t, double beta,
                                             const OscillatoryQuadOptions& opts) {
    if (beta < 0.0 || beta > 3.0) throw std::invalid_argument("oscillatory_quadrature: beta in [0,3]");
    if (t <= 0.0) throw std::invalid_argument("oscillatory_quadrature: t must be positive");

    // locate the integrand cutoff: scan |g^| xi^beta and truncate the tail
    const int nscan = 4096;
    double gmax = 0.0;
    std::vector<double> mag(nscan + 1);
    for (int i = 0; i <= nscan; ++i) {
        const double xi = opts.max_xi * i / nscan;
        const double a = std::abs(ghat(xi)) * (beta == 0.0 ? 1.0 : std::pow(xi, beta));
        mag[i] = a;
        gmax = std::max(gmax, a);
    }
    if (gmax == 0.0) return {};
    int icut = nscan;
    while (icut > 1 && mag[icut] < opts.tail_rel * gmax && mag[icut - 1] < opts.tail_rel * gmax) --icut;
    double xi_cut = opts.max_xi * std::min(nscan, icut + 2) / nscan;

    // Beyond the stationary region the phase derivative grows like 5 t xi^4;
    // once |g^| xi^beta / |d(phase)| is far below tolerance, truncate there and
    // add the first-order integration-by-parts boundary term instead of
    // marching panels through the non-stationary tail.
    bool ibp_tail = false;
    const double xi_edge = x < 0.0 ? std::pow(-x / (5.0 * t), 0.25) : 0.0;
    const double spread = xi_edge > 0.0 ? 8.0 / std::sqrt(5.0 * t * xi_edge * xi_edge * xi_edge) : 0.0;
    const double ibp_from = 1.35 * xi_edge + spread + 0.25;
    for (int i = 1; i < nscan; ++i) {
        const double xi = opts.max_xi * i / nscan;
        if (xi < ibp_from || xi >= xi_cut) continue;
        const double rate = std::abs(x + 5.0 * t * xi * xi * xi * xi);
        if (rate > 0.0 && mag[i] / rate < 0.02 * opts.abs_tol &&
            mag[i + 1] / rate < 0.02 * opts.abs_tol) {
            xi_cut = xi;
            ibp_tail = true;
            break;
        }
    }

    Integrand f{&ghat, x, t, beta};
    AdaptiveState st;
    st.f = &f;
    st.tol_per_unit = opts.abs_tol / std::max(xi_cut, 1.0);
    st.max_depth = opts.max_depth;

    // march panels sized so the local phase span stays within budget
    complexd total(0.0, 0.0);
    double a = 0.0;
    const double P = opts.phase_budget;
    while (a < xi_cut) {
        const double rate = std::abs(x + 5.0 * t * a * a * a * a);
        const double curv = 20.0 * t * a * a * a + 1e-300;
        // rate*w + curv*w^2/2 <= P, in cancellation-free form
        double w = 2.0 * P / (rate + std::sqrt(rate * rate + 2.0 * curv * P));
        if (!(w > 0.0) || w > xi_cut - a) w = xi_cut - a;
        w = std::min(w, 0.25 * (xi_cut + 1.0));
        const double b = std::min(a + w, xi_cut);
        const complexd whole = gl20(f, a, b);
        total += adapt(st, a, b, whole, 0);
        st.panels += 1;
        a = b;
    }

    if (ibp_tail) {
        // Int_{cut}^inf e^{i phase} h = -h(cut) e^{i phase(cut)} / (i phase'(cut)) + O(tol)
        const double rate = x + 5.0 * t * xi_cut * xi_cut * xi_cut * xi_cut;
        total -= f(xi_cut) / complexd(0.0, rate);
    }

    OscillatoryQuadResult out;
    out.integral = total;
    out.value = std::sqrt(2.0 / SpectralGrid::pi()) * total.real();
    out.error_estimate = st.err;
    out.panels = st.panels;
    out.converged = st.converged && st.err < 10.0 * opts.abs_tol;
    return out;
}

AsymptoticPrediction stationary_phase_predict(const std::function<complexd(double)>& ghat, double x,
                                              double t) {
    if (t < 1.0) throw std::domain_error("stationary_phase_predict: t >= 1 required");
    if (x > -std::pow(t, 0.2))
        throw std::domain_error("stationary_phase_predict: x <= -t^{1/5} required");
    AsymptoticPrediction p;
    p.xi0 = std::pow(-x / (5.0 * t), 0.25);
    p.amplitude = 1.0 / std::sqrt(5.0 * t * p.xi0 * p.xi0 * p.xi0);
    // Phi(xi0) = -4 xi0^5, so the carrier phase is -4 t xi0^5 + pi/4
    const double carrier = -4.0 * t * std::pow(p.xi0, 5) + 0.25 * SpectralGrid::pi();
    const complexd g0 = ghat(p.xi0);
    p.phase = carrier + std::arg(g0);
    p.value = p.amplitude * (std::cos(carrier) * g0.real() - std::sin(carrier) * g0.imag());
    p.error_exponent = -0.45;
    p.region = RegionTag::Oscillatory;
    return p;
}

EnvelopeFitRecord dispersive_envelope_check(const std::function<complexd(double)>& ghat, double beta,
                                            const std::vector<double>& times, double half_length,
                                            int node_count, double z_right_min, double z_right_max) {
    EnvelopeFitRecord rec;
    rec.beta = beta;
    GridPtr grid = make_grid(half_length, node_count);
    SpectralEngine eng(grid);

    // spectrum of |d_x|^beta g
    std::vector<complexd> base(node_count);
    for (int j = 0; j < node_count; ++j) {
        const double xi = grid->frequency(j);
        base[j] = ghat(std::abs(xi)) * (beta == 0.0 ? 1.0 : std::pow(std::abs(xi), beta));
        if (xi < 0.0) base[j] = std::conj(base[j]); // g real
    }
    base[grid->nyquist_index()] = 0.0;

    std::vector<double> spatial_exponents;
    for (double t : times) {
        FieldState s = FieldState::from_spectrum(grid, base, 0.0);
        free_evolve(eng, s, t);
        eng.ensure_physical(s);
        const auto& u = s.physical_raw();
        double sup = 0.0;
        for (double v : u) sup = std::max(sup, std::abs(v));
        rec.times.push_back(t);
        rec.sup_values.push_back(sup);

        // right-side profile on z in [z_right_min, z_right_max]
        const double t15 = std::pow(t, 0.2);
        std::vector<double> zs, vals;
        for (int i = 0; i < 48; ++i) {
            const double z = z_right_min * std::pow(z_right_max / z_right_min, i / 47.0);
            const double xq = z * t15;
            if (xq >= half_length) break;
            const int m = static_cast<int>((xq + half_length) / grid->dx());
            double amp = 0.0;
            for (int o = -2; o <= 2; ++o) {
                const int mm = std::clamp(m + o, 0, node_count - 1);
                amp = std::max(amp, std::abs(u[mm]));
            }
            if (amp > 0.0) {
                zs.push_back(z);
                vals.push_back(amp * std::pow(t, (beta + 1.0) / 5.0));
            }
        }
        if (zs.size() >= 4) {
            spatial_exponents.push_back(fit_power_law(zs, vals).exponent);
            if (t == times.back()) rec.right_spatial_decay = fit_power_law(zs, vals);
        }
    }
    rec.time_decay = fit_power_law(rec.times, rec.sup_values);
    if (rec.right_spatial_decay.points == 0 && !spatial_exponents.empty()) {
        rec.right_spatial_decay.exponent = spatial_exponents.back();
    }
    return rec;
}

} // namespace qkdv
