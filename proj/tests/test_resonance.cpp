#include <doctest.h>

#include "qkdv/fitting.hpp"
#include "qkdv/resonance.hpp"

#include <cmath>
#include <complex>

using namespace qkdv;

namespace {
constexpr double kPi = 3.14159265358979323846;
const auto gauss_profile = [](double s) { return complexd(std::exp(-0.5 * s * s), 0.0); };
} // namespace

TEST_SUITE_BEGIN("resonance");

TEST_CASE("quintic phase: gradient, Hessian, homogeneity") {
    QuinticPhase ph(1.3);
    const Point4 y{0.2, -0.4, 0.11, 0.07};
    // gradient by central differences
    const Point4 g = ph.grad(y);
    for (int a = 0; a < 4; ++a) {
        Point4 yp = y, ym = y;
        const double h = 1e-6;
        yp[a] += h;
        ym[a] -= h;
        const double fd = (ph.psi(yp) - ph.psi(ym)) / (2.0 * h);
        CHECK(g[a] == doctest::Approx(fd).epsilon(1e-7));
    }
    const auto H = ph.hess(y);
    for (int a = 0; a < 4; ++a) {
        Point4 yp = y, ym = y;
        const double h = 1e-6;
        yp[a] += h;
        ym[a] -= h;
        const Point4 gp = ph.grad(yp), gm = ph.grad(ym);
        for (int b = 0; b < 4; ++b)
            CHECK(H[a][b] == doctest::Approx((gp[b] - gm[b]) / (2.0 * h)).epsilon(1e-6));
    }
    // degree-5 homogeneity under joint scaling
    QuinticPhase ph2(2.6);
    const Point4 y2{0.4, -0.8, 0.22, 0.14};
    CHECK(ph2.psi(y2) == doctest::Approx(32.0 * ph.psi(y)).epsilon(1e-13));
}

TEST_CASE("catalog at xi = 1 reproduces the golden stationary-point table") {
    const ResonanceCatalog cat = find_stationary_points(1.0, 0x5eed, 10000);
    REQUIRE(cat.points.size() == 16);
    CHECK(cat.extra_roots == 0);

    const QuinticPhase ph(1.0);
    for (const StationaryPoint& p : cat.points) {
        const Point4 g = ph.grad(p.y);
        for (double v : g) CHECK(std::abs(v) < 1e-12);
    }

    const auto rat = rational_catalog_xi1();
    CHECK(rat[0].psi.str() == "624/625");
    CHECK(rat[1].psi.str() == "80/81");
    CHECK(rat[2].psi.str() == "0/1");
    CHECK(rat[0].det.str() == "256/78125");
    CHECK(rat[1].det.str() == "160000/177147");
    CHECK(rat[2].det.str() == "160000/1");

    const auto g0 = cat.group_indices(0), g1 = cat.group_indices(1), g2 = cat.group_indices(2);
    REQUIRE(g0.size() == 1);
    REQUIRE(g1.size() == 5);
    REQUIRE(g2.size() == 10);
    CHECK(cat.points[g0[0]].psi == doctest::Approx(624.0 / 625.0).epsilon(1e-12));
    CHECK(cat.points[g0[0]].det_abs == doctest::Approx(256.0 / 78125.0).epsilon(1e-12));
    for (int i : g1) {
        CHECK(cat.points[i].psi == doctest::Approx(80.0 / 81.0).epsilon(1e-12));
        CHECK(cat.points[i].det_abs == doctest::Approx(160000.0 / 177147.0).epsilon(1e-12));
    }
    for (int i : g2) {
        CHECK(std::abs(cat.points[i].psi) < 1e-12);
        CHECK(cat.points[i].det_abs == doctest::Approx(160000.0).epsilon(1e-12));
    }
    // the xi/5 point is (1/5, 1/5, 1/5, 1/5)
    for (double c : cat.points[0].y) CHECK(c == doctest::Approx(0.2).epsilon(1e-13));
}

TEST_CASE("measured Hessian signatures; comparison against the paper's table") {
    // For e^{-i t Psi} the stationary-phase beta is the signature of
    // Hess(-Psi). Measured: +4 at the xi/5 point, +2 on the xi/3 family,
    // 0 on the zero-phase family (signs flip with sign xi). The paper's
    // 1 - sign(xi) for the first six disagrees; the quadrature oracle below
    // confirms the measured values.
    const ResonanceCatalog pos = find_stationary_points(1.0, 1, 0);
    CHECK(pos.points[0].beta == 4);
    for (int i : pos.group_indices(1)) CHECK(pos.points[i].beta == 2);
    for (int i : pos.group_indices(2)) {
        CHECK(pos.points[i].beta == 0);
        CHECK(pos.points[i].matches_paper_beta);
    }
    CHECK(!pos.points[0].matches_paper_beta);

    const ResonanceCatalog neg = find_stationary_points(-1.0, 1, 0);
    CHECK(neg.points[0].beta == -4);
    for (int i : neg.group_indices(1)) CHECK(neg.points[i].beta == -2);
    for (int i : neg.group_indices(2)) CHECK(neg.points[i].beta == 0);
}

TEST_CASE("homogeneity of the catalog under xi -> 2 xi") {
    const ResonanceCatalog one = find_stationary_points(1.0, 1, 0);
    const ResonanceCatalog two = find_stationary_points(2.0, 1, 0);
    for (size_t i = 0; i < one.points.size(); ++i) {
        for (int a = 0; a < 4; ++a)
            CHECK(two.points[i].y[a] == doctest::Approx(2.0 * one.points[i].y[a]).epsilon(1e-13));
        CHECK(two.points[i].psi == doctest::Approx(32.0 * one.points[i].psi).epsilon(1e-12));
        CHECK(two.points[i].det_abs ==
              doctest::Approx(4096.0 * one.points[i].det_abs).epsilon(1e-12));
        CHECK(two.points[i].beta == one.points[i].beta);
    }
}

TEST_CASE("resonance coefficients: c0 = -i/40 and the golden magnitudes") {
    for (double sgn : {1.0, -1.0}) {
        const ResonanceCatalog cat = find_stationary_points(sgn, 1, 0);
        const ResonanceCoefficients rc = derive_resonance_coefficients(cat);
        CHECK(rc.c0_ok);
        CHECK(std::abs(rc.c0 - complexd(0.0, -1.0 / 40.0)) < 1e-12);
        CHECK(std::abs(rc.c1) == doctest::Approx(std::pow(5.0, 3.5) / 16.0).epsilon(1e-12));
        CHECK(std::abs(rc.c2) == doctest::Approx(std::pow(3.0, 5.5) / 80.0).epsilon(1e-12));
    }
    // coefficient independent of |xi|
    const ResonanceCoefficients rc3 = derive_resonance_coefficients(find_stationary_points(3.0, 1, 0));
    CHECK(std::abs(rc3.c0 - complexd(0.0, -1.0 / 40.0)) < 1e-12);
}

TEST_CASE("fft-convolution oracle equals the explicit tensor trapezoid sum") {
    OracleOptions opts;
    opts.span = 12.0;
    opts.points = 48;
    const double xi = 1.0, t = 3.0;
    const complexd fast = oracle_m_integral(gauss_profile, xi, t, opts);
    const complexd slow = direct_tensor_sum(gauss_profile, xi, t, opts.span, opts.points, std::nullopt);
    CHECK(std::abs(fast - slow) < 1e-10 * std::abs(slow));
}

TEST_CASE("toy separable phase: 4-D stationary phase against tensor quadrature") {
    // phase |y|^2/2, F = chi = product Gaussian, lambda = 1e3:
    // J = Int e^{i lambda |y|^2/2} G = (prod of 1-D integrals);
    // leading term (2 pi / lambda)^2 e^{i pi} ... here with +phase the
    // signature is +4: J ~ (2 pi/lambda)^2 e^{i pi 4/4 ... } G(0)
    const double lambda = 1000.0;
    // 1-D integral Int e^{i lambda y^2 / 2} e^{-y^2/2} dy has the closed form
    // sqrt(2 pi / (1 - i lambda))
    const complexd one_d = std::sqrt(2.0 * kPi / complexd(1.0, -lambda));
    complexd j4 = one_d * one_d * one_d * one_d;
    const complexd leading =
        std::pow(2.0 * kPi / lambda, 2.0) * std::polar(1.0, kPi) * complexd(1.0, 0.0);
    CHECK(std::abs(j4 - leading) < 2e-3 * std::abs(leading));
}

TEST_CASE("quintic M-term: per-group oracle validates magnitudes and phases at lambda = 1e3") {
    const double xi = 1.0, t = 1000.0;
    const ResonanceCatalog cat = find_stationary_points(xi, 1, 0);
    OracleOptions opts;
    opts.span = 16.0;
    opts.points = 1 << 18;

    auto sp_term = [&](const StationaryPoint& p) {
        // F at the stationary point: product of g at the five slot values
        const double w = xi - p.y[0] - p.y[1] - p.y[2] - p.y[3];
        complexd F = gauss_profile(w);
        for (double c : p.y) F *= gauss_profile(c);
        return 4.0 * kPi * kPi / std::sqrt(p.det_abs) / (t * t) *
               std::polar(1.0, kPi * p.beta / 4.0 - t * p.psi) * F;
    };
    auto windows_for = [&](const StationaryPoint& p) {
        std::array<SlotWindow, 5> w{};
        const double wslot = xi - p.y[0] - p.y[1] - p.y[2] - p.y[3];
        w[0] = {wslot, 0.05, 0.04};
        for (int a = 0; a < 4; ++a) w[a + 1] = {p.y[a], 0.05, 0.04};
        return w;
    };

    // group 0 (xi/5 point) pins |c1| and its phase; group 1 representative
    // pins |c2|; one zero-phase point pins the c0 normalization. The flat
    // directions of the first two Hessians need larger lambda before the
    // Fresnel packet fits inside a window that stays clear of the neighboring
    // stationary points.
    const double lam_for[3] = {40000.0, 20000.0, 1000.0};
    const int pts[3] = {0, 1, 6};
    for (int q = 0; q < 3; ++q) {
        const StationaryPoint& p = cat.points[pts[q]];
        OracleOptions o = opts;
        o.windows = windows_for(p);
        const complexd J = oracle_m_integral(gauss_profile, xi, lam_for[q], o);
        const double tt = lam_for[q];
        const double w = xi - p.y[0] - p.y[1] - p.y[2] - p.y[3];
        complexd F = gauss_profile(w);
        for (double c : p.y) F *= gauss_profile(c);
        const complexd S = 4.0 * kPi * kPi / std::sqrt(p.det_abs) / (tt * tt) *
                           std::polar(1.0, kPi * p.beta / 4.0 - tt * p.psi) * F;
        CHECK(std::abs(J - S) < 0.01 * std::abs(S)); // magnitude and phase to 1%
    }
    (void)t;
    (void)sp_term;
}

TEST_CASE("coefficient demodulation from the full oracle at lambda ~ 1e3") {
    // profile balancing the three group amplitudes so the weakest one is not
    // drowned by the others' remainders
    auto g = [](double s) {
        const double q = s * s - 1.0;
        return complexd(std::exp(-1.2 * q * q), 0.0);
    };
    const CoefficientOracleResult r = oracle_coefficient_check(g, 1.0, 1000.0, 25);
    MESSAGE("oracle c0 = ", r.c0.real(), "+", r.c0.imag(), "i  |c1| = ", std::abs(r.c1),
            "  |c2| = ", std::abs(r.c2), "  resid = ", r.residual);
    CHECK(std::abs(std::abs(r.c1) - std::pow(5.0, 3.5) / 16.0) <
          0.01 * std::pow(5.0, 3.5) / 16.0);
    CHECK(std::abs(std::abs(r.c2) - std::pow(3.0, 5.5) / 80.0) <
          0.01 * std::pow(3.0, 5.5) / 80.0);
    CHECK(std::abs(r.c0 - complexd(0.0, -1.0 / 40.0)) < 0.05 / 40.0);
}

TEST_CASE("expansion error against the full oracle decays at least like lambda^-2") {
    const double xi = 1.0;
    const ResonanceCatalog cat = find_stationary_points(xi, 1, 0);
    auto F = [&](const Point4& y) {
        const double w = xi - y[0] - y[1] - y[2] - y[3];
        complexd v = gauss_profile(w);
        for (double c : y) v *= gauss_profile(c);
        return v;
    };
    auto chi = [](const Point4&) { return 1.0; };
    std::vector<double> lambdas{250.0, 500.0, 1000.0, 2000.0};
    std::vector<double> errs;
    OracleOptions opts;
    opts.span = 16.0;
    opts.points = 1 << 18;
    for (double lam : lambdas) {
        const complexd J = oracle_m_integral(gauss_profile, xi, lam, opts);
        const complexd S = stationary_phase_4d(F, chi, lam, cat);
        errs.push_back(std::abs(J - S));
    }
    const PowerLawFit fit = fit_power_law(lambdas, errs);
    MESSAGE("expansion error exponent: ", fit.exponent);
    CHECK(fit.exponent <= -2.0 + 0.2);
}

TEST_CASE("ode_rhs: closed form, indicator, and effective coefficients") {
    const OdeCoefficients co = effective_ode_coefficients(1.0);
    CHECK(std::abs(co.c0 - complexd(0.0, -1.0 / 40.0)) < 1e-12);
    CHECK(co.duhamel_scale == doctest::Approx(0.2));

    auto flat = [](double) { return complexd(0.1, 0.0); };
    // below the indicator |xi| > t^{-1/5} the rhs vanishes
    CHECK(std::abs(ode_rhs(co, flat, 2.0, 0.5, true)) == 0.0);  // 0.5 <= 2^{-1/5} = 0.87
    CHECK(std::abs(ode_rhs(co, flat, 1.0, 0.9, true)) == 0.0);  // 0.9 <= 1^{-1/5} = 1
    CHECK(std::abs(ode_rhs(co, flat, 100.0, 0.9, true)) > 0.0); // indicator on
    const double t = 100.0, xiq = 1.0;
    const complexd r = ode_rhs(co, flat, t, xiq, true);
    // c0 part: scale * c0 |f|^4 f / (t^2 xi^5)
    const complexd c0part = co.duhamel_scale * co.c0 * 1e-4 * 0.1 / (t * t);
    const complexd r_no = ode_rhs(co, flat, t, xiq, false);
    CHECK(std::abs((r - r_no) - c0part) < 1e-18);
}

TEST_CASE("ode_residual: linear null test and sampling warning") {
    GridPtr grid = make_grid(64.0, 256);
    // constant-profile snapshots (linear run): LHS = 0, the model terms are
    // reported as the spurious prediction
    std::vector<ProfileSnapshot> snaps;
    std::vector<double> centers{4.0, 8.0};
    const double delta = 0.125;
    for (double tc : centers) {
        for (double s : {-1.0, 1.0}) {
            ProfileSnapshot p;
            p.t = tc + s * delta;
            p.fhat.assign(grid->node_count(), complexd(0.05, 0.0));
            snaps.push_back(p);
        }
    }
    const OdeCoefficients co = effective_ode_coefficients(1.0);
    const OdeResidualRecord rec = ode_residual(*grid, snaps, centers, delta, 0.8, 1.6, co);
    REQUIRE(!rec.xis.empty());
    for (size_t b = 0; b < rec.xis.size(); ++b) {
        CHECK(rec.integrated_lhs[b] == 0.0);
        CHECK(rec.integrated_full[b] > 0.0); // model's spurious prediction
    }
    // delta * band_hi^5 = 0.125 * 10.5 exceeds pi/8: too coarse for e^{-i t xi^5}
    CHECK(rec.sampling_warning);
    const OdeResidualRecord fine = ode_residual(*grid, snaps, centers, delta, 0.8, 1.0, co);
    CHECK(!fine.sampling_warning);
}

TEST_SUITE_END();
