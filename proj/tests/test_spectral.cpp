#include <doctest.h>

#include "qkdv/bump.hpp"
#include "qkdv/spectral.hpp"

#include <cmath>
#include <random>

using namespace qkdv;

namespace {
constexpr double kPi = 3.14159265358979323846;

FieldState random_real_state(GridPtr grid, unsigned seed) {
    // Nyquist-free random real field (the lone Nyquist mode is outside the
    // contract: multipliers and products zero it).
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    std::vector<double> u(grid->node_count());
    for (double& v : u) v = dist(rng);
    SpectralEngine eng(grid);
    std::vector<complexd> uh = eng.forward(u);
    uh[grid->nyquist_index()] = 0.0;
    return FieldState::from_spectrum(grid, std::move(uh), 0.0);
}
} // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("cosine eigenmode transforms to two conjugate lines") {
    GridPtr grid = make_grid(32.0, 256);
    SpectralEngine eng(grid);
    const double xi1 = grid->frequency(grid->index_of(5));
    std::vector<double> u(grid->node_count());
    for (int m = 0; m < grid->node_count(); ++m) u[m] = std::cos(xi1 * grid->node(m));
    FieldState s = FieldState::from_physical(grid, std::move(u), 0.0);
    const auto& uh = s.spectral(eng);
    int nonzero = 0;
    for (int j = 0; j < grid->node_count(); ++j) {
        if (std::abs(uh[j]) > 1e-10) ++nonzero;
    }
    CHECK(nonzero == 2);
    const complexd plus = uh[grid->index_of(5)];
    const complexd minus = uh[grid->index_of(-5)];
    CHECK(std::abs(plus - std::conj(minus)) < 1e-12 * std::abs(plus));
    CHECK(std::abs(std::abs(plus) - std::abs(minus)) < 1e-13);
}

TEST_CASE("round trip is exact to 1e-13 for random real data") {
    GridPtr grid = make_grid(20.0, 128);
    SpectralEngine eng(grid);
    FieldState s = random_real_state(grid, 7);
    const std::vector<double> orig = s.physical(eng);
    const std::vector<complexd> uh = eng.forward(orig);
    const std::vector<double> back = eng.inverse(uh);
    double num = 0.0, den = 0.0;
    for (int m = 0; m < grid->node_count(); ++m) {
        num = std::max(num, std::abs(back[m] - orig[m]));
        den = std::max(den, std::abs(orig[m]));
    }
    CHECK(num / den < 1e-13);
}

TEST_CASE("gaussian transform matches the closed form to spectral accuracy") {
    // u = e^{-x^2/2} -> u^(xi) = e^{-xi^2/2} under the (2 pi)^{-1/2} convention
    GridPtr grid = make_grid(24.0, 1024);
    SpectralEngine eng(grid);
    std::vector<double> u(grid->node_count());
    for (int m = 0; m < grid->node_count(); ++m) u[m] = std::exp(-0.5 * grid->node(m) * grid->node(m));
    FieldState s = FieldState::from_physical(grid, std::move(u), 0.0);
    const auto& uh = s.spectral(eng);
    for (int k = 0; k <= 40; ++k) {
        const double xi = grid->frequency(grid->index_of(k));
        const double expect = std::exp(-0.5 * xi * xi);
        CHECK(std::abs(uh[grid->index_of(k)].real() - expect) < 1e-12);
        CHECK(std::abs(uh[grid->index_of(k)].imag()) < 1e-12);
    }
}

TEST_CASE("Parseval holds to 1e-12 relative") {
    GridPtr grid = make_grid(16.0, 256);
    SpectralEngine eng(grid);
    FieldState s = random_real_state(grid, 11);
    const double phys = eng.l2_physical(s);
    const double spec = eng.l2_spectral(s);
    CHECK(std::abs(phys - spec) < 1e-12 * phys);
}

TEST_CASE("hermitian symmetry of real fields") {
    GridPtr grid = make_grid(16.0, 256);
    SpectralEngine eng(grid);
    FieldState s = random_real_state(grid, 3);
    eng.ensure_spectral(s);
    CHECK(SpectralEngine::hermitian_defect(*grid, s.spectral_raw()) < 1e-12);
}

TEST_CASE("multiplier: identity, derivative on cosine, unimodular norm conservation") {
    GridPtr grid = make_grid(32.0, 512);
    SpectralEngine eng(grid);

    FieldState s = random_real_state(grid, 23);
    eng.ensure_spectral(s);
    std::vector<complexd> before = s.spectral_raw();
    eng.apply_multiplier(s, [](double) { return complexd(1.0, 0.0); });
    for (int j = 0; j < grid->node_count(); ++j) {
        if (j == grid->nyquist_index()) continue;
        CHECK(s.spectral_raw()[j] == before[j]);
    }

    const double xi1 = grid->frequency(grid->index_of(9));
    std::vector<double> u(grid->node_count());
    for (int m = 0; m < grid->node_count(); ++m) u[m] = std::cos(xi1 * grid->node(m));
    FieldState c = FieldState::from_physical(grid, std::move(u), 0.0);
    eng.apply_multiplier(c, [](double xi) { return complexd(0.0, xi); }, true);
    eng.ensure_physical(c);
    for (int m = 0; m < grid->node_count(); m += 17) {
        const double expect = -xi1 * std::sin(xi1 * grid->node(m));
        CHECK(c.physical_raw()[m] == doctest::Approx(expect).epsilon(1e-10));
    }

    FieldState w = random_real_state(grid, 31);
    const double n0 = eng.l2_spectral(w);
    eng.apply_multiplier(w, [](double xi) {
        const double ph = 0.37 * xi * xi * xi * xi * xi;
        return complexd(std::cos(ph), std::sin(ph));
    });
    const double n1 = eng.l2_spectral(w);
    CHECK(std::abs(n0 - n1) < 1e-13 * n0);
}

TEST_CASE("multiplier realness guard flags non-Hermitian symbols") {
    GridPtr grid = make_grid(8.0, 64);
    SpectralEngine eng(grid);
    FieldState s = random_real_state(grid, 5);
    CHECK_THROWS(eng.apply_multiplier(s, [](double xi) { return complexd(0.0, std::abs(xi)); }, true));
}

TEST_CASE("quintic product: four constant-one factors act as identity") {
    GridPtr grid = make_grid(16.0, 128);
    SpectralEngine eng(grid);
    FieldState s = random_real_state(grid, 13);
    std::vector<double> ones(grid->node_count(), 1.0);
    FieldState one = FieldState::from_physical(grid, ones, 0.0);
    FieldState prod = eng.quintic_product(s, one, one, one, one);
    eng.ensure_physical(prod);
    eng.ensure_physical(s);
    for (int m = 0; m < grid->node_count(); ++m)
        CHECK(prod.physical_raw()[m] == doctest::Approx(s.physical_raw()[m]).epsilon(1e-11));
}

TEST_CASE("single-mode fifth power has the binomial line spectrum") {
    // cos^5(a x) = (10 cos(ax) + 5 cos(3ax) + cos(5ax)) / 16
    GridPtr grid = make_grid(32.0, 512);
    SpectralEngine eng(grid);
    const int k1 = 6;
    const double a = grid->frequency(grid->index_of(k1));
    std::vector<double> u(grid->node_count());
    for (int m = 0; m < grid->node_count(); ++m) u[m] = std::cos(a * grid->node(m));
    FieldState s = FieldState::from_physical(grid, std::move(u), 0.0);
    FieldState p5 = eng.quintic_product(s, s, s, s, s);
    eng.ensure_physical(p5);
    for (int m = 0; m < grid->node_count(); m += 13) {
        const double x = grid->node(m);
        const double expect =
            (10.0 * std::cos(a * x) + 5.0 * std::cos(3.0 * a * x) + std::cos(5.0 * a * x)) / 16.0;
        CHECK(p5.physical_raw()[m] == doctest::Approx(expect).epsilon(1e-11));
    }
    eng.ensure_spectral(p5);
    for (int k = 0; k < grid->node_count() / 2; ++k) {
        if (k == k1 || k == 3 * k1 || k == 5 * k1) continue;
        CHECK(std::abs(p5.spectral_raw()[grid->index_of(k)]) < 1e-12);
    }
}

TEST_CASE("dealiased quintic of a high mode matches a double-resolution reference") {
    // mode at 0.9 xi_max: the aliased product on the bare grid folds spuriously,
    // the padded product matches the fine-grid truth on the retained band
    GridPtr grid = make_grid(16.0, 128);
    SpectralEngine eng(grid);
    const int khi = static_cast<int>(0.45 * grid->node_count());
    const double a = grid->frequency(grid->index_of(khi));
    std::vector<double> u(grid->node_count());
    for (int m = 0; m < grid->node_count(); ++m) u[m] = 0.7 * std::cos(a * grid->node(m));
    FieldState s = FieldState::from_physical(grid, u, 0.0);
    FieldState p5 = eng.quintic_product(s, s, s, s, s);
    eng.ensure_spectral(p5);

    GridPtr fine = make_grid(16.0, 1024);
    SpectralEngine feng(fine);
    std::vector<double> uf(fine->node_count());
    for (int m = 0; m < fine->node_count(); ++m) uf[m] = 0.7 * std::cos(a * fine->node(m));
    for (double& v : uf) {
        const double v2 = v * v;
        v = v2 * v2 * v;
    }
    FieldState ref = FieldState::from_physical(fine, std::move(uf), 0.0);
    eng.ensure_spectral(p5);
    feng.ensure_spectral(ref);
    for (int k = -(grid->node_count() / 2 - 1); k <= grid->node_count() / 2 - 1; ++k) {
        const complexd got = p5.spectral_raw()[grid->index_of(k)];
        const complexd want = ref.spectral_raw()[fine->index_of(k)];
        CHECK(std::abs(got - want) < 1e-12);
    }

    // aliased (p = 1) comparison: pointwise fifth power on the bare grid folds
    // energy into wrong modes
    std::vector<double> ua = u;
    for (double& v : ua) {
        const double v2 = v * v;
        v = v2 * v2 * v;
    }
    FieldState alias = FieldState::from_physical(grid, std::move(ua), 0.0);
    eng.ensure_spectral(alias);
    double spurious = 0.0;
    for (int k = -(grid->node_count() / 2 - 1); k <= grid->node_count() / 2 - 1; ++k) {
        const complexd want = ref.spectral_raw()[fine->index_of(k)];
        const complexd got = alias.spectral_raw()[grid->index_of(k)];
        spurious = std::max(spurious, std::abs(got - want));
    }
    CHECK(spurious > 1e-3); // the failure mode the padding removes
}

TEST_CASE("dyadic projections: flat band, partition, telescoping") {
    GridPtr grid = make_grid(64.0, 1024);
    SpectralEngine eng(grid);

    // psi = 1 at |xi| = 1.5 * 2^j
    CHECK(cutoff_psi(1.5) == doctest::Approx(1.0));
    const int j = 1;
    const double xi_target = 1.5 * std::ldexp(1.0, j);
    int ktarget = static_cast<int>(std::round(xi_target / grid->dxi()));
    std::vector<complexd> uh(grid->node_count(), complexd(0.0, 0.0));
    uh[grid->index_of(ktarget)] = complexd(1.0, 0.0);
    uh[grid->index_of(-ktarget)] = complexd(1.0, 0.0);
    FieldState s = FieldState::from_spectrum(grid, uh, 0.0);
    FieldState pj = eng.project_dyadic(s, j);
    const double got = std::abs(pj.spectral_raw()[grid->index_of(ktarget)]);
    const double psi_val = cutoff_psi_j(grid->frequency(grid->index_of(ktarget)), j);
    CHECK(got == doctest::Approx(psi_val));
    CHECK(psi_val == doctest::Approx(1.0).epsilon(1e-12));

    // P_{<=j} + P_{>j} = identity
    FieldState r = random_real_state(grid, 17);
    eng.ensure_spectral(r);
    FieldState below = eng.project_below(r, 2);
    for (int k = 1; k < grid->node_count() / 2; k += 37) {
        const int idx = grid->index_of(k);
        const complexd sum = below.spectral_raw()[idx] +
                             (r.spectral_raw()[idx] - below.spectral_raw()[idx]);
        CHECK(std::abs(sum - r.spectral_raw()[idx]) < 1e-15);
    }

    // telescoping: P_{<= j0-1} + sum_{j=j0}^{j1} P_j recovers the resolved band
    const int j0 = -3, j1 = 5;
    FieldState acc = eng.project_below(r, j0 - 1);
    for (int jj = j0; jj <= j1; ++jj) {
        FieldState pj2 = eng.project_dyadic(r, jj);
        auto& a = acc.spectral_mut();
        for (int i = 0; i < grid->node_count(); ++i) a[i] += pj2.spectral_raw()[i];
    }
    double worst = 0.0;
    for (int k = 1; k < grid->node_count() / 2; ++k) {
        const double xi = grid->frequency(grid->index_of(k));
        if (std::abs(xi) > std::ldexp(1.0, j1)) continue; // beyond covered range
        worst = std::max(worst,
                         std::abs(acc.spectral_raw()[grid->index_of(k)] -
                                  r.spectral_raw()[grid->index_of(k)]));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("dyadic partition of unity sums to one on covered frequencies") {
    double worst = 0.0;
    for (double xi : {0.11, 0.9, 1.7, 3.3, 12.8, 40.0}) {
        double acc = 0.0;
        for (int j = -12; j <= 12; ++j) acc += cutoff_psi_j(xi, j);
        worst = std::max(worst, std::abs(acc - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("grid invariants and rejection of bad parameters") {
    CHECK_THROWS(make_grid(-1.0, 64));
    CHECK_THROWS(make_grid(8.0, 65));
    CHECK_THROWS(make_grid(8.0, 8));
    CHECK_THROWS(make_grid(8.0, 64, 2));
    GridPtr g = make_grid(8.0, 64);
    CHECK(g->dx() == doctest::Approx(0.25));
    CHECK(g->max_frequency() == doctest::Approx(kPi * 64 / 16.0));
    CHECK(g->frequency(g->index_of(-1)) == doctest::Approx(-g->frequency(g->index_of(1))));
}

TEST_CASE("quintic product rejects mismatched grids") {
    GridPtr a = make_grid(8.0, 64);
    GridPtr b = make_grid(8.0, 128);
    SpectralEngine eng(a);
    FieldState sa(a), sb(b);
    CHECK_THROWS(eng.quintic_product(sa, sa, sa, sa, FieldState(b)));
}

TEST_SUITE_END();
