#pragma once

#include "qkdv/profile.hpp"
#include "qkdv/spectral.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qkdv {

using Point4 = std::array<double, 4>;

// Duhamel phase of the quintic nonlinearity at output frequency xi:
//   Psi(eta, sigma, eta1, sigma1) =
//     xi^5 - (xi - eta - sigma - eta1 - sigma1)^5 - eta^5 - sigma^5 - eta1^5 - sigma1^5.
// Polynomial-exact gradient and Hessian; homogeneous of degree 5 under joint
// scaling of all five frequencies.
class QuinticPhase {
public:
    explicit QuinticPhase(double xi);
    double xi() const { return xi_; }
    double psi(const Point4& y) const;
    Point4 grad(const Point4& y) const;
    std::array<std::array<double, 4>, 4> hess(const Point4& y) const;

private:
    double xi_;
};

struct StationaryPoint {
    Point4 y{};             // (eta, sigma, eta1, sigma1), each a multiple of xi
    double psi = 0.0;       // Psi value
    double det_abs = 0.0;   // |det Hess Psi|
    int signature_psi = 0;  // eigenvalue signature of Hess Psi
    int beta = 0;           // signature of Hess(-Psi): enters e^{i pi beta / 4}
    int group = 0;          // 0: xi/5 point, 1: xi/3 family, 2: zero-phase family
    bool matches_paper_beta = false; // beta == 1 - sign(xi) for group<2, 0 for group 2
};

// Exact rational values at xi = 1, exported n/d as strings.
struct RationalValue {
    std::int64_t num = 0;
    std::int64_t den = 1;
    std::string str() const;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct ResonanceCatalog {
    double xi = 1.0;
    std::vector<StationaryPoint> points; // canonical order, 16 entries
    int extra_roots = 0;                 // roots found outside the known list
    int newton_failures = 0;
    long multistarts = 0;

    const StationaryPoint& xi5_point() const { return points[0]; }
    // groups: [0] = {1}, [1] = {2..6}, [2] = {7..16}
    std::vector<int> group_indices(int group) const;
};

// Closed-form catalog values at xi = 1 (rational-exact).
struct RationalCatalogEntry {
    RationalValue psi;
    RationalValue det;
    int multiplicity = 1;
};
std::array<RationalCatalogEntry, 3> rational_catalog_xi1();

// Newton iteration on grad Psi from the paper's 16 seeds plus `multistarts`
// random starts in [-2|xi|, 2|xi|]^4 (deterministic for a fixed seed).
// Asserts exactly the 16 known roots; extras are counted, not silently kept.
ResonanceCatalog find_stationary_points(double xi, std::uint64_t seed = 0x5eed,
                                        long multistarts = 10000);

// Leading 4-D stationary-phase expansion of
//   J(lambda) = Int e^{-i lambda Psi(y)} F(y) chi(y) dy
// over the catalog points:
//   sum_a 4 pi^2 e^{i pi beta_a/4} Delta_a^{-1/2} lambda^{-2} e^{-i lambda Psi_a} F_a chi_a.
// Throws on degenerate Hessians.
complexd stationary_phase_4d(const std::function<complexd(const Point4&)>& F,
                             const std::function<double(const Point4&)>& chi, double lambda,
                             const ResonanceCatalog& catalog);

struct ResonanceCoefficients {
    complexd c0; // must equal -i/40
    complexd c1; // |c1| = 5^{7/2}/16, phase from e^{i pi beta_1/4} and the -i prefactor
    complexd c2; // |c2| = 3^{11/2}/80
    bool c0_ok = false;
};

// Assembles the profile-ODE coefficients by applying the stationary-phase
// expansion to the M-term with prefactor -i xi / (4 pi^2).
ResonanceCoefficients derive_resonance_coefficients(const ResonanceCatalog& catalog);

// ---------------------------------------------------------------------------
// Brute-force oracle for the 4-D oscillatory integral. The quintic phase
// splits per slot, so the tensor-product trapezoid rule over the cutoff
// support is evaluated exactly through the convolution theorem (5 FFTs and a
// pointwise product instead of an M^4 sum). direct_tensor_sum computes the
// identical rule by explicit summation for small M to certify the identity.

struct SlotWindow {
    double center = 0.0;
    double flat_radius = 0.25;
    double shoulder = 0.15;
};

struct OracleOptions {
    double span = 16.0;      // eta grid covers [-span, span)
    int points = 1 << 18;    // grid size M
    std::optional<std::array<SlotWindow, 5>> windows; // slot 0 is the w slot
};

// J(xi, t) = Int e^{-i t Psi(xi; y)} prod_slots g(slot) [windows] dy
complexd oracle_m_integral(const std::function<complexd(double)>& g, double xi, double t,
                           const OracleOptions& opts);

// Reconstructs the three resonance coefficients from the full (unwindowed)
// oracle by demodulating the group phases {1, e^{-i(624/625) lambda xi^5},
// e^{-i(80/81) lambda xi^5}} over a lambda sweep around lambda_center.
// The least squares includes lambda^{-3} columns so the next-order remainder
// does not leak into the leading amplitudes.
struct CoefficientOracleResult {
    complexd c0, c1, c2;    // measured values (same normalization as
                            // derive_resonance_coefficients)
    double residual = 0.0;  // rms of the unmodeled part, in units of |J|
};
CoefficientOracleResult oracle_coefficient_check(const std::function<complexd(double)>& g, double xi,
                                                 double lambda_center, int samples = 25,
                                                 const OracleOptions& opts = {});

complexd direct_tensor_sum(const std::function<complexd(double)>& g, double xi, double t,
                           double span, int points,
                           const std::optional<std::array<SlotWindow, 5>>& windows);

// ---------------------------------------------------------------------------
// Profile ODE residual: centered finite differences of f^ in t from snapshot
// pairs against the three leading terms of the ODE.

struct OdeCoefficients {
    complexd c0{0.0, -1.0 / 40.0};
    complexd c1{0.0, 0.0};
    complexd c2{0.0, 0.0};
    // Ratio of the true Duhamel prefactor of u_t = d_x^5 u - u^4 u_x to the
    // -i xi/(4 pi^2) used in the coefficient algebra; u^4 u_x = (1/5) d_x u^5
    // makes this 1/5.
    double duhamel_scale = 0.2;
};

OdeCoefficients effective_ode_coefficients(double sign_xi = 1.0);

// Model right side at (t, xi); fhat_at samples the profile.
complexd ode_rhs(const OdeCoefficients& co, const std::function<complexd(double)>& fhat_at, double t,
                 double xi, bool include_c0);

struct OdeResidualRecord {
    std::vector<double> xis;
    std::vector<double> integrated_full; // Int |LHS - RHS(all three terms)| dt per xi
    std::vector<double> integrated_omit; // c0 term omitted
    std::vector<double> integrated_lhs;  // Int |LHS| dt per xi
    double band_full = 0.0;
    double band_omit = 0.0;
    double improvement_factor = 0.0; // band_omit / band_full
    bool sampling_warning = false;   // pair spacing too coarse for e^{-i t xi^5}
};

// Snapshots must contain (t_k - delta, t_k + delta) pairs; centers are taken
// from `centers`. Residuals are restricted to |xi| > t^{-1/5}.
OdeResidualRecord ode_residual(const SpectralGrid& grid,
                               const std::vector<ProfileSnapshot>& snapshots,
                               const std::vector<double>& centers, double pair_offset,
                               double xi_min, double xi_max, const OdeCoefficients& co);

} // namespace qkdv
