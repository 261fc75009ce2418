#pragma once

#include "qkdv/fitting.hpp"
#include "qkdv/profile.hpp"
#include "qkdv/spectral.hpp"

#include <string>
#include <vector>

namespace qkdv {

// Accumulated nonlinear phase B(t, xi) = (k_eff xi^5)^{-1} Int_1^t |f^(s,xi)|^4 s^{-2} ds,
// trapezoid per xi over snapshot times, excluding the band |xi| <= s^{-1/5}.
// k_eff = 200 for the equation u_t = d_x^5 u - u^4 u_x (the coefficient-algebra
// value 40 rescaled by the Duhamel factor 1/5).
struct PhaseCorrection {
    double k_eff = 200.0;
    std::vector<double> times;
    std::vector<std::vector<double>> B; // [time][FFT-order frequency index]
    bool spacing_warning = false;       // |f^|^4 changed by > 10% between samples
};

PhaseCorrection accumulate_phase(const SpectralGrid& grid,
                                 const std::vector<ProfileSnapshot>& snapshots,
                                 double k_eff = 200.0);

// w~(t, xi) = e^{i B(t, xi)} f^(t, xi); |w~| = |f^| pointwise.
std::vector<complexd> modified_profile(const std::vector<complexd>& fhat,
                                       const std::vector<double>& B);

struct ScatteringLimit {
    double k_eff = 200.0;
    double band_lo = 0.0, band_hi = 0.0;
    std::vector<double> times;   // snapshot times used
    std::vector<double> diffs_w; // ||w~(t_k) - w~(t_{k+1})||_{L^inf(band)}
    std::vector<double> diffs_f; // same for the raw profile
    PowerLawFit rate_in_t;       // fit of diffs_w against t
    double rate_in_scaled = 0.0; // exponent in |xi| t^{1/5} (5x the t exponent)
    bool cauchy_ok = true;       // diffs decay over the tail
    // terminal objects on the full grid (FFT order)
    std::vector<complexd> w_inf;
    std::vector<complexd> f_inf; // f_inf = w_inf e^{-i A_inf}
    std::vector<double> A_inf;   // A = B + |f^|^4 / (k_eff t xi^5)
    // drift over the comparison window [t_mid, t_end]
    double drift_uncorrected = 0.0; // ||f^(t_end) - f^(t_mid)||_{L^inf(band)}
    double drift_corrected = 0.0;   // same for w~
    double drift_ratio = 0.0;       // uncorrected / corrected
};

ScatteringLimit scattering_limit(const SpectralGrid& grid,
                                 const std::vector<ProfileSnapshot>& snapshots, double band_lo,
                                 double band_hi, double k_eff = 200.0, double delta = 0.1);

struct StationRecord {
    double t = 0.0;
    double x = 0.0;
    double z = 0.0; // -x / t^{1/5}
    double measured = 0.0;
    double predicted = 0.0;
    double error = 0.0;
    double budget = 0.0; // eps0 t^{-1/5} z^{-9/20}
    bool within_budget = false;
};

struct AsymptoticReport {
    std::string region;
    std::vector<StationRecord> stations;
    double worst_ratio = 0.0; // max error / budget
    PowerLawFit fit;          // meaning depends on the region checker
    std::string note;
};

// Eq-level oscillatory-region prediction with the nonlinear phase correction
// exp(i |f_inf(xi0)|^4 / (k_eff t xi0^5)); the correction is evaluated at xi0
// (the stationary frequency) throughout.
AsymptoticReport oscillatory_prediction(const SpectralGrid& grid, const ProfileSnapshot& snap,
                                        const std::vector<complexd>& f_inf,
                                        const std::vector<double>& stations_z, double eps0,
                                        double gamma, double k_eff = 200.0);

struct SelfSimilarFrame {
    double gamma = 0.01;
    std::vector<double> window_x; // points of the self-similar coordinate
    std::vector<double> times;
    std::vector<std::vector<double>> v; // v(t, x) = t^{1/5} u(t, x t^{1/5})
    std::vector<double> Q;              // v at the latest time
    std::vector<double> cauchy_diffs;   // sup-window diffs between consecutive times
    std::vector<double> ode_residual_l2; // ||v'''' + x v/5 - v^5/5||_{L^2(window)}
    PowerLawFit residual_decay;          // residual against t
    double q_sup = 0.0;
    bool window_warning = false;
};

// Spectral resampling of u onto the self-similar frame. The residual uses the
// operator v'''' + x v / 5 - v^5 / 5, the stationary form of the rescaled
// equation; the exact linear kernel A5 satisfies A5'''' + x A5 / 5 = 0.
SelfSimilarFrame self_similar_extract(const SpectralGrid& grid,
                                      const std::vector<ProfileSnapshot>& snapshots, double gamma,
                                      int window_points = 129);

// Decaying-region fit: t^{1/5} |u| against z = x / t^{1/5} on z in [z_lo, z_hi].
AsymptoticReport decay_region_check(const SpectralGrid& grid,
                                    const std::vector<ProfileSnapshot>& snapshots, double z_lo,
                                    double z_hi);

// Physical value u(t, x) at an arbitrary point by direct Fourier summation.
double evaluate_field_at(const SpectralGrid& grid, const ProfileSnapshot& snap, double x);

} // namespace qkdv
