#pragma once

#include "qkdv/fitting.hpp"
#include "qkdv/spectral.hpp"

#include <functional>
#include <optional>
#include <string>

namespace qkdv {

// Exact free evolution: u^_k <- e^{i t xi_k^5} u^_k (symbol of d_x^5 is i xi^5).
void free_evolve(SpectralEngine& eng, FieldState& s, double t);

// Phase of the oscillatory representation e^{t d_x^5} g(x) =
// sqrt(2/pi) Re Int_0^inf e^{i t Phi(xi)} g^(xi) dxi,  Phi = x xi / t + xi^5.
// The single stationary point xi0 = (-x/(5t))^{1/4} exists for x < 0.
struct LinearPhase {
    double x = 0.0;
    double t = 1.0;
    std::optional<double> xi0;

    LinearPhase(double x_, double t_);
    double phi(double xi) const { return x * xi / t + xi * xi * xi * xi * xi; }
    double dphi(double xi) const { return x / t + 5.0 * xi * xi * xi * xi; }
};

struct OscillatoryQuadResult {
    double value = 0.0;       // sqrt(2/pi) Re of the integral
    complexd integral{0.0, 0.0};
    double error_estimate = 0.0;
    long panels = 0;
    bool converged = true;
};

struct OscillatoryQuadOptions {
    double abs_tol = 1e-10;
    double phase_budget = 10.0; // max phase span handed to one 20-pt panel
    double max_xi = 64.0;      // hard cutoff for the frequency integral
    double tail_rel = 1e-16;   // truncate where |g^| xi^beta falls below this * max
    int max_depth = 28;
};

// Ground-truth oracle: evaluates e^{t d_x^5} |d_x|^beta g (x, t) by adaptive
// panel Gauss-Legendre quadrature with panel sizes tied to the local phase
// derivative. g^ is the profile on xi >= 0.
OscillatoryQuadResult oscillatory_quadrature(const std::function<complexd(double)>& ghat, double x,
                                             double t, double beta,
                                             const OscillatoryQuadOptions& opts = {});

enum class RegionTag { Decaying, SelfSimilar, Oscillatory };

struct AsymptoticPrediction {
    double amplitude = 0.0;    // (5 t xi0^3)^{-1/2}
    double phase = 0.0;        // total phase of the leading term, radians
    double value = 0.0;        // amplitude * Re(e^{i(-4 t xi0^5 + pi/4)} g^(xi0))
    double xi0 = 0.0;
    double error_exponent = -0.45; // documented decay in (-x/t^{1/5}), Eq-level -9/20
    RegionTag region = RegionTag::Oscillatory;
};

// Leading stationary-phase term of the free evolution in the oscillatory
// region x <= -t^{1/5}. Throws std::domain_error outside the region.
AsymptoticPrediction stationary_phase_predict(const std::function<complexd(double)>& ghat, double x,
                                              double t);

struct EnvelopeFitRecord {
    double beta = 0.0;
    PowerLawFit time_decay;          // sup_x |.| against t
    PowerLawFit right_spatial_decay; // scaled amplitude against z = x/t^{1/5}, right side
    std::vector<double> times;
    std::vector<double> sup_values;
};

// Samples |e^{t d_x^5} |d_x|^beta g| on a large periodic grid and fits the
// envelope against t^{-(beta+1)/5} <x/t^{1/5}>^{-3/8+beta/4}.
EnvelopeFitRecord dispersive_envelope_check(const std::function<complexd(double)>& ghat, double beta,
                                            const std::vector<double>& times, double half_length,
                                            int node_count, double z_right_min = 2.0,
                                            double z_right_max = 20.0);

} // namespace qkdv
