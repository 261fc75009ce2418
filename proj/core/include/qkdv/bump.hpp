#pragma once

#include <cmath>

namespace qkdv {

// Smooth cutoffs used for Littlewood-Paley projections and integrand windows.
// The transition profile is the standard exp-ratio smoothstep, so every cutoff
// here is C-infinity. The flat region of phi extends to 1.5 so that
// psi(xi) = phi(xi) - phi(2 xi) equals 1 on |xi| in [0.75, 1.5].

inline double bump_side(double r) { return r > 0.0 ? std::exp(-1.0 / r) : 0.0; }

// 0 at r<=0, 1 at r>=1, monotone C-infinity in between.
inline double smoothstep_exp(double r) {
    if (r <= 0.0) return 0.0;
    if (r >= 1.0) return 1.0;
    const double a = bump_side(r);
    const double b = bump_side(1.0 - r);
    return a / (a + b);
}

// phi: 1 on |s| <= 1.5, 0 on |s| >= 2, smooth transition. Satisfies the
// constraints phi = 1 on |s| <= 1 and phi = 0 on |s| > 2.
inline double cutoff_phi(double s) {
    const double a = std::abs(s);
    if (a <= 1.5) return 1.0;
    if (a >= 2.0) return 0.0;
    return smoothstep_exp((2.0 - a) / 0.5);
}

// psi(s) = phi(s) - phi(2s); support in 0.75 <= |s| <= 2.
inline double cutoff_psi(double s) { return cutoff_phi(s) - cutoff_phi(2.0 * s); }

// Dyadic rescalings phi_j(xi) = phi(2^-j xi), psi_j(xi) = psi(2^-j xi).
inline double cutoff_phi_j(double xi, int j) { return cutoff_phi(std::ldexp(std::abs(xi), -j)); }
inline double cutoff_psi_j(double xi, int j) { return cutoff_psi(std::ldexp(std::abs(xi), -j)); }

// Flat-top window on [c-r, c+r] with smooth shoulders of width w; used to
// localize quadrature oracles around a single stationary point.
inline double window_flat(double s, double c, double r, double w) {
    const double d = std::abs(s - c);
    if (d <= r) return 1.0;
    if (d >= r + w) return 0.0;
    return smoothstep_exp((r + w - d) / w);
}

} // namespace qkdv
