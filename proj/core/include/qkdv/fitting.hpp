#pragma once

#include <vector>

namespace qkdv {

// Least-squares fit of y = C * x^p in log-log coordinates.
struct PowerLawFit {
    double exponent = 0.0;
    double log_prefactor = 0.0; // natural log of C
    double rms_residual = 0.0;  // in log space
    int points = 0;
};

// Ignores pairs with nonpositive x or y.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// Straight line a + b*x least squares; returns {a, b}.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Cubic interpolation of a smooth function sampled on an increasing abscissa
// grid (4-point Lagrange on the enclosing stencil). Out-of-range queries clamp
// to the boundary stencils.
double interp_cubic(const std::vector<double>& xs, const std::vector<double>& ys, double x);

} // namespace qkdv
