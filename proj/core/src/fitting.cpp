#include "qkdv/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkdv {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    LineFit f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy * sxx - sx * sxy) / det;
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.rms_residual = std::sqrt(rss / n);
    return f;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    PowerLawFit out;
    out.points = static_cast<int>(lx.size());
    if (out.points < 2) return out;
    const LineFit f = fit_line(lx, ly);
    out.exponent = f.slope;
    out.log_prefactor = f.intercept;
    out.rms_residual = f.rms_residual;
    return out;
}

double interp_cubic(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const int n = static_cast<int>(xs.size());
    if (n < 4) throw std::invalid_argument("interp_cubic: need >= 4 samples");
    // locate the interval, then center a 4-point stencil on it
    int lo = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
    lo = std::clamp(lo, 0, n - 2);
    int i0 = std::clamp(lo - 1, 0, n - 4);
    double acc = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            w *= (x - xs[i0 + b]) / (xs[i0 + a] - xs[i0 + b]);
        }
        acc += w * ys[i0 + a];
    }
    return acc;
}

} // namespace qkdv
