#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkdv {

using complexd = std::complex<double>;

// Periodic spectral discretization of the line: box [-L, L), N nodes,
// frequencies xi_k = pi k / L for k = -N/2 .. N/2-1 stored in FFT order
// (k = 0..N/2-1 then -N/2..-1). Continuum transform convention
//   u^(xi) = (2 pi)^{-1/2} * Int u(x) e^{-i x xi} dx
// realized by the trapezoid/DFT identification; Parseval holds with the
// quadrature weights dx (physical) and dxi = pi/L (spectral).
class SpectralGrid {
public:
    SpectralGrid(double half_length, int node_count, int dealias_factor = 3);

    double half_length() const { return half_length_; }
    int node_count() const { return node_count_; }
    int dealias_factor() const { return dealias_factor_; }
    double dx() const { return 2.0 * half_length_ / node_count_; }
    double dxi() const { return pi() / half_length_; }
    double max_frequency() const { return pi() * node_count_ / (2.0 * half_length_); }

    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& frequencies() const { return freqs_; }
    double node(int m) const { return nodes_[m]; }
    double frequency(int j) const { return freqs_[j]; }
    int nyquist_index() const { return node_count_ / 2; }
    // signed integer wavenumber k for storage index j
    int wavenumber(int j) const { return j < node_count_ / 2 ? j : j - node_count_; }
    // storage index for a signed wavenumber k in [-N/2, N/2-1]
    int index_of(int k) const { return k >= 0 ? k : k + node_count_; }

    bool same_as(const SpectralGrid& other) const {
        return half_length_ == other.half_length_ && node_count_ == other.node_count_ &&
               dealias_factor_ == other.dealias_factor_;
    }

    static double pi() { return 3.14159265358979323846; }

private:
    double half_length_;
    int node_count_;
    int dealias_factor_;
    std::vector<double> nodes_;
    std::vector<double> freqs_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

GridPtr make_grid(double half_length, int node_count, int dealias_factor = 3);

// Real field u(t, x) stored as paired physical samples and spectral
// coefficients, with flags marking which representation is current.
class SpectralEngine;

class FieldState {
public:
    FieldState() = default;
    explicit FieldState(GridPtr grid, double time = 0.0);

    static FieldState from_physical(GridPtr grid, std::vector<double> samples, double time = 0.0);
    static FieldState from_spectrum(GridPtr grid, std::vector<complexd> coeffs, double time = 0.0);

    const SpectralGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    bool physical_current() const { return phys_current_; }
    bool spectral_current() const { return spec_current_; }

    // Mutable access invalidates the other representation.
    std::vector<double>& physical_mut();
    std::vector<complexd>& spectral_mut();
    const std::vector<double>& physical(SpectralEngine& eng) const;
    const std::vector<complexd>& spectral(SpectralEngine& eng) const;

    // Raw access without conversion; caller must know the flags.
    const std::vector<double>& physical_raw() const { return u_; }
    const std::vector<complexd>& spectral_raw() const { return uh_; }

private:
    friend class SpectralEngine;
    GridPtr grid_;
    double time_ = 0.0;
    mutable std::vector<double> u_;
    mutable std::vector<complexd> uh_;
    mutable bool phys_current_ = false;
    mutable bool spec_current_ = false;
};

// Littlewood-Paley projection data: psi_j sampled on the grid frequencies.
struct DyadicProjection {
    int j = 0;
    std::vector<double> weights; // psi(2^-j xi_k), FFT order
};

// FFT engine bound to one grid: owns FFTW plans and aligned work buffers for
// the base grid and the zero-padded product grid. Not thread safe; use one
// engine per thread. All plans use FFTW_ESTIMATE so results are deterministic
// for a fixed grid.
class SpectralEngine {
public:
    explicit SpectralEngine(GridPtr grid);
    ~SpectralEngine();
    SpectralEngine(const SpectralEngine&) = delete;
    SpectralEngine& operator=(const SpectralEngine&) = delete;

    const SpectralGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }

    // Transform state in place so the requested representation is current.
    void ensure_spectral(const FieldState& s);
    void ensure_physical(const FieldState& s);

    std::vector<complexd> forward(const std::vector<double>& u) const;
    std::vector<double> inverse(const std::vector<complexd>& uh) const;

    // u^_k <- m(xi_k) u^_k; zeroes the Nyquist mode. If assert_real is set,
    // throws when the sampled symbol breaks Hermitian symmetry beyond 1e-12.
    void apply_multiplier(FieldState& s, const std::function<complexd(double)>& symbol,
                          bool assert_real = false);
    void apply_multiplier(FieldState& s, const std::vector<complexd>& sampled,
                          bool assert_real = false);

    // Fully dealiased pointwise product of five fields (zero padding by the
    // grid's dealias factor). All inputs must share this grid and time.
    FieldState quintic_product(const FieldState& a, const FieldState& b, const FieldState& c,
                               const FieldState& d, const FieldState& e);

    // Spectrum of the conservative nonlinearity -(1/5) d_x(u^5), dealiased.
    std::vector<complexd> quintic_nonlinearity(const std::vector<complexd>& uh);

    // Physical samples of the field described by uh on the padded fine grid.
    std::vector<double> padded_physical(const std::vector<complexd>& uh);
    std::vector<complexd> padded_forward_truncate(const std::vector<double>& fine);

    DyadicProjection dyadic_projection(int j) const;
    FieldState project_dyadic(const FieldState& s, int j);
    FieldState project_below(const FieldState& s, int j); // P_{<=j} via phi_j

    // Norms with continuum quadrature weights.
    double l2_physical(const FieldState& s);
    double l2_spectral(const FieldState& s);

    // max |u^(-xi) - conj u^(xi)| / max|u^|
    static double hermitian_defect(const SpectralGrid& g, const std::vector<complexd>& uh);

private:
    struct Fft;
    GridPtr grid_;
    std::unique_ptr<Fft> fft_;
};

} // namespace qkdv
