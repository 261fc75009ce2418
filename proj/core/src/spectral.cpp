#include "qkdv/spectral.hpp"
#include "qkdv/bump.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

namespace qkdv {

namespace {
// FFTW's planner is not thread safe even with FFTW_ESTIMATE.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

SpectralGrid::SpectralGrid(double half_length, int node_count, int dealias_factor)
    : half_length_(half_length), node_count_(node_count), dealias_factor_(dealias_factor) {
    if (half_length <= 0.0) throw std::invalid_argument("SpectralGrid: L must be positive");
    if (node_count < 16 || node_count % 2 != 0)
        throw std::invalid_argument("SpectralGrid: N must be even and >= 16");
    if (dealias_factor < 3)
        throw std::invalid_argument("SpectralGrid: dealias factor must be >= 3 for quintic products");
    nodes_.resize(node_count_);
    freqs_.resize(node_count_);
    const double h = dx();
    for (int m = 0; m < node_count_; ++m) nodes_[m] = -half_length_ + h * m;
    for (int j = 0; j < node_count_; ++j) freqs_[j] = pi() * wavenumber(j) / half_length_;
}

GridPtr make_grid(double half_length, int node_count, int dealias_factor) {
    return std::make_shared<const SpectralGrid>(half_length, node_count, dealias_factor);
}

FieldState::FieldState(GridPtr grid, double time)
    : grid_(std::move(grid)), time_(time), u_(grid_->node_count(), 0.0),
      uh_(grid_->node_count(), complexd(0.0, 0.0)), phys_current_(true), spec_current_(true) {}

FieldState FieldState::from_physical(GridPtr grid, std::vector<double> samples, double time) {
    FieldState s(grid, time);
    if (static_cast<int>(samples.size()) != grid->node_count())
        throw std::invalid_argument("FieldState: sample count does not match grid");
    s.u_ = std::move(samples);
    s.phys_current_ = true;
    s.spec_current_ = false;
    return s;
}

FieldState FieldState::from_spectrum(GridPtr grid, std::vector<complexd> coeffs, double time) {
    FieldState s(grid, time);
    if (static_cast<int>(coeffs.size()) != grid->node_count())
        throw std::invalid_argument("FieldState: coefficient count does not match grid");
    s.uh_ = std::move(coeffs);
    s.spec_current_ = true;
    s.phys_current_ = false;
    return s;
}

std::vector<double>& FieldState::physical_mut() {
    phys_current_ = true;
    spec_current_ = false;
    return u_;
}

std::vector<complexd>& FieldState::spectral_mut() {
    spec_current_ = true;
    phys_current_ = false;
    return uh_;
}

const std::vector<double>& FieldState::physical(SpectralEngine& eng) const {
    eng.ensure_physical(*this);
    return u_;
}

const std::vector<complexd>& FieldState::spectral(SpectralEngine& eng) const {
    eng.ensure_spectral(*this);
    return uh_;
}

// ---------------------------------------------------------------------------

struct SpectralEngine::Fft {
    int n = 0;  // base size
    int np = 0; // padded size
    fftw_complex* buf_n = nullptr;
    fftw_complex* buf_np = nullptr;
    fftw_plan fwd_n = nullptr, bwd_n = nullptr;
    fftw_plan fwd_np = nullptr, bwd_np = nullptr;

    Fft(int n_, int np_) : n(n_), np(np_) {
        buf_n = fftw_alloc_complex(n);
        buf_np = fftw_alloc_complex(np);
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_n = fftw_plan_dft_1d(n, buf_n, buf_n, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_n = fftw_plan_dft_1d(n, buf_n, buf_n, FFTW_BACKWARD, FFTW_ESTIMATE);
        fwd_np = fftw_plan_dft_1d(np, buf_np, buf_np, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_np = fftw_plan_dft_1d(np, buf_np, buf_np, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_n);
        fftw_destroy_plan(bwd_n);
        fftw_destroy_plan(fwd_np);
        fftw_destroy_plan(bwd_np);
        fftw_free(buf_n);
        fftw_free(buf_np);
    }
};

SpectralEngine::SpectralEngine(GridPtr grid)
    : grid_(std::move(grid)),
      fft_(std::make_unique<Fft>(grid_->node_count(), grid_->node_count() * grid_->dealias_factor())) {}

SpectralEngine::~SpectralEngine() = default;

namespace {
inline complexd* as_cplx(fftw_complex* p) { return reinterpret_cast<complexd*>(p); }
} // namespace

std::vector<complexd> SpectralEngine::forward(const std::vector<double>& u) const {
    const int n = fft_->n;
    complexd* b = as_cplx(fft_->buf_n);
    for (int m = 0; m < n; ++m) b[m] = complexd(u[m], 0.0);
    fftw_execute(fft_->fwd_n);
    // u^_k = (dx / sqrt(2 pi)) (-1)^k DFT_k ; the (-1)^k accounts for x_0 = -L.
    const double scale = grid_->dx() / std::sqrt(2.0 * SpectralGrid::pi());
    std::vector<complexd> uh(n);
    for (int j = 0; j < n; ++j) {
        const double tw = (grid_->wavenumber(j) & 1) ? -1.0 : 1.0;
        uh[j] = scale * tw * b[j];
    }
    return uh;
}

std::vector<double> SpectralEngine::inverse(const std::vector<complexd>& uh) const {
    const int n = fft_->n;
    complexd* b = as_cplx(fft_->buf_n);
    for (int j = 0; j < n; ++j) {
        const double tw = (grid_->wavenumber(j) & 1) ? -1.0 : 1.0;
        b[j] = tw * uh[j];
    }
    fftw_execute(fft_->bwd_n);
    const double scale = std::sqrt(2.0 * SpectralGrid::pi()) / (2.0 * grid_->half_length());
    std::vector<double> u(n);
    for (int m = 0; m < n; ++m) u[m] = scale * b[m].real();
    return u;
}

void SpectralEngine::ensure_spectral(const FieldState& s) {
    if (s.spec_current_) return;
    if (!s.phys_current_) throw std::logic_error("FieldState has no current representation");
    s.uh_ = forward(s.u_);
    s.spec_current_ = true;
}

void SpectralEngine::ensure_physical(const FieldState& s) {
    if (s.phys_current_) return;
    if (!s.spec_current_) throw std::logic_error("FieldState has no current representation");
    s.u_ = inverse(s.uh_);
    s.phys_current_ = true;
}

double SpectralEngine::hermitian_defect(const SpectralGrid& g, const std::vector<complexd>& uh) {
    double mx = 0.0, defect = 0.0;
    for (int j = 0; j < g.node_count(); ++j) mx = std::max(mx, std::abs(uh[j]));
    if (mx == 0.0) return 0.0;
    for (int k = 1; k < g.node_count() / 2; ++k) {
        const complexd d = uh[g.index_of(-k)] - std::conj(uh[g.index_of(k)]);
        defect = std::max(defect, std::abs(d));
    }
    defect = std::max(defect, std::abs(uh[0].imag()));
    return defect / mx;
}

void SpectralEngine::apply_multiplier(FieldState& s, const std::function<complexd(double)>& symbol,
                                      bool assert_real) {
    std::vector<complexd> sampled(grid_->node_count());
    for (int j = 0; j < grid_->node_count(); ++j) sampled[j] = symbol(grid_->frequency(j));
    apply_multiplier(s, sampled, assert_real);
}

void SpectralEngine::apply_multiplier(FieldState& s, const std::vector<complexd>& sampled,
                                      bool assert_real) {
    if (assert_real) {
        // realness is preserved iff m(-xi) = conj m(xi)
        double defect = 0.0;
        for (int k = 1; k < grid_->node_count() / 2; ++k) {
            defect = std::max(defect, std::abs(sampled[grid_->index_of(-k)] -
                                               std::conj(sampled[grid_->index_of(k)])));
        }
        defect = std::max(defect, std::abs(sampled[0].imag()));
        if (defect > 1e-12)
            throw std::runtime_error("apply_multiplier: symbol breaks Hermitian symmetry");
    }
    ensure_spectral(s);
    auto& uh = s.uh_;
    for (int j = 0; j < grid_->node_count(); ++j) uh[j] *= sampled[j];
    uh[grid_->nyquist_index()] = 0.0; // no symmetric partner
    s.phys_current_ = false;
}

std::vector<double> SpectralEngine::padded_physical(const std::vector<complexd>& uh) {
    const int n = fft_->n, np = fft_->np;
    complexd* b = as_cplx(fft_->buf_np);
    std::fill(b, b + np, complexd(0.0, 0.0));
    // copy retained band |k| <= N/2 - 1 (Nyquist dropped), with padded twist
    for (int k = -(n / 2 - 1); k <= n / 2 - 1; ++k) {
        const int js = k >= 0 ? k : k + n;
        const int jb = k >= 0 ? k : k + np;
        const double tw = (k & 1) ? -1.0 : 1.0;
        b[jb] = tw * uh[js];
    }
    fftw_execute(fft_->bwd_np);
    const double scale = std::sqrt(2.0 * SpectralGrid::pi()) / (2.0 * grid_->half_length());
    std::vector<double> fine(np);
    for (int m = 0; m < np; ++m) fine[m] = scale * b[m].real();
    return fine;
}

std::vector<complexd> SpectralEngine::padded_forward_truncate(const std::vector<double>& fine) {
    const int n = fft_->n, np = fft_->np;
    complexd* b = as_cplx(fft_->buf_np);
    for (int m = 0; m < np; ++m) b[m] = complexd(fine[m], 0.0);
    fftw_execute(fft_->fwd_np);
    const double scale = (2.0 * grid_->half_length() / np) / std::sqrt(2.0 * SpectralGrid::pi());
    std::vector<complexd> uh(n, complexd(0.0, 0.0));
    for (int k = -(n / 2 - 1); k <= n / 2 - 1; ++k) {
        const int js = k >= 0 ? k : k + n;
        const int jb = k >= 0 ? k : k + np;
        const double tw = (k & 1) ? -1.0 : 1.0;
        uh[js] = scale * tw * b[jb];
    }
    return uh;
}

FieldState SpectralEngine::quintic_product(const FieldState& a, const FieldState& b,
                                           const FieldState& c, const FieldState& d,
                                           const FieldState& e) {
    const FieldState* fs[5] = {&a, &b, &c, &d, &e};
    for (const FieldState* f : fs) {
        if (!f->grid().same_as(*grid_)) throw std::invalid_argument("quintic_product: grid mismatch");
        if (f->time() != a.time()) throw std::invalid_argument("quintic_product: time mismatch");
    }
    std::vector<double> prod;
    for (int i = 0; i < 5; ++i) {
        ensure_spectral(*fs[i]);
        std::vector<double> fine = padded_physical(fs[i]->spectral_raw());
        if (i == 0) {
            prod = std::move(fine);
        } else {
            for (size_t m = 0; m < prod.size(); ++m) prod[m] *= fine[m];
        }
    }
    FieldState out = FieldState::from_spectrum(grid_, padded_forward_truncate(prod), a.time());
    return out;
}

std::vector<complexd> SpectralEngine::quintic_nonlinearity(const std::vector<complexd>& uh) {
    std::vector<double> fine = padded_physical(uh);
    for (double& v : fine) {
        const double v2 = v * v;
        v = v2 * v2 * v;
    }
    std::vector<complexd> u5h = padded_forward_truncate(fine);
    const int n = grid_->node_count();
    for (int j = 0; j < n; ++j) {
        const double xi = grid_->frequency(j);
        u5h[j] *= complexd(0.0, -xi / 5.0); // -(1/5) d_x
    }
    u5h[grid_->nyquist_index()] = 0.0;
    return u5h;
}

DyadicProjection SpectralEngine::dyadic_projection(int j) const {
    DyadicProjection p;
    p.j = j;
    p.weights.resize(grid_->node_count());
    for (int i = 0; i < grid_->node_count(); ++i)
        p.weights[i] = cutoff_psi_j(grid_->frequency(i), j);
    return p;
}

FieldState SpectralEngine::project_dyadic(const FieldState& s, int j) {
    ensure_spectral(s);
    FieldState out = FieldState::from_spectrum(grid_, s.spectral_raw(), s.time());
    auto& uh = out.spectral_mut();
    for (int i = 0; i < grid_->node_count(); ++i) uh[i] *= cutoff_psi_j(grid_->frequency(i), j);
    uh[grid_->nyquist_index()] = 0.0;
    return out;
}

FieldState SpectralEngine::project_below(const FieldState& s, int j) {
    ensure_spectral(s);
    FieldState out = FieldState::from_spectrum(grid_, s.spectral_raw(), s.time());
    auto& uh = out.spectral_mut();
    for (int i = 0; i < grid_->node_count(); ++i) uh[i] *= cutoff_phi_j(grid_->frequency(i), j);
    uh[grid_->nyquist_index()] = 0.0;
    return out;
}

double SpectralEngine::l2_physical(const FieldState& s) {
    ensure_physical(s);
    double acc = 0.0;
    for (double v : s.physical_raw()) acc += v * v;
    return std::sqrt(acc * grid_->dx());
}

double SpectralEngine::l2_spectral(const FieldState& s) {
    ensure_spectral(s);
    double acc = 0.0;
    for (const complexd& v : s.spectral_raw()) acc += std::norm(v);
    return std::sqrt(acc * grid_->dxi());
}

} // namespace qkdv
