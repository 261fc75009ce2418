#pragma once

#include "qkdv/spectral.hpp"

#include <string>
#include <vector>

namespace qkdv {

// f^(t, xi) = e^{-i t xi^5} u^(t, xi): the interaction profile, constant in
// time for the free flow and slowly varying for small nonlinear flow.
struct ProfileSnapshot {
    double t = 0.0;
    std::vector<complexd> fhat; // FFT order, same layout as the grid
    std::string run_id;
    long step_index = 0;
};

ProfileSnapshot extract_profile(SpectralEngine& eng, const FieldState& state);

// Re-attach the free evolution: u^ = e^{+i t xi^5} f^.
FieldState attach_free_evolution(SpectralEngine& eng, const ProfileSnapshot& snap, GridPtr grid);

struct XNormReport {
    double sobolev = 0.0;   // ||u||_{H^2}
    double weighted = 0.0;  // t^{-1/10} ||x f||_{L^2} via spectral d_xi
    double flat = 0.0;      // ||f^||_{L^infty}
    double total = 0.0;
    bool boundary_warning = false;
};

XNormReport x_norm(SpectralEngine& eng, const ProfileSnapshot& snap, const FieldState& state);

// ||x f||_{L^2} alone (4th-order d_xi stencil on the frequency grid).
double weighted_profile_norm(const SpectralGrid& grid, const std::vector<complexd>& fhat);

struct VectorFieldIdentityRecord {
    double residual_rel = 0.0;       // ||Ju - ISu - t u^5|| / ||Ju||
    double right_boundary_rel = 0.0; // |I(Su)(L)| / ||ISu||
    bool right_boundary_warning = false;
};

// Checks J u = I S u + t u^5 with S = 1 + x d_x + 5 t d_t, J = x + 5 t d_x^4,
// d_t u taken from the equation's right side. With include_nonlinearity false
// the u^5 terms are dropped consistently on both sides.
VectorFieldIdentityRecord vector_field_identity_check(SpectralEngine& eng, const FieldState& state,
                                                      bool include_nonlinearity = true);

} // namespace qkdv
