// response.hpp: adiabatic response matrix f of a dephasing Lindbladian
//
// f_{mu nu} is the coefficient of dphi^nu/dt in Tr(rho_t F_mu). Three routes:
//   superop        Tr(F_mu L^-1(d_nu P)) with the restricted inverse of L
//   spectral_sum   sum_{j>0} (gamma_j0 g^(j) + omega^(j)) / (1 + gamma_j0^2)
//   closed_form    gamma/(1+gamma^2) g + 1/(1+gamma^2) omega  (single rate only)

#pragma once

#include "dephase/geometry.hpp"
#include "dephase/lindblad.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dephase {

enum class ResponseRoute { superop, superop_vectorized, spectral_sum, closed_form };

std::string to_string(ResponseRoute route);

struct ResponseMatrix {
    ControlPoint point;
    rmat f;
    ResponseRoute route{ResponseRoute::spectral_sum};
    rvec gamma_used;          // gamma_j0 per excited level (one entry for closed_form)
    double imag_residue{0};   // max |Im| discarded when f was formed

    rmat sym() const { return 0.5 * (f + f.transpose()); }
    rmat antisym() const { return 0.5 * (f - f.transpose()); }
};

// Spectral data must carry dP and forces. With vectorized = true the inverse
// comes from a least-squares solve of the dim^2 x dim^2 matrix (dim <= 60).
ResponseMatrix response_superop(const SpectralData& spec, const DephasingSpec& deph, bool vectorized = false);

ResponseMatrix response_spectral_sum(const SpectralData& spec, const DephasingSpec& deph);

// Same sum, from per-level tensors and precomputed rates.
rmat spectral_sum(const GeometricTensor& per_level_tensor, const rvec& rates);

ResponseMatrix response_closed_form(const GeometricTensor& gt, double gamma);

// Single-rate gate: max_j |gamma_j0 - mean| <= 1e-8 (1 + mean).
bool is_single_rate(const rvec& rates, double* mean = nullptr);

// gamma_j0 for j >= 1.
rvec ground_rates(const SpectralData& spec, const DephasingSpec& deph);

struct InverseResponseRow {
    double gamma{0};
    rmat f_inverse;
    double antisym_error{0};  // ||antisym(f^-1) - omega^-1||_F
    double sym_error{0};      // ||sym(f^-1) - gamma g^-1||_F
};

struct InverseResponseReport {
    CompatibilityReport compat;
    rmat omega_inverse;
    std::vector<InverseResponseRow> rows;
    double antisym_variation{0};  // max_gamma ||antisym(f^-1)(gamma) - antisym(f^-1)(gamma_0)||_F
};

// Evaluates f^-1 from the closed form for each gamma. Incompatible inputs are
// reported (compat.compatible = false) rather than rejected.
InverseResponseReport inverse_response_check(const GeometricTensor& gt, const std::vector<double>& gammas,
                                             double compat_tol = 1e-6);

struct SweepRow {
    double gamma{0};
    double value{0};  // (1/2 pi) * integral of antisym(f)_12 over the chart
};

struct SweepTable {
    double curvature_integral{0};  // (1/2 pi) * integral of omega_12
    int n1{0};
    int n2{0};
    std::vector<SweepRow> rows;
};

// Midpoint-rule sweep over cell centres of the chart rectangle. The
// Hamiltonian-family overload evaluates f by the spectral sum with
// preset(gamma); the state-family overload assumes single-rate dephasing.
SweepTable conductance_sweep(const HamiltonianFamily& fam, const std::function<DephasingSpec(double)>& preset,
                             const std::vector<double>& gammas, ChernGrid grid);
SweepTable conductance_sweep(const StateFamily& fam, const std::vector<double>& gammas, ChernGrid grid,
                             double fd_step = 1e-4);

}  // namespace dephase
