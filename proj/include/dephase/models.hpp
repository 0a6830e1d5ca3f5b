// models.hpp: model zoo: qubit on the sphere, phase-space controlled oscillator
// (coherent states), Landau level on a flux torus, and seeded random families.

#pragma once

#include "dephase/geometry.hpp"

#include <cstdint>
#include <vector>

namespace dephase {

// ---------------------------------------------------------------- qubit ----

// H = r n(theta, alpha) . sigma on theta in [0, pi], alpha in [0, 2 pi].
HamiltonianFamily qubit_spherical(double radius = 1.0);

// H = n(z) . sigma with n the inverse stereographic projection of z = x + i y
// from the north pole; the ground state is proportional to (1, -z).
HamiltonianFamily qubit_stereographic();

// H = phi . sigma on R^3 \ {0}.
HamiltonianFamily qubit_cartesian();

// g = diag(1, sin^2 theta) / 2, omega_{theta alpha} = -sin(theta) / 2. Throws at the poles.
GeometricTensor qubit_closed_form_geometry(double theta, double alpha);

// ----------------------------------------------------------- oscillator ----

// H(zeta, mu) = (p - mu)^2 / 2 + (x - zeta)^2 / 2 in a truncated Fock space.
class OscillatorModel {
public:
    explicit OscillatorModel(int cutoff = 60);

    int cutoff() const { return cutoff_; }
    const cmat& lowering() const { return a_; }
    const cmat& position() const { return x_; }
    const cmat& momentum() const { return p_; }

    HamiltonianFamily family() const;

    // (x - zeta) + i (p - mu)
    cmat shifted_annihilator(double zeta, double mu) const;

    // |alpha><alpha| with alpha = (zeta + i mu) / sqrt(2), truncated and renormalized.
    cmat coherent_projector(double zeta, double mu) const;

private:
    int cutoff_;
    cmat a_, x_, p_;
};

// ||P_perp a P||_F with P the ground projector of the truncated H(zeta, mu).
// Throws when zeta^2 + mu^2 > cutoff / 4.
double oscillator_annihilator_residual(const OscillatorModel& model, double zeta, double mu);

// --------------------------------------------------------------- Landau ----

// Lowest Landau level for B = 1 on the torus of skewness tau, threaded by
// fluxes (phi1, phi2); coordinates (x, y) in [0,1)^2 with area element tau_2 dx dy.
struct LandauModel {
    cplx tau{0.0, 1.0};
    int flux{1};
    int theta_cutoff{10};
    int grid{256};
};

struct LandauState {
    cmat values;       // psi(x_a, y_b), rows indexed by x, columns by y
    double norm{0};    // quadrature of |psi|^2 tau_2 dx dy
};

// Truncated theta series for the ground state, sampled on the uniform grid.
LandauState landau_ground_state(const LandauModel& model, double phi1, double phi2);

// Single amplitude at an arbitrary (x, y), off-grid points included.
cplx landau_amplitude(const LandauModel& model, double phi1, double phi2, double x, double y);

struct LandauBoundaryReport {
    double periodic_x{0};  // max |psi(x+1,y) - psi(x,y)| / max |psi|
    double magnetic_y{0};  // max |e^{2 pi i x} psi(x,y+1) - psi(x,y)| / max |psi|
};

LandauBoundaryReport landau_boundary_residual(const LandauModel& model, double phi1, double phi2);

// ||D psi|| / ||tau d_x psi|| with D = i(tau d_x - d_y) - 2 pi tau (y + phi),
// derivatives by Richardson central differences on a sample of points.
double landau_annihilator_residual(const LandauModel& model, double phi1, double phi2);

// Normalized flattened grid states with the quadrature weight folded in.
StateFamily landau_family(const LandauModel& model);

struct LandauGeometryField {
    std::vector<ControlPoint> points;           // cell centres of the flux grid
    std::vector<GeometricTensor> tensors;
    std::vector<CompatibilityReport> compat;
    double max_compat_residual{0};              // max residual / scale
    double max_det_gap{0};                      // max |det g - det omega| / |det omega|
    double omega_variation{0};                  // (max - min) / mean |omega_12|
    double omega_total{0};                      // midpoint integral of omega_12 over the torus
};

LandauGeometryField landau_geometry(const LandauModel& model, ChernGrid grid, double fd_step = 1e-4);

// ------------------------------------------------------------- random ----

enum class RandomKind { generic, real_symmetric, isospectral };

struct RandomFamilyOptions {
    int hilbert_dim{4};
    int control_dim{2};
    std::uint64_t seed{1};
    RandomKind kind{RandomKind::generic};
    double spacing{1.0};   // unperturbed level spacing
    double coupling{0.3};  // scale of the random Hermitian terms
};

// generic / real_symmetric: H = diag(0, s, 2s, ...) + c (A + sum_mu sin(phi_mu) B_mu + cos(phi_mu) C_mu),
// a torus family on [0, 2 pi]^m. isospectral: H = U(phi) H0 U(phi)^+ with
// U = prod_mu exp(i phi_mu K_mu).
HamiltonianFamily random_family(const RandomFamilyOptions& opts);

// H(phi) = H0 on the torus [0,1]^m.
HamiltonianFamily constant_family(const cmat& H0, int control_dim = 2);

}  // namespace dephase
