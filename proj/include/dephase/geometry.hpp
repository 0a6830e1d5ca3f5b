// geometry.hpp: adiabatic connection, quantum geometric tensor (metric g and
// curvature omega), compatibility of (g, omega), holomorphicity, Chern numbers.

#pragma once

#include "dephase/operator_core.hpp"

#include <optional>
#include <vector>

namespace dephase {

struct GeometricTensor {
    // Per excited level j: P_j in place of P_perp. g^(j) + i omega^(j) = 2 Tr(dP_mu P_j dP_nu).
    struct Level {
        std::size_t level{0};
        rmat g;
        rmat omega;
    };

    ControlPoint point;
    rmat g;      // Fubini-Study metric, symmetric PSD
    rmat omega;  // adiabatic curvature, antisymmetric
    std::vector<Level> per_level;
};

// A_mu = P_perp d_mu P.
std::vector<cmat> connection(const SpectralData& spec);

// g_{mu nu} = Tr(d_nu P d_mu P), omega_{mu nu} = i Tr(P_perp [d_mu P, d_nu P]).
GeometricTensor geometric_tensor(const SpectralData& spec, bool per_level = false);

// 2 Tr(A_mu A_nu^dagger); equals g - i omega.
cmat connection_tensor(const SpectralData& spec);

struct ElectronHoleReport {
    double metric_residual{0};     // ||g(P) - g(P_perp)||_F
    double curvature_residual{0};  // ||omega(P) + omega(P_perp)||_F
};

// Recomputes (g, omega) for the complementary bundle P_perp (d P_perp = -d P).
ElectronHoleReport electron_hole_check(const SpectralData& spec);

struct CompatibilityReport {
    double residual{0};         // ||omega^-1 g + g^-1 omega||_F
    double det_gap{0};          // |det g - det omega|
    double J_residual{0};       // ||J^2 + 1||_F, J = omega^-1 g
    double scale{0};            // ||g^-1 omega||_F
    double omega_condition{0};  // cond_2(omega)
    double g_condition{0};
    bool compatible{false};
};

// Throws NumericalError ("symplectic form degenerate") when |det omega| <= 1e-12 ||omega||^m.
// compatible <=> residual <= tol * ||g^-1 omega||_F and cond(omega) < 1e8.
CompatibilityReport compatibility(const GeometricTensor& gt, double tol = 1e-6);
CompatibilityReport compatibility(const rmat& g, const rmat& omega, double tol = 1e-6);

// ||tau A_1 - A_2||_F for a two-parameter control space; Im tau != 0.
double holomorphicity_residual(const SpectralData& spec, cplx tau);

struct ChernGrid {
    int n1{24};
    int n2{24};
};

ChernGrid default_chern_grid(ManifoldKind kind);

struct ChernResult {
    int chern{0};
    double value{0};      // sum of plaquette phases / 2 pi before rounding
    double deviation{0};  // |value - chern|
    int n1{0};
    int n2{0};
    std::optional<double> quadrature_value;  // midpoint quadrature of omega / 2 pi
};

// Plaquette (projector loop) method on the closed chart rectangle of a
// two-parameter sphere or torus family. Vertices on the chart boundary are
// evaluated at the boundary values themselves, so a family that is periodic
// only up to a unitary gauge map still closes. Requires a rank-one ground state.
ChernResult chern_number(const HamiltonianFamily& fam, ChernGrid grid, bool quadrature_check = false);
ChernResult chern_number(const StateFamily& fam, ChernGrid grid);

// (1/2 pi) * midpoint-rule integral of omega_12 over the chart rectangle.
double curvature_integral(const HamiltonianFamily& fam, ChernGrid grid);

}  // namespace dephase
