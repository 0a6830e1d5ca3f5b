// operator_core.hpp: Dense complex-matrix substrate: spectral projections, their
// control-space derivatives, and the Hamiltonian / state families consumed downstream.
//
// Everything geometric is built from spectral projections, never from raw
// eigenvectors, so exported numbers do not depend on eigenvector phases.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dephase {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;
using ControlPoint = Eigen::VectorXd;

inline constexpr cplx I_unit{0.0, 1.0};

// ------------------------------- errors ------------------------------------

// A numerical precondition failed (gap closure, degenerate form, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotHermitianError : public NumericalError {
public:
    NotHermitianError(const std::string& where, double residual);
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class GapClosureError : public NumericalError {
public:
    GapClosureError(ControlPoint point, double gap, double tolerance);
    const ControlPoint& point() const noexcept { return point_; }
    double gap() const noexcept { return gap_; }

private:
    ControlPoint point_;
    double gap_;
};

// ------------------------------ families -----------------------------------

enum class ManifoldKind { sphere, plane, torus, generic };

std::string to_string(ManifoldKind kind);

// phi -> H(phi) over a control manifold, with an optional analytic gradient
// F_mu = dH/dphi^mu. domain_lower/upper describe the chart rectangle used by
// closed-manifold sweeps (sphere: theta in [0,pi], alpha in [0,2pi]).
struct HamiltonianFamily {
    std::string name;
    int control_dim{0};
    int hilbert_dim{0};
    std::function<cmat(const ControlPoint&)> eval;
    std::function<std::vector<cmat>(const ControlPoint&)> grad;
    ManifoldKind manifold{ManifoldKind::generic};
    rvec domain_lower;
    rvec domain_upper;
    double control_scale{1.0};

    bool has_gradient() const noexcept { return static_cast<bool>(grad); }

    // H(phi), checked for shape and Hermiticity.
    cmat hamiltonian(const ControlPoint& phi) const;

    // F_mu from grad when present, otherwise Richardson-extrapolated central
    // differences of eval.
    std::vector<cmat> forces(const ControlPoint& phi) const;
};

// A rank-one bundle phi -> |psi(phi)> given directly as normalized vectors in
// a Euclidean inner product (quadrature weights folded into the entries). Used
// for models whose Hilbert space is too large for dense projectors.
struct StateFamily {
    std::string name;
    int control_dim{0};
    std::function<cvec(const ControlPoint&)> state;
    ManifoldKind manifold{ManifoldKind::generic};
    rvec domain_lower;
    rvec domain_upper;
    double control_scale{1.0};
};

// ----------------------------- spectral data --------------------------------

struct SpectralData {
    ControlPoint point;
    rvec energies;                                  // one per degeneracy class, ascending
    std::vector<cmat> projections;                  // P_j, one per class
    std::vector<std::vector<int>> degeneracy_classes;  // eigen-solver indices per class
    std::vector<cmat> dP;                           // d_mu P_0; empty until differentiated
    std::vector<cmat> forces;                       // F_mu; empty if not computed

    Eigen::Index dim() const { return projections.empty() ? 0 : projections.front().rows(); }
    std::size_t levels() const { return projections.size(); }
    bool has_derivatives() const { return !dP.empty(); }
    const cmat& ground() const;
    cmat ground_complement() const;
    Eigen::Index ground_rank() const;
    double gap() const;            // eps_1 - eps_0, +inf for a single level
    cmat hamiltonian() const;      // sum_j eps_j P_j
};

struct EigensystemOptions {
    double degeneracy_rel_tol{1e-10};  // |e_j - e_k| < tol * max(1, ||H||) merges levels
    double hermiticity_tol{1e-12};
};

SpectralData eigensystem(const cmat& H, const EigensystemOptions& opts = {});

enum class DerivativeMethod { perturbative, finite_difference };

struct DerivativeOptions {
    DerivativeMethod method{DerivativeMethod::perturbative};
    double gap_tol{1e-6};
    double fd_step{1e-5};  // in units of the family's control scale
    EigensystemOptions eig{};
};

SpectralData projection_derivatives(const HamiltonianFamily& fam, const ControlPoint& phi,
                                    const DerivativeOptions& opts = {});

// Spectral data of a rank-one state bundle at phi, represented exactly inside
// the span of the states sampled for the finite differences. P_1 = 1 - P_0 on
// that span. Projector differences are central with one Richardson level.
SpectralData bundle_spectral_data(const StateFamily& fam, const ControlPoint& phi, double step);

// ------------------------------- algebra ------------------------------------

cmat commutator(const cmat& a, const cmat& b);
cmat anticommutator(const cmat& a, const cmat& b);
cmat double_commutator(const cmat& a, const cmat& b);  // [a,[a,b]]
cplx frobenius_inner(const cmat& a, const cmat& b);    // Tr(a^dagger b)
double hermiticity_residual(const cmat& m);            // ||m - m^dagger||_F
double operator_norm(const cmat& m);                   // largest singular value

cmat pauli_x();
cmat pauli_y();
cmat pauli_z();

// Max residuals of the projection invariants; dP entries are zero when absent.
struct SpectralCheck {
    double idempotency{0};
    double hermiticity{0};
    double completeness{0};
    double orthogonality{0};
    double reconstruction{0};
    double dP_hermiticity{0};
    double dP_trace{0};
    double dP_diagonal_blocks{0};

    double worst_projection() const;
};

SpectralCheck check_spectral_invariants(const SpectralData& spec, const cmat* H = nullptr);

}  // namespace dephase
