// operator_core.cpp: spectral decomposition, projection derivatives, algebra helpers

#include "dephase/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dephase {

namespace {

std::string format_point(const ControlPoint& p) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        os << (i ? ", " : "") << p[i];
    }
    os << ")";
    return os.str();
}

// Richardson-combined central difference of a matrix-valued function.
template <class F>
cmat richardson_derivative(F&& f, const ControlPoint& phi, Eigen::Index mu, double h) {
    auto central = [&](double step) {
        ControlPoint plus = phi, minus = phi;
        plus[mu] += step;
        minus[mu] -= step;
        return cmat((f(plus) - f(minus)) / (2.0 * step));
    };
    const cmat coarse = central(h);
    const cmat fine = central(0.5 * h);
    return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

NotHermitianError::NotHermitianError(const std::string& where, double residual)
    : NumericalError(where + ": matrix is not Hermitian (||M - M^dagger||_F = " +
                     std::to_string(residual) + ")"),
      residual_(residual) {}

GapClosureError::GapClosureError(ControlPoint point, double gap, double tolerance)
    : NumericalError("spectral gap closed at phi = " + format_point(point) + ": gap " +
                     std::to_string(gap) + " <= " + std::to_string(tolerance)),
      point_(std::move(point)),
      gap_(gap) {}

std::string to_string(ManifoldKind kind) {
    switch (kind) {
    case ManifoldKind::sphere: return "sphere";
    case ManifoldKind::plane: return "plane";
    case ManifoldKind::torus: return "torus";
    case ManifoldKind::generic: return "generic";
    }
    return "generic";
}

// ------------------------------ families -----------------------------------

cmat HamiltonianFamily::hamiltonian(const ControlPoint& phi) const {
    if (phi.size() != control_dim) {
        throw std::invalid_argument(name + ": control point has dimension " +
                                    std::to_string(phi.size()) + ", expected " +
                                    std::to_string(control_dim));
    }
    cmat H = eval(phi);
    if (H.rows() != hilbert_dim || H.cols() != hilbert_dim) {
        throw std::invalid_argument(name + ": eval returned a matrix of the wrong shape");
    }
    const double res = hermiticity_residual(H);
    if (res > 1e-12 * std::max(1.0, H.norm())) {
        throw NotHermitianError(name, res);
    }
    return H;
}

std::vector<cmat> HamiltonianFamily::forces(const ControlPoint& phi) const {
    if (grad) {
        auto F = grad(phi);
        if (static_cast<int>(F.size()) != control_dim) {
            throw std::invalid_argument(name + ": grad returned wrong number of components");
        }
        return F;
    }
    std::vector<cmat> F;
    F.reserve(control_dim);
    const double h = 1e-4 * control_scale;
    for (int mu = 0; mu < control_dim; ++mu) {
        F.push_back(richardson_derivative([this](const ControlPoint& p) { return eval(p); },
                                          phi, mu, h));
    }
    return F;
}

// ----------------------------- spectral data --------------------------------

const cmat& SpectralData::ground() const {
    if (projections.empty()) {
        throw std::logic_error("SpectralData: no projections");
    }
    return projections.front();
}

cmat SpectralData::ground_complement() const {
    return cmat::Identity(dim(), dim()) - ground();
}

Eigen::Index SpectralData::ground_rank() const {
    return degeneracy_classes.empty() ? 0
                                      : static_cast<Eigen::Index>(degeneracy_classes.front().size());
}

double SpectralData::gap() const {
    if (energies.size() < 2) return std::numeric_limits<double>::infinity();
    return energies[1] - energies[0];
}

cmat SpectralData::hamiltonian() const {
    cmat H = cmat::Zero(dim(), dim());
    for (std::size_t j = 0; j < projections.size(); ++j) {
        H += energies[static_cast<Eigen::Index>(j)] * projections[j];
    }
    return H;
}

SpectralData eigensystem(const cmat& H, const EigensystemOptions& opts) {
    if (H.rows() != H.cols() || H.rows() == 0) {
        throw std::invalid_argument("eigensystem: Hamiltonian must be square and non-empty");
    }
    const double res = hermiticity_residual(H);
    if (res > opts.hermiticity_tol * std::max(H.norm(), 1e-300) && res > 0.0) {
        throw NotHermitianError("eigensystem", res);
    }
    Eigen::SelfAdjointEigenSolver<cmat> solver(0.5 * (H + H.adjoint()));
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigensystem: eigendecomposition failed");
    }
    const rvec& eps = solver.eigenvalues();
    const cmat& U = solver.eigenvectors();
    const double scale = std::max(1.0, eps.cwiseAbs().maxCoeff());
    const double merge_tol = opts.degeneracy_rel_tol * scale;

    SpectralData out;
    std::vector<double> class_energy;
    for (Eigen::Index i = 0; i < eps.size(); ++i) {
        if (!out.degeneracy_classes.empty() &&
            eps[i] - eps[out.degeneracy_classes.back().back()] < merge_tol) {
            out.degeneracy_classes.back().push_back(static_cast<int>(i));
        } else {
            out.degeneracy_classes.push_back({static_cast<int>(i)});
        }
    }
    out.energies.resize(static_cast<Eigen::Index>(out.degeneracy_classes.size()));
    for (std::size_t c = 0; c < out.degeneracy_classes.size(); ++c) {
        const auto& members = out.degeneracy_classes[c];
        cmat P = cmat::Zero(H.rows(), H.cols());
        double e = 0.0;
        for (int i : members) {
            P += U.col(i) * U.col(i).adjoint();
            e += eps[i];
        }
        out.energies[static_cast<Eigen::Index>(c)] = e / static_cast<double>(members.size());
        out.projections.push_back(std::move(P));
    }
    return out;
}

SpectralData projection_derivatives(const HamiltonianFamily& fam, const ControlPoint& phi,
                                    const DerivativeOptions& opts) {
    SpectralData spec = eigensystem(fam.hamiltonian(phi), opts.eig);
    spec.point = phi;
    if (spec.levels() < 2) {
        // a multiple of the identity: P = 1 and every derivative vanishes
        spec.forces = fam.forces(phi);
        spec.dP.assign(static_cast<std::size_t>(fam.control_dim), cmat::Zero(spec.dim(), spec.dim()));
        return spec;
    }
    if (spec.gap() <= opts.gap_tol) {
        throw GapClosureError(phi, spec.gap(), opts.gap_tol);
    }
    spec.forces = fam.forces(phi);

    if (opts.method == DerivativeMethod::perturbative) {
        const cmat& P0 = spec.ground();
        const double e0 = spec.energies[0];
        for (const cmat& F : spec.forces) {
            cmat d = cmat::Zero(spec.dim(), spec.dim());
            for (std::size_t j = 1; j < spec.levels(); ++j) {
                const cmat& Pj = spec.projections[j];
                d += (Pj * F * P0 + P0 * F * Pj) / (e0 - spec.energies[static_cast<Eigen::Index>(j)]);
            }
            spec.dP.push_back(std::move(d));
        }
        return spec;
    }

    const Eigen::Index rank = spec.ground_rank();
    auto ground_at = [&](const ControlPoint& p) {
        SpectralData s = eigensystem(fam.hamiltonian(p), opts.eig);
        if (s.ground_rank() != rank || s.gap() <= opts.gap_tol) {
            throw GapClosureError(p, s.gap(), opts.gap_tol);
        }
        return s.ground();
    };
    const double h = opts.fd_step * fam.control_scale;
    for (int mu = 0; mu < fam.control_dim; ++mu) {
        spec.dP.push_back(richardson_derivative(ground_at, phi, mu, h));
    }
    return spec;
}

SpectralData bundle_spectral_data(const StateFamily& fam, const ControlPoint& phi, double step) {
    if (phi.size() != fam.control_dim) {
        throw std::invalid_argument(fam.name + ": control point has wrong dimension");
    }
    const double h = step * fam.control_scale;
    std::vector<cvec> states;
    states.push_back(fam.state(phi));
    for (int mu = 0; mu < fam.control_dim; ++mu) {
        for (double s : {h, -h, 0.5 * h, -0.5 * h}) {
            ControlPoint p = phi;
            p[mu] += s;
            states.push_back(fam.state(p));
        }
    }
    const Eigen::Index n = states.front().size();
    const auto k = static_cast<Eigen::Index>(states.size());
    cmat stacked(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        if (states[static_cast<std::size_t>(c)].size() != n) {
            throw std::invalid_argument(fam.name + ": state dimension changed along the bundle");
        }
        stacked.col(c) = states[static_cast<std::size_t>(c)];
    }
    // psi_c = Q R_c with orthonormal Q, so R_c are exact coordinates on the span
    Eigen::HouseholderQR<cmat> qr(stacked);
    const cmat R = qr.matrixQR().topRows(std::min(n, k)).triangularView<Eigen::Upper>();
    auto projector = [&](Eigen::Index c) {
        const cvec v = R.col(c);
        return cmat(v * v.adjoint() / v.squaredNorm());
    };

    SpectralData spec;
    spec.point = phi;
    const cmat P0 = projector(0);
    const Eigen::Index d = P0.rows();
    spec.energies = rvec::LinSpaced(2, 0.0, 1.0);
    spec.projections = {P0, cmat::Identity(d, d) - P0};
    spec.degeneracy_classes = {{0}, {}};
    for (Eigen::Index i = 1; i < d; ++i) spec.degeneracy_classes[1].push_back(static_cast<int>(i));
    for (int mu = 0; mu < fam.control_dim; ++mu) {
        const Eigen::Index base = 1 + 4 * mu;
        const cmat coarse = (projector(base) - projector(base + 1)) / (2.0 * h);
        const cmat fine = (projector(base + 2) - projector(base + 3)) / h;
        spec.dP.push_back((4.0 * fine - coarse) / 3.0);
    }
    return spec;
}

// ------------------------------- algebra ------------------------------------

namespace {
void require_same_shape(const cmat& a, const cmat& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch");
    }
}
}  // namespace

cmat commutator(const cmat& a, const cmat& b) {
    require_same_shape(a, b, "commutator");
    return a * b - b * a;
}

cmat anticommutator(const cmat& a, const cmat& b) {
    require_same_shape(a, b, "anticommutator");
    return a * b + b * a;
}

cmat double_commutator(const cmat& a, const cmat& b) {
    return commutator(a, commutator(a, b));
}

cplx frobenius_inner(const cmat& a, const cmat& b) {
    require_same_shape(a, b, "frobenius_inner");
    return (a.adjoint() * b).trace();
}

double hermiticity_residual(const cmat& m) {
    return (m - m.adjoint()).norm();
}

double operator_norm(const cmat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<cmat> svd(m);
    return svd.singularValues()[0];
}

cmat pauli_x() {
    cmat s(2, 2);
    s << 0, 1, 1, 0;
    return s;
}

cmat pauli_y() {
    cmat s(2, 2);
    s << 0, -I_unit, I_unit, 0;
    return s;
}

cmat pauli_z() {
    cmat s(2, 2);
    s << 1, 0, 0, -1;
    return s;
}

double SpectralCheck::worst_projection() const {
    return std::max({idempotency, hermiticity, completeness, orthogonality});
}

SpectralCheck check_spectral_invariants(const SpectralData& spec, const cmat* H) {
    SpectralCheck c;
    const Eigen::Index n = spec.dim();
    cmat sum = cmat::Zero(n, n);
    for (std::size_t j = 0; j < spec.levels(); ++j) {
        const cmat& Pj = spec.projections[j];
        c.idempotency = std::max(c.idempotency, (Pj * Pj - Pj).norm());
        c.hermiticity = std::max(c.hermiticity, hermiticity_residual(Pj));
        for (std::size_t k = j + 1; k < spec.levels(); ++k) {
            c.orthogonality = std::max(c.orthogonality, (Pj * spec.projections[k]).norm());
        }
        sum += Pj;
    }
    c.completeness = (sum - cmat::Identity(n, n)).norm();
    if (H != nullptr) {
        c.reconstruction = (spec.hamiltonian() - *H).norm() / std::max(1.0, H->norm());
    }
    if (spec.has_derivatives()) {
        const cmat& P = spec.ground();
        const cmat Q = spec.ground_complement();
        for (const cmat& d : spec.dP) {
            c.dP_hermiticity = std::max(c.dP_hermiticity, hermiticity_residual(d));
            c.dP_trace = std::max(c.dP_trace, std::abs(d.trace()));
            c.dP_diagonal_blocks =
                std::max({c.dP_diagonal_blocks, (P * d * P).norm(), (Q * d * Q).norm()});
        }
    }
    return c;
}

}  // namespace dephase
