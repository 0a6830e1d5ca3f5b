// geometry.cpp

#include "dephase/geometry.hpp"

#include "dephase/parallel.hpp"

#include <cmath>
#include <numbers>

namespace dephase {

namespace {

void require_derivatives(const SpectralData& spec, const char* what) {
    if (!spec.has_derivatives()) {
        throw std::invalid_argument(std::string(what) + ": spectral data carries no projection derivatives");
    }
}

// g and omega for the bundle `P` with complement `Q` and derivative `sign * dP`.
void fill_tensor(const cmat& Q, const std::vector<cmat>& dP, rmat& g, rmat& omega) {
    const auto m = static_cast<Eigen::Index>(dP.size());
    g = rmat::Zero(m, m);
    omega = rmat::Zero(m, m);
    for (Eigen::Index mu = 0; mu < m; ++mu) {
        for (Eigen::Index nu = 0; nu < m; ++nu) {
            const cmat& a = dP[static_cast<std::size_t>(mu)];
            const cmat& b = dP[static_cast<std::size_t>(nu)];
            g(mu, nu) = (b * a).trace().real();
            omega(mu, nu) = (I_unit * (Q * (a * b - b * a)).trace()).real();
        }
    }
}

}  // namespace

std::vector<cmat> connection(const SpectralData& spec) {
    require_derivatives(spec, "connection");
    const cmat Q = spec.ground_complement();
    std::vector<cmat> A;
    A.reserve(spec.dP.size());
    for (const cmat& d : spec.dP) A.push_back(Q * d);
    return A;
}

GeometricTensor geometric_tensor(const SpectralData& spec, bool per_level) {
    require_derivatives(spec, "geometric_tensor");
    GeometricTensor gt;
    gt.point = spec.point;
    fill_tensor(spec.ground_complement(), spec.dP, gt.g, gt.omega);
    if (per_level) {
        const auto m = static_cast<Eigen::Index>(spec.dP.size());
        for (std::size_t j = 1; j < spec.levels(); ++j) {
            GeometricTensor::Level lv{j, rmat::Zero(m, m), rmat::Zero(m, m)};
            const cmat& Pj = spec.projections[j];
            for (Eigen::Index mu = 0; mu < m; ++mu) {
                const cmat left = spec.dP[static_cast<std::size_t>(mu)] * Pj;
                for (Eigen::Index nu = 0; nu < m; ++nu) {
                    const cplx s = 2.0 * (left * spec.dP[static_cast<std::size_t>(nu)]).trace();
                    lv.g(mu, nu) = s.real();
                    lv.omega(mu, nu) = s.imag();
                }
            }
            gt.per_level.push_back(std::move(lv));
        }
    }
    return gt;
}

cmat connection_tensor(const SpectralData& spec) {
    const auto A = connection(spec);
    const auto m = static_cast<Eigen::Index>(A.size());
    cmat t(m, m);
    for (Eigen::Index mu = 0; mu < m; ++mu) {
        for (Eigen::Index nu = 0; nu < m; ++nu) {
            t(mu, nu) = 2.0 * (A[static_cast<std::size_t>(mu)] * A[static_cast<std::size_t>(nu)].adjoint()).trace();
        }
    }
    return t;
}

ElectronHoleReport electron_hole_check(const SpectralData& spec) {
    require_derivatives(spec, "electron_hole_check");
    rmat g, omega, g_hole, omega_hole;
    fill_tensor(spec.ground_complement(), spec.dP, g, omega);
    std::vector<cmat> dQ;
    dQ.reserve(spec.dP.size());
    for (const cmat& d : spec.dP) dQ.push_back(-d);
    // complement of P_perp is P itself
    fill_tensor(spec.ground(), dQ, g_hole, omega_hole);
    return {(g - g_hole).norm(), (omega + omega_hole).norm()};
}

CompatibilityReport compatibility(const GeometricTensor& gt, double tol) {
    return compatibility(gt.g, gt.omega, tol);
}

CompatibilityReport compatibility(const rmat& g, const rmat& omega, double tol) {
    if (g.rows() != g.cols() || omega.rows() != omega.cols() || g.rows() != omega.rows()) {
        throw std::invalid_argument("compatibility: g and omega must be square of equal size");
    }
    const auto m = static_cast<double>(omega.rows());
    const double wnorm = omega.norm();
    const double det_w = omega.determinant();
    if (wnorm == 0.0 || std::abs(det_w) <= 1e-12 * std::pow(wnorm, m)) {
        throw NumericalError("compatibility: symplectic form degenerate (det omega = " +
                             std::to_string(det_w) + ")");
    }
    Eigen::FullPivLU<rmat> lu_w(omega), lu_g(g);
    if (!lu_g.isInvertible()) {
        throw NumericalError("compatibility: metric is singular");
    }
    const rmat w_inv = lu_w.inverse();
    const rmat g_inv = lu_g.inverse();
    auto cond = [](const rmat& a) {
        Eigen::JacobiSVD<rmat> svd(a);
        const auto& s = svd.singularValues();
        return s[0] / s[s.size() - 1];
    };

    CompatibilityReport r;
    r.residual = (w_inv * g + g_inv * omega).norm();
    r.det_gap = std::abs(g.determinant() - det_w);
    const rmat J = w_inv * g;
    r.J_residual = (J * J + rmat::Identity(omega.rows(), omega.cols())).norm();
    r.scale = (g_inv * omega).norm();
    r.omega_condition = cond(omega);
    r.g_condition = cond(g);
    r.compatible = r.residual <= tol * r.scale && r.omega_condition < 1e8;
    return r;
}

double holomorphicity_residual(const SpectralData& spec, cplx tau) {
    if (tau.imag() == 0.0) {
        throw std::invalid_argument("holomorphicity_residual: Im tau must be non-zero");
    }
    if (spec.dP.size() != 2) {
        throw std::invalid_argument("holomorphicity_residual: needs a two-parameter control space");
    }
    const auto A = connection(spec);
    return (tau * A[0] - A[1]).norm();
}

ChernGrid default_chern_grid(ManifoldKind kind) {
    if (kind == ManifoldKind::sphere) return {32, 64};
    return {24, 24};
}

namespace {

void require_closed_chart(ManifoldKind kind, const rvec& lo, const rvec& hi, int control_dim,
                          const std::string& name) {
    if (kind != ManifoldKind::sphere && kind != ManifoldKind::torus) {
        throw std::invalid_argument(name + ": Chern numbers need a closed sphere or torus control space");
    }
    if (control_dim != 2 || lo.size() != 2 || hi.size() != 2) {
        throw std::invalid_argument(name + ": Chern numbers need a two-parameter chart rectangle");
    }
}

ControlPoint grid_point(const rvec& lo, const rvec& hi, ChernGrid grid, double a, double b) {
    ControlPoint p(2);
    p[0] = lo[0] + (hi[0] - lo[0]) * a / grid.n1;
    p[1] = lo[1] + (hi[1] - lo[1]) * b / grid.n2;
    return p;
}

ChernResult plaquette_sum(const std::function<cvec(const ControlPoint&)>& state, const rvec& lo,
                          const rvec& hi, ChernGrid grid) {
    if (grid.n1 < 2 || grid.n2 < 2) {
        throw std::invalid_argument("chern_number: grid needs at least 2x2 cells");
    }
    const int rows = grid.n1 + 1, cols = grid.n2 + 1;
    std::vector<cvec> psi(static_cast<std::size_t>(rows * cols));
    parallel_for(psi.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / cols, j = static_cast<int>(idx) % cols;
        psi[idx] = state(grid_point(lo, hi, grid, i, j));
    });
    auto at = [&](int i, int j) -> const cvec& { return psi[static_cast<std::size_t>(i * cols + j)]; };

    // arg <00|10><10|11><11|01><01|00> approximates the curvature flux through the cell
    std::vector<double> phases(static_cast<std::size_t>(grid.n1));
    for (int i = 0; i < grid.n1; ++i) {
        double acc = 0.0;
        for (int j = 0; j < grid.n2; ++j) {
            const cplx w = at(i, j).dot(at(i + 1, j)) * at(i + 1, j).dot(at(i + 1, j + 1)) *
                           at(i + 1, j + 1).dot(at(i, j + 1)) * at(i, j + 1).dot(at(i, j));
            acc += std::arg(w);
        }
        phases[static_cast<std::size_t>(i)] = acc;
    }
    double total = 0.0;
    for (double p : phases) total += p;

    ChernResult r;
    r.n1 = grid.n1;
    r.n2 = grid.n2;
    r.value = total / (2.0 * std::numbers::pi);
    r.chern = static_cast<int>(std::lround(r.value));
    r.deviation = std::abs(r.value - r.chern);
    if (r.deviation > 0.1) {
        throw NumericalError("chern_number: grid too coarse (plaquette sum " + std::to_string(r.value) +
                             " is not near an integer)");
    }
    return r;
}

}  // namespace

ChernResult chern_number(const HamiltonianFamily& fam, ChernGrid grid, bool quadrature_check) {
    require_closed_chart(fam.manifold, fam.domain_lower, fam.domain_upper, fam.control_dim, fam.name);
    const double gap_tol = 1e-6;
    auto ground_state = [&](const ControlPoint& p) -> cvec {
        const cmat H = fam.hamiltonian(p);
        Eigen::SelfAdjointEigenSolver<cmat> es(H);
        const rvec& e = es.eigenvalues();
        if (e.size() > 1 && e[1] - e[0] <= gap_tol) {
            throw GapClosureError(p, e[1] - e[0], gap_tol);
        }
        return es.eigenvectors().col(0);
    };
    ChernResult r = plaquette_sum(ground_state, fam.domain_lower, fam.domain_upper, grid);
    if (quadrature_check) r.quadrature_value = curvature_integral(fam, grid);
    return r;
}

ChernResult chern_number(const StateFamily& fam, ChernGrid grid) {
    require_closed_chart(fam.manifold, fam.domain_lower, fam.domain_upper, fam.control_dim, fam.name);
    return plaquette_sum(fam.state, fam.domain_lower, fam.domain_upper, grid);
}

double curvature_integral(const HamiltonianFamily& fam, ChernGrid grid) {
    if (fam.control_dim != 2 || fam.domain_lower.size() != 2 || fam.domain_upper.size() != 2) {
        throw std::invalid_argument(fam.name + ": curvature integral needs a two-parameter chart");
    }
    const rvec& lo = fam.domain_lower;
    const rvec& hi = fam.domain_upper;
    std::vector<double> cell(static_cast<std::size_t>(grid.n1 * grid.n2));
    parallel_for(cell.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / grid.n2, j = static_cast<int>(idx) % grid.n2;
        const ControlPoint p = grid_point(lo, hi, grid, i + 0.5, j + 0.5);
        cell[idx] = geometric_tensor(projection_derivatives(fam, p)).omega(0, 1);
    });
    double total = 0.0;
    for (double c : cell) total += c;
    const double area = (hi[0] - lo[0]) * (hi[1] - lo[1]) / (grid.n1 * grid.n2);
    return total * area / (2.0 * std::numbers::pi);
}

}  // namespace dephase
