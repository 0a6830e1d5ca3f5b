// models.cpp

#include "dephase/models.hpp"

#include "dephase/dynamics.hpp"
#include "dephase/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace dephase {

namespace {

constexpr double pi = std::numbers::pi;

cmat bloch(double nx, double ny, double nz) {
    return nx * pauli_x() + ny * pauli_y() + nz * pauli_z();
}

void require_dim(const ControlPoint& phi, int m, const std::string& name) {
    if (phi.size() != m) throw std::invalid_argument(name + ": control point has wrong dimension");
}

rvec vec2(double a, double b) {
    rvec v(2);
    v << a, b;
    return v;
}

}  // namespace

// ---------------------------------------------------------------- qubit ----

HamiltonianFamily qubit_spherical(double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("qubit_spherical: radius must be positive");
    HamiltonianFamily f;
    f.name = "qubit_spherical";
    f.control_dim = 2;
    f.hilbert_dim = 2;
    f.manifold = ManifoldKind::sphere;
    f.domain_lower = vec2(0.0, 0.0);
    f.domain_upper = vec2(pi, 2.0 * pi);
    f.eval = [radius](const ControlPoint& p) {
        require_dim(p, 2, "qubit_spherical");
        const double st = std::sin(p[0]), ct = std::cos(p[0]);
        return cmat(radius * bloch(st * std::cos(p[1]), st * std::sin(p[1]), ct));
    };
    f.grad = [radius](const ControlPoint& p) {
        require_dim(p, 2, "qubit_spherical");
        const double st = std::sin(p[0]), ct = std::cos(p[0]);
        const double sa = std::sin(p[1]), ca = std::cos(p[1]);
        return std::vector<cmat>{radius * bloch(ct * ca, ct * sa, -st), radius * bloch(-st * sa, st * ca, 0.0)};
    };
    return f;
}

HamiltonianFamily qubit_stereographic() {
    HamiltonianFamily f;
    f.name = "qubit_stereographic";
    f.control_dim = 2;
    f.hilbert_dim = 2;
    f.manifold = ManifoldKind::plane;
    f.domain_lower = vec2(-2.0, -2.0);
    f.domain_upper = vec2(2.0, 2.0);
    f.eval = [](const ControlPoint& p) {
        require_dim(p, 2, "qubit_stereographic");
        const double x = p[0], y = p[1], q = 1.0 + x * x + y * y;
        return bloch(2.0 * x / q, 2.0 * y / q, 1.0 - 2.0 / q);
    };
    f.grad = [](const ControlPoint& p) {
        require_dim(p, 2, "qubit_stereographic");
        const double x = p[0], y = p[1], q = 1.0 + x * x + y * y, q2 = q * q;
        return std::vector<cmat>{bloch(2.0 * (q - 2.0 * x * x) / q2, -4.0 * x * y / q2, 4.0 * x / q2),
                                 bloch(-4.0 * x * y / q2, 2.0 * (q - 2.0 * y * y) / q2, 4.0 * y / q2)};
    };
    return f;
}

HamiltonianFamily qubit_cartesian() {
    HamiltonianFamily f;
    f.name = "qubit_cartesian";
    f.control_dim = 3;
    f.hilbert_dim = 2;
    f.manifold = ManifoldKind::generic;
    f.domain_lower = rvec::Constant(3, -1.0);
    f.domain_upper = rvec::Constant(3, 1.0);
    f.eval = [](const ControlPoint& p) {
        require_dim(p, 3, "qubit_cartesian");
        return bloch(p[0], p[1], p[2]);
    };
    f.grad = [](const ControlPoint& p) {
        require_dim(p, 3, "qubit_cartesian");
        return std::vector<cmat>{pauli_x(), pauli_y(), pauli_z()};
    };
    return f;
}

GeometricTensor qubit_closed_form_geometry(double theta, double alpha) {
    if (!(theta > 0.0 && theta < pi)) {
        throw std::invalid_argument("qubit_closed_form_geometry: theta must lie strictly between the poles");
    }
    const double s = std::sin(theta);
    GeometricTensor gt;
    gt.point = vec2(theta, alpha);
    gt.g = rmat::Zero(2, 2);
    gt.g(0, 0) = 0.5;
    gt.g(1, 1) = 0.5 * s * s;
    gt.omega = rmat::Zero(2, 2);
    gt.omega(0, 1) = -0.5 * s;
    gt.omega(1, 0) = 0.5 * s;
    return gt;
}

// ----------------------------------------------------------- oscillator ----

OscillatorModel::OscillatorModel(int cutoff) : cutoff_(cutoff) {
    if (cutoff < 2) throw std::invalid_argument("OscillatorModel: cutoff must be at least 2");
    a_ = cmat::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) a_(n - 1, n) = std::sqrt(static_cast<double>(n));
    const cmat ad = a_.adjoint();
    x_ = (a_ + ad) / std::sqrt(2.0);
    p_ = I_unit * (ad - a_) / std::sqrt(2.0);
}

HamiltonianFamily OscillatorModel::family() const {
    HamiltonianFamily f;
    f.name = "oscillator";
    f.control_dim = 2;
    f.hilbert_dim = cutoff_;
    f.manifold = ManifoldKind::plane;
    f.domain_lower = vec2(-1.0, -1.0);
    f.domain_upper = vec2(1.0, 1.0);
    const cmat x = x_, p = p_;
    f.eval = [x, p](const ControlPoint& c) {
        require_dim(c, 2, "oscillator");
        const cmat one = cmat::Identity(x.rows(), x.cols());
        const cmat X = x - c[0] * one, Pm = p - c[1] * one;
        return cmat(0.5 * (Pm * Pm + X * X));
    };
    f.grad = [x, p](const ControlPoint& c) {
        require_dim(c, 2, "oscillator");
        const cmat one = cmat::Identity(x.rows(), x.cols());
        return std::vector<cmat>{-(x - c[0] * one), -(p - c[1] * one)};
    };
    return f;
}

cmat OscillatorModel::shifted_annihilator(double zeta, double mu) const {
    const cmat one = cmat::Identity(cutoff_, cutoff_);
    return (x_ - zeta * one) + I_unit * (p_ - mu * one);
}

cmat OscillatorModel::coherent_projector(double zeta, double mu) const {
    const cplx alpha = cplx(zeta, mu) / std::sqrt(2.0);
    cvec v(cutoff_);
    cplx c = 1.0;
    for (int n = 0; n < cutoff_; ++n) {
        if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
        v[n] = c;
    }
    v.normalize();
    return v * v.adjoint();
}

double oscillator_annihilator_residual(const OscillatorModel& model, double zeta, double mu) {
    if (zeta * zeta + mu * mu > model.cutoff() / 4.0) {
        throw std::invalid_argument("oscillator_annihilator_residual: displacement too large for the Fock cutoff");
    }
    ControlPoint c = vec2(zeta, mu);
    const SpectralData spec = eigensystem(model.family().hamiltonian(c));
    const cmat& P = spec.ground();
    return (spec.ground_complement() * model.shifted_annihilator(zeta, mu) * P).norm();
}

// --------------------------------------------------------------- Landau ----

namespace {

struct LandauSetup {
    cplx tau;
    cplx phi;
    double prefactor;
    int n_lo, n_hi;
};

LandauSetup landau_setup(const LandauModel& model, double phi1, double phi2) {
    if (model.flux != 1) throw std::invalid_argument("landau: only flux B = 1 is implemented");
    const double t2 = model.tau.imag();
    if (!(t2 > 0.0)) throw std::invalid_argument("landau: Im tau must be positive");
    if (model.theta_cutoff < 1) throw std::invalid_argument("landau: theta_cutoff must be positive");
    const double nt = model.theta_cutoff;
    if (std::exp(-pi * t2 * nt * nt) > 1e-14) {
        throw NumericalError("landau: theta series tail exceeds 1e-14, raise theta_cutoff");
    }
    LandauSetup s;
    s.tau = model.tau;
    s.phi = phi1 - phi2 / model.tau;
    const double b = s.phi.imag();
    s.prefactor = std::pow(2.0 / t2, 0.25) * std::exp(-pi * std::norm(model.tau) * b * b / t2);
    // |term| peaks where y + n + Re phi = -tau_1 b / tau_2
    const double centre = -s.phi.real() - model.tau.real() * b / t2;
    s.n_lo = static_cast<int>(std::floor(centre - 1.0)) - model.theta_cutoff;
    s.n_hi = static_cast<int>(std::ceil(centre)) + model.theta_cutoff;
    return s;
}

}  // namespace

cplx landau_amplitude(const LandauModel& model, double phi1, double phi2, double x, double y) {
    const LandauSetup s = landau_setup(model, phi1, phi2);
    // widen for off-cell points
    const int lo = s.n_lo - static_cast<int>(std::ceil(std::abs(y))) - 1;
    const int hi = s.n_hi + static_cast<int>(std::ceil(std::abs(y))) + 1;
    cplx acc = 0.0;
    for (int n = lo; n <= hi; ++n) {
        const cplx z = y + n + s.phi;
        acc += std::exp(2.0 * pi * I_unit * (n * x)) * std::exp(I_unit * pi * s.tau * z * z);
    }
    return s.prefactor * acc;
}

LandauState landau_ground_state(const LandauModel& model, double phi1, double phi2) {
    const LandauSetup s = landau_setup(model, phi1, phi2);
    const int N = model.grid;
    if (N < 4) throw std::invalid_argument("landau: grid must have at least 4 points per side");
    const int nn = s.n_hi - s.n_lo + 1;
    cmat E(N, nn), C(nn, N);
    for (int k = 0; k < nn; ++k) {
        const int n = s.n_lo + k;
        for (int a = 0; a < N; ++a) {
            const double x = static_cast<double>(a) / N;
            E(a, k) = std::exp(2.0 * pi * I_unit * (n * x));
        }
        for (int b = 0; b < N; ++b) {
            const cplx z = static_cast<double>(b) / N + n + s.phi;
            C(k, b) = std::exp(I_unit * pi * s.tau * z * z);
        }
    }
    LandauState st;
    st.values.noalias() = E * C;
    st.values *= s.prefactor;
    st.norm = st.values.squaredNorm() * model.tau.imag() / (static_cast<double>(N) * N);
    return st;
}

LandauBoundaryReport landau_boundary_residual(const LandauModel& model, double phi1, double phi2) {
    const int samples = 16;
    double peak = 0.0, px = 0.0, my = 0.0;
    for (int a = 0; a < samples; ++a) {
        for (int b = 0; b < samples; ++b) {
            const double x = (a + 0.37) / samples, y = (b + 0.61) / samples;
            const cplx v = landau_amplitude(model, phi1, phi2, x, y);
            peak = std::max(peak, std::abs(v));
            px = std::max(px, std::abs(landau_amplitude(model, phi1, phi2, x + 1.0, y) - v));
            my = std::max(my, std::abs(std::exp(2.0 * pi * I_unit * x) *
                                           landau_amplitude(model, phi1, phi2, x, y + 1.0) - v));
        }
    }
    return {px / peak, my / peak};
}

double landau_annihilator_residual(const LandauModel& model, double phi1, double phi2) {
    const LandauSetup s = landau_setup(model, phi1, phi2);
    const int samples = 12;
    const double h = 1e-3;
    auto psi = [&](double x, double y) { return landau_amplitude(model, phi1, phi2, x, y); };
    auto richardson = [](const auto& f, double step) {
        const cplx d1 = (f(step) - f(-step)) / (2.0 * step);
        const cplx d2 = (f(0.5 * step) - f(-0.5 * step)) / step;
        return (4.0 * d2 - d1) / 3.0;
    };
    double num = 0.0, den = 0.0;
    for (int a = 0; a < samples; ++a) {
        for (int b = 0; b < samples; ++b) {
            const double x = (a + 0.5) / samples, y = (b + 0.5) / samples;
            const cplx dx = richardson([&](double e) { return psi(x + e, y); }, h);
            const cplx dy = richardson([&](double e) { return psi(x, y + e); }, h);
            const cplx D = I_unit * (s.tau * dx - dy) - 2.0 * pi * s.tau * (y + s.phi) * psi(x, y);
            num += std::norm(D);
            den += std::norm(s.tau * dx);
        }
    }
    return std::sqrt(num / den);
}

StateFamily landau_family(const LandauModel& model) {
    (void)landau_setup(model, 0.0, 0.0);
    StateFamily f;
    f.name = "landau";
    f.control_dim = 2;
    f.manifold = ManifoldKind::torus;
    f.domain_lower = vec2(0.0, 0.0);
    f.domain_upper = vec2(1.0, 1.0);
    f.state = [model](const ControlPoint& p) {
        require_dim(p, 2, "landau");
        LandauState st = landau_ground_state(model, p[0], p[1]);
        const double w = std::sqrt(model.tau.imag()) / model.grid;
        cvec v = Eigen::Map<cvec>(st.values.data(), st.values.size()) * w;
        const double nrm = v.norm();
        if (!(nrm > 0.0)) throw NumericalError("landau: vanishing ground state");
        return cvec(v / nrm);
    };
    return f;
}

LandauGeometryField landau_geometry(const LandauModel& model, ChernGrid grid, double fd_step) {
    const StateFamily fam = landau_family(model);
    LandauGeometryField out;
    for (int i = 0; i < grid.n1; ++i) {
        for (int j = 0; j < grid.n2; ++j) out.points.push_back(vec2((i + 0.5) / grid.n1, (j + 0.5) / grid.n2));
    }
    out.tensors.resize(out.points.size());
    parallel_for(out.points.size(), [&](std::size_t k) {
        out.tensors[k] = geometric_tensor(bundle_spectral_data(fam, out.points[k], fd_step));
    });
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum_abs = 0.0;
    const double cell = 1.0 / (static_cast<double>(grid.n1) * grid.n2);
    for (const GeometricTensor& gt : out.tensors) {
        CompatibilityReport c = compatibility(gt);
        out.max_compat_residual = std::max(out.max_compat_residual, c.residual / c.scale);
        const double dw = gt.omega.determinant();
        out.max_det_gap = std::max(out.max_det_gap, c.det_gap / std::abs(dw));
        out.compat.push_back(c);
        const double w = gt.omega(0, 1);
        lo = std::min(lo, w);
        hi = std::max(hi, w);
        sum_abs += std::abs(w);
        out.omega_total += w * cell;
    }
    out.omega_variation = (hi - lo) / (sum_abs / static_cast<double>(out.tensors.size()));
    return out;
}

// ------------------------------------------------------------- random ----

namespace {

cmat random_hermitian(CounterRng& rng, int n, bool real) {
    cmat G(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const double re = standard_normal(rng);
            const double im = real ? 0.0 : standard_normal(rng);
            G(a, b) = cplx(re, im);
        }
    }
    cmat H = 0.5 * (G + G.adjoint());
    const double nrm = operator_norm(H);
    return nrm > 0.0 ? cmat(H / nrm) : H;
}

cmat ladder_diagonal(int n, double spacing) {
    cmat D = cmat::Zero(n, n);
    for (int k = 0; k < n; ++k) D(k, k) = spacing * k;
    return D;
}

}  // namespace

HamiltonianFamily random_family(const RandomFamilyOptions& o) {
    if (o.hilbert_dim < 2 || o.control_dim < 1) throw std::invalid_argument("random_family: bad dimensions");
    if (!(o.spacing > 0.0) || !(o.coupling >= 0.0)) {
        throw std::invalid_argument("random_family: spacing must be positive and coupling non-negative");
    }
    const int n = o.hilbert_dim, m = o.control_dim;
    CounterRng rng(o.seed, 0x52414E44ULL);
    const bool real = o.kind == RandomKind::real_symmetric;

    HamiltonianFamily f;
    f.control_dim = m;
    f.hilbert_dim = n;

    if (o.kind != RandomKind::isospectral) {
        // ||perturbation|| <= coupling * spacing keeps every gap open when coupling < 1/2
        const double c = o.coupling * o.spacing / (1.0 + 2.0 * m);
        const cmat base = ladder_diagonal(n, o.spacing) + c * random_hermitian(rng, n, real);
        std::vector<cmat> B, C;
        for (int mu = 0; mu < m; ++mu) {
            B.push_back(c * random_hermitian(rng, n, real));
            C.push_back(c * random_hermitian(rng, n, real));
        }
        f.name = real ? "random_real_symmetric" : "random_generic";
        f.manifold = ManifoldKind::torus;
        f.domain_lower = rvec::Zero(m);
        f.domain_upper = rvec::Constant(m, 2.0 * pi);
        f.eval = [base, B, C, m](const ControlPoint& p) {
            require_dim(p, m, "random_family");
            cmat H = base;
            for (int mu = 0; mu < m; ++mu) H += std::sin(p[mu]) * B[mu] + std::cos(p[mu]) * C[mu];
            return H;
        };
        f.grad = [B, C, m](const ControlPoint& p) {
            require_dim(p, m, "random_family");
            std::vector<cmat> F;
            for (int mu = 0; mu < m; ++mu) F.push_back(std::cos(p[mu]) * B[mu] - std::sin(p[mu]) * C[mu]);
            return F;
        };
        return f;
    }

    const cmat H0 = ladder_diagonal(n, o.spacing) + o.coupling * o.spacing * random_hermitian(rng, n, false);
    struct ExpFactor {
        cmat vectors;
        rvec values;
        cmat K;
    };
    std::vector<ExpFactor> gens;
    for (int mu = 0; mu < m; ++mu) {
        const cmat K = random_hermitian(rng, n, false);
        Eigen::SelfAdjointEigenSolver<cmat> es(K);
        gens.push_back({es.eigenvectors(), es.eigenvalues(), K});
    }
    auto factor = [](const ExpFactor& g, double t) {
        const cvec ph = (I_unit * t * g.values.cast<cplx>()).array().exp();
        return cmat(g.vectors * ph.asDiagonal() * g.vectors.adjoint());
    };
    f.name = "random_isospectral";
    f.manifold = ManifoldKind::generic;
    f.domain_lower = rvec::Zero(m);
    f.domain_upper = rvec::Ones(m);
    f.eval = [H0, gens, factor, m](const ControlPoint& p) {
        require_dim(p, m, "random_family");
        cmat U = cmat::Identity(H0.rows(), H0.cols());
        for (int mu = 0; mu < m; ++mu) U = U * factor(gens[mu], p[mu]);
        return cmat(U * H0 * U.adjoint());
    };
    f.grad = [H0, gens, factor, m](const ControlPoint& p) {
        require_dim(p, m, "random_family");
        // d_mu H = i [L_mu K_mu L_mu^+, H], L_mu the product of the factors before mu
        cmat L = cmat::Identity(H0.rows(), H0.cols());
        std::vector<cmat> G;
        for (int mu = 0; mu < m; ++mu) {
            G.push_back(L * gens[mu].K * L.adjoint());
            L = L * factor(gens[mu], p[mu]);
        }
        const cmat H = L * H0 * L.adjoint();
        std::vector<cmat> F;
        for (const cmat& g : G) F.push_back(I_unit * commutator(g, H));
        return F;
    };
    return f;
}

HamiltonianFamily constant_family(const cmat& H0, int control_dim) {
    if (H0.rows() != H0.cols() || hermiticity_residual(H0) > 1e-12 * std::max(1.0, H0.norm())) {
        throw NotHermitianError("constant_family", hermiticity_residual(H0));
    }
    if (control_dim < 1) throw std::invalid_argument("constant_family: control_dim must be positive");
    HamiltonianFamily f;
    f.name = "constant";
    f.control_dim = control_dim;
    f.hilbert_dim = static_cast<int>(H0.rows());
    f.manifold = ManifoldKind::torus;
    f.domain_lower = rvec::Zero(control_dim);
    f.domain_upper = rvec::Ones(control_dim);
    f.eval = [H0](const ControlPoint&) { return H0; };
    f.grad = [H0, control_dim](const ControlPoint&) {
        return std::vector<cmat>(static_cast<std::size_t>(control_dim), cmat::Zero(H0.rows(), H0.cols()));
    };
    return f;
}

}  // namespace dephase
