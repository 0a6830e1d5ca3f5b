#include "doctest.h"

#include "dephase/models.hpp"
#include "dephase/response.hpp"

#include <cmath>
#include <numbers>

using namespace dephase;

namespace {

constexpr double pi = std::numbers::pi;

ControlPoint point(double a, double b) {
    ControlPoint p(2);
    p << a, b;
    return p;
}

LandauModel small_landau(cplx tau = {0.0, 1.0}) {
    LandauModel m;
    m.tau = tau;
    m.grid = 64;
    return m;
}

}  // namespace

TEST_CASE("qubit ground projection is (1 - n.sigma)/2") {
    const HamiltonianFamily f = qubit_spherical();
    for (double th : {0.1, 1.0, 2.0, 3.0}) {
        for (double al : {0.0, 2.5, 5.0}) {
            const cmat nsig = f.hamiltonian(point(th, al));
            const cmat P = eigensystem(nsig).ground();
            CHECK((2.0 * P - (cmat::Identity(2, 2) - nsig)).norm() < 1e-12);
        }
    }
}

TEST_CASE("stereographic chart covers the sphere minus the north pole") {
    const HamiltonianFamily f = qubit_stereographic();
    const cmat H = f.hamiltonian(point(0.0, 0.0));
    CHECK((H + pauli_z()).norm() < 1e-15);
    const cmat far = f.hamiltonian(point(1e4, 0.0));
    CHECK((far - pauli_z()).norm() < 1e-3);
    DerivativeOptions fd;
    fd.method = DerivativeMethod::finite_difference;
    const SpectralData a = projection_derivatives(f, point(0.4, 0.9));
    const SpectralData b = projection_derivatives(f, point(0.4, 0.9), fd);
    for (std::size_t mu = 0; mu < 2; ++mu) CHECK((a.forces[mu] - b.forces[mu]).norm() < 1e-8);
}

TEST_CASE("truncated oscillator algebra") {
    const OscillatorModel m(30);
    const cmat comm = commutator(m.position(), m.momentum());
    CHECK((comm.topLeftCorner(29, 29) - I_unit * cmat::Identity(29, 29)).norm() < 1e-12);
    CHECK(std::abs(comm(29, 29) - cplx(0.0, -29.0)) < 1e-12);
}

TEST_CASE("oscillator ground state is annihilated by the shifted lowering operator") {
    const OscillatorModel m60(60);
    CHECK(oscillator_annihilator_residual(m60, 0.0, 0.0) < 1e-10);
    CHECK(oscillator_annihilator_residual(m60, 1.0, 1.0) < 1e-8);
    const OscillatorModel m8(8);
    CHECK(oscillator_annihilator_residual(m8, 1.0, 1.0) > 1e-3);
    CHECK_THROWS_AS(oscillator_annihilator_residual(m8, 1.5, 0.0), std::invalid_argument);

    const cmat P = eigensystem(m60.family().hamiltonian(point(1.0, 1.0))).ground();
    CHECK((P - m60.coherent_projector(1.0, 1.0)).norm() < 1e-8);
}

TEST_CASE("oscillator geometry is flat and compatible") {
    const OscillatorModel m(60);
    DerivativeOptions fd;
    fd.method = DerivativeMethod::finite_difference;
    for (auto [z, mu] : {std::pair{0.0, 0.0}, std::pair{0.7, -0.4}}) {
        const GeometricTensor a = geometric_tensor(projection_derivatives(m.family(), point(z, mu)));
        const GeometricTensor b = geometric_tensor(projection_derivatives(m.family(), point(z, mu), fd));
        CHECK((a.g - rmat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(std::abs(a.omega(0, 1)) - 1.0) < 1e-8);
        CHECK((b.g - rmat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(std::abs(std::abs(b.omega(0, 1)) - 1.0) < 1e-6);
    }
}

TEST_CASE("Landau ground state: normalization, boundary conditions, annihilator") {
    for (cplx tau : {cplx(0.0, 1.0), cplx(0.3, 0.8)}) {
        LandauModel m;
        m.tau = tau;
        const LandauState st = landau_ground_state(m, 0.0, 0.0);
        CHECK(std::abs(st.norm - 1.0) < 1e-8);
        const LandauState shifted = landau_ground_state(m, 0.37, 0.81);
        CHECK(std::abs(shifted.norm - 1.0) < 1e-8);
        const LandauBoundaryReport b = landau_boundary_residual(m, 0.37, 0.81);
        CHECK(b.periodic_x < 1e-10);
        CHECK(b.magnetic_y < 1e-10);
        CHECK(landau_annihilator_residual(m, 0.37, 0.81) < 1e-6);
    }
    // grid doubling leaves the quadrature unchanged
    LandauModel coarse = small_landau(), fine = small_landau();
    fine.grid = 128;
    CHECK(std::abs(landau_ground_state(coarse, 0.2, 0.4).norm - landau_ground_state(fine, 0.2, 0.4).norm) < 1e-12);
    // grid sample agrees with the pointwise theta sum
    const LandauState st = landau_ground_state(coarse, 0.2, 0.4);
    CHECK(std::abs(st.values(5, 9) - landau_amplitude(coarse, 0.2, 0.4, 5.0 / 64, 9.0 / 64)) < 1e-12);
}

TEST_CASE("Landau parameter guards") {
    LandauModel m;
    m.tau = cplx(0.0, -1.0);
    CHECK_THROWS_AS(landau_ground_state(m, 0.0, 0.0), std::invalid_argument);
    m.tau = cplx(0.0, 1.0);
    m.theta_cutoff = 2;
    CHECK_THROWS_AS(landau_ground_state(m, 0.0, 0.0), NumericalError);
    m.theta_cutoff = 10;
    m.flux = 2;
    CHECK_THROWS_AS(landau_ground_state(m, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("Landau bundle is holomorphic in phi1 - phi2 / tau") {
    for (cplx tau : {cplx(0.0, 1.0), cplx(0.3, 0.8)}) {
        const StateFamily f = landau_family(small_landau(tau));
        const SpectralData s = bundle_spectral_data(f, point(0.3, 0.6), 1e-4);
        CHECK(holomorphicity_residual(s, -1.0 / tau) < 1e-8);
        CHECK(compatibility(geometric_tensor(s)).residual < 1e-6);
    }
}

TEST_CASE("Landau geometry field is uniform and compatible") {
    for (cplx tau : {cplx(0.0, 1.0), cplx(0.3, 0.8)}) {
        const LandauGeometryField field = landau_geometry(small_landau(tau), ChernGrid{4, 4});
        CHECK(field.max_compat_residual < 1e-6);
        CHECK(field.max_det_gap < 1e-6);
        CHECK(field.omega_variation < 1e-4);
        CHECK(std::abs(std::abs(field.omega_total) - 2.0 * pi) < 1e-6);
    }
}

TEST_CASE("Landau Chern number and conductance sweep") {
    const StateFamily f = landau_family(small_landau());
    const ChernResult c = chern_number(f, ChernGrid{});
    CHECK(std::abs(c.chern) == 1);
    CHECK(c.deviation < 1e-6);
    const SweepTable t = conductance_sweep(f, {0.0, 1.0, 3.0}, ChernGrid{6, 6});
    CHECK(std::abs(t.rows[0].value - c.chern) < 1e-3);
    CHECK(std::abs(t.rows[1].value - 0.5 * c.chern) < 1e-3);
    CHECK(std::abs(t.rows[2].value - 0.1 * c.chern) < 1e-3);
}

TEST_CASE("random families are Hermitian and honour their kind") {
    for (RandomKind kind : {RandomKind::generic, RandomKind::real_symmetric, RandomKind::isospectral}) {
        RandomFamilyOptions o;
        o.hilbert_dim = 6;
        o.control_dim = 3;
        o.seed = 31;
        o.kind = kind;
        const HamiltonianFamily f = random_family(o);
        ControlPoint p(3);
        p << 0.4, 2.2, -1.0;
        const cmat H = f.hamiltonian(p);
        CHECK(hermiticity_residual(H) < 1e-13);
        if (kind == RandomKind::real_symmetric) CHECK(H.imag().norm() == 0.0);
        CHECK(eigensystem(H).gap() > 0.1);
        // analytic gradient against central differences
        HamiltonianFamily g = f;
        g.grad = nullptr;
        const auto a = f.forces(p), b = g.forces(p);
        for (std::size_t mu = 0; mu < 3; ++mu) CHECK((a[mu] - b[mu]).norm() < 1e-8);
    }
    RandomFamilyOptions a, b;
    a.seed = b.seed = 3;
    CHECK((random_family(a).hamiltonian(point(1, 1)) - random_family(b).hamiltonian(point(1, 1))).norm() == 0.0);
}
