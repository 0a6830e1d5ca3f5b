#include "doctest.h"

#include "dephase/models.hpp"
#include "dephase/lindblad.hpp"

#include <algorithm>
#include <cmath>

using namespace dephase;

namespace {

SpectralData diag_spec(std::initializer_list<double> e) {
    cmat H = cmat::Zero(static_cast<Eigen::Index>(e.size()), static_cast<Eigen::Index>(e.size()));
    Eigen::Index i = 0;
    for (double v : e) H(i, i) = v, ++i;
    return eigensystem(H);
}

cmat random_density(std::uint64_t seed, int n) {
    RandomFamilyOptions o;
    o.hilbert_dim = n;
    o.seed = seed;
    const cmat A = random_family(o).hamiltonian(ControlPoint::Zero(2));
    cmat rho = A * A.adjoint() + cmat::Identity(n, n);
    return rho / rho.trace();
}

std::vector<cplx> sorted(std::vector<cplx> v) {
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
        if (std::abs(a.real() - b.real()) > 1e-9) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return v;
}

}  // namespace

TEST_CASE("eigenvalues for H = diag(0,1,3), Gamma = sqrt(H/2)") {
    const SpectralData s = diag_spec({0.0, 1.0, 3.0});
    const DephasingSpec d = DephasingSpec::function("sqrt(H/2)", [](double e) { return std::sqrt(0.5 * e); });
    const cmat lam = lindblad_eigenvalues(s, d);
    CHECK(std::abs(lam(1, 0) - cplx(-0.5, -1.0)) < 1e-12);
    CHECK(std::abs(lam(2, 0) - cplx(-1.5, -3.0)) < 1e-12);
    // (sqrt(1.5) - sqrt(0.5))^2 = 2 - sqrt(3)
    CHECK(std::abs(lam(2, 1) - cplx(-(2.0 - std::sqrt(3.0)), -2.0)) < 1e-12);
    CHECK(std::abs(lam(1, 2) - std::conj(lam(2, 1))) < 1e-15);

    const rmat g = dephasing_rates(s, d);
    CHECK(g(1, 0) == doctest::Approx(0.5));
    CHECK(g(2, 0) == doctest::Approx(0.5));
    CHECK(g(2, 1) == doctest::Approx(0.1339746).epsilon(1e-6));
    CHECK(g(0, 0) == 0.0);
}

TEST_CASE("vectorized superoperator spectrum matches the closed form") {
    RandomFamilyOptions o;
    o.hilbert_dim = 4;
    o.seed = 17;
    const SpectralData s = eigensystem(random_family(o).hamiltonian(ControlPoint::Zero(2)));
    DephasingSpec d = DephasingSpec::function("0.3 H^2", [](double e) { return 0.3 * e * e; });
    d.channels.push_back(DephasingSpec::single_rate(0.7).channels.front());
    const Superoperator L = build_lindbladian(s, d);
    REQUIRE(L.vectorized().has_value());
    Eigen::ComplexEigenSolver<cmat> es(*L.vectorized());
    std::vector<cplx> numeric(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::vector<cplx> closed;
    const cmat lam = L.eigenvalues();
    for (Eigen::Index j = 0; j < lam.rows(); ++j) {
        for (Eigen::Index k = 0; k < lam.cols(); ++k) closed.push_back(lam(j, k));
    }
    numeric = sorted(numeric);
    closed = sorted(closed);
    REQUIRE(numeric.size() == closed.size());
    for (std::size_t i = 0; i < closed.size(); ++i) CHECK(std::abs(numeric[i] - closed[i]) < 1e-10);
    for (cplx v : numeric) CHECK(v.real() <= 1e-10);
}

TEST_CASE("qubit Gamma = sigma_z gives Re lambda_10 = -4") {
    const SpectralData s = eigensystem(pauli_z());
    const DephasingSpec d = DephasingSpec::function("sign", [](double e) { return e > 0 ? 1.0 : -1.0; });
    CHECK(lindblad_eigenvalues(s, d)(1, 0).real() == doctest::Approx(-4.0));
    const DephasingSpec none = DephasingSpec::none();
    CHECK(std::abs(lindblad_eigenvalues(s, none)(1, 0) - cplx(0.0, -2.0)) < 1e-15);
}

TEST_CASE("trace preservation, stationarity and conserved populations") {
    RandomFamilyOptions o;
    o.hilbert_dim = 5;
    o.seed = 3;
    const SpectralData s = eigensystem(random_family(o).hamiltonian(ControlPoint::Zero(2)));
    const Superoperator L = build_lindbladian(s, DephasingSpec::single_rate(0.8));
    const cmat rho = random_density(4, 5);
    const cmat Lr = L.apply(rho);
    CHECK(std::abs(Lr.trace()) < 1e-12);
    for (const cmat& P : s.projections) CHECK(L.apply(P).norm() < 1e-12);
    for (const cmat& P : s.projections) CHECK(std::abs((P * Lr).trace()) < 1e-12);
    // generic action agrees with the spectral-basis object
    CHECK((lindblad_apply(s.hamiltonian(), L.channels(), rho) - Lr).norm() < 1e-12);
}

TEST_CASE("restricted inverse against eigenvectors and the pseudo-inverse") {
    const SpectralData s = diag_spec({0.0, 1.0, 3.0});
    const Superoperator L = build_lindbladian(s, DephasingSpec::single_rate(0.5));
    cmat E = cmat::Zero(3, 3);
    E(2, 0) = 1.0;
    CHECK((L.invert_on_range(E) - E / L.eigenvalues()(2, 0)).norm() < 1e-14);

    RandomFamilyOptions o;
    o.hilbert_dim = 4;
    o.seed = 8;
    ControlPoint p(2);
    p << 0.2, 0.9;
    const SpectralData sd = projection_derivatives(random_family(o), p);
    const Superoperator L2 = build_lindbladian(sd, DephasingSpec::single_rate(1.3));
    for (const cmat& X : sd.dP) {
        const cmat Y = L2.invert_on_range(X);
        CHECK((L2.apply(Y) - X).norm() < 1e-9 * X.norm());
        CHECK((pseudo_inverse_solve(*L2.vectorized(), X) - Y).norm() < 1e-8);
    }
    CHECK_THROWS_AS(L.invert_on_range(s.projections[1]), NumericalError);
    CHECK(L.kernel_dimension() == 3);
}

TEST_CASE("degenerate pairs have zero rate") {
    const SpectralData s = diag_spec({0.0, 1.0, 1.0});
    REQUIRE(s.levels() == 2);
    const rmat g = dephasing_rates(s, DephasingSpec::single_rate(2.0));
    CHECK(g(1, 1) == 0.0);
    CHECK(g(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("level_rates assigns one rate per excited level") {
    const SpectralData s = diag_spec({0.0, 1.0, 2.5});
    const rmat g = dephasing_rates(s, DephasingSpec::level_rates({0.2, 2.0}));
    CHECK(g(1, 0) == doctest::Approx(0.2));
    CHECK(g(2, 0) == doctest::Approx(2.0));
}

TEST_CASE("non-finite channel values are rejected") {
    const SpectralData s = diag_spec({0.0, 1.0});
    const DephasingSpec d = DephasingSpec::function("log", [](double e) { return std::log(e); });
    CHECK_THROWS_AS(lindblad_eigenvalues(s, d), NotHermitianError);
}
