#include "doctest.h"

#include "dephase/models.hpp"

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

HamiltonianFamily family(std::uint64_t seed, int dim, RandomKind kind = RandomKind::generic) {
    RandomFamilyOptions o;
    o.hilbert_dim = dim;
    o.seed = seed;
    o.kind = kind;
    return random_family(o);
}

}  // namespace

TEST_CASE("qubit tensor matches the closed form on a grid") {
    const HamiltonianFamily f = qubit_spherical(2.5);
    DerivativeOptions fd;
    fd.method = DerivativeMethod::finite_difference;
    double worst_p = 0.0, worst_fd = 0.0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double th = pi * (i + 0.5) / 20.0, al = 2.0 * pi * (j + 0.5) / 20.0;
            const GeometricTensor ex = qubit_closed_form_geometry(th, al);
            const GeometricTensor a = geometric_tensor(projection_derivatives(f, point(th, al)));
            const GeometricTensor b = geometric_tensor(projection_derivatives(f, point(th, al), fd));
            worst_p = std::max({worst_p, (a.g - ex.g).cwiseAbs().maxCoeff(), (a.omega - ex.omega).cwiseAbs().maxCoeff()});
            worst_fd = std::max({worst_fd, (b.g - ex.g).cwiseAbs().maxCoeff(), (b.omega - ex.omega).cwiseAbs().maxCoeff()});
        }
    }
    CHECK(worst_p < 1e-8);
    CHECK(worst_fd < 1e-6);
}

TEST_CASE("closed form at the equator and determinant identity") {
    const GeometricTensor gt = qubit_closed_form_geometry(pi / 2.0, 0.0);
    CHECK(gt.g(0, 0) == doctest::Approx(0.5));
    CHECK(gt.g(1, 1) == doctest::Approx(0.5));
    CHECK(gt.omega(0, 1) == doctest::Approx(-0.5));
    for (double th : {0.2, 1.0, 2.9}) {
        const GeometricTensor t = qubit_closed_form_geometry(th, 1.0);
        const double s = std::sin(th);
        CHECK(t.g.determinant() == doctest::Approx(0.25 * s * s));
        CHECK(t.omega.determinant() == doctest::Approx(0.25 * s * s));
    }
    CHECK_THROWS_AS(qubit_closed_form_geometry(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(qubit_closed_form_geometry(pi, 0.0), std::invalid_argument);
}

TEST_CASE("connection tensor splits into metric and curvature") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const SpectralData s = projection_derivatives(family(seed, 2 + static_cast<int>(seed % 5)), point(0.4 * seed, 1.0));
        const GeometricTensor gt = geometric_tensor(s, true);
        const cmat T = connection_tensor(s);
        const cmat expected = gt.g.cast<cplx>() - I_unit * gt.omega.cast<cplx>();
        CHECK((T - expected).norm() < 1e-10);
        rmat gsum = rmat::Zero(2, 2), wsum = rmat::Zero(2, 2);
        for (const auto& lvl : gt.per_level) {
            gsum += lvl.g;
            wsum += lvl.omega;
        }
        CHECK((gsum - gt.g).norm() < 1e-12);
        CHECK((wsum - gt.omega).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<rmat> es(gt.g);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("electron-hole symmetry across the zoo") {
    const OscillatorModel osc(40);
    std::vector<SpectralData> samples{projection_derivatives(qubit_spherical(), point(1.0, 2.0)),
                                      projection_derivatives(qubit_stereographic(), point(0.3, -0.8)),
                                      projection_derivatives(osc.family(), point(0.5, 0.2)),
                                      projection_derivatives(family(3, 6), point(2.0, 5.0))};
    for (const auto& s : samples) {
        const ElectronHoleReport r = electron_hole_check(s);
        CHECK(r.metric_residual < 1e-10);
        CHECK(r.curvature_residual < 1e-10);
    }
}

TEST_CASE("compatibility of the model zoo and of a synthetic counterexample") {
    const CompatibilityReport q = compatibility(geometric_tensor(projection_derivatives(qubit_spherical(), point(1.1, 0.3))));
    CHECK(q.compatible);
    CHECK(q.residual < 1e-10);
    CHECK(q.det_gap < 1e-12);
    CHECK(q.J_residual < 1e-10);

    const OscillatorModel osc(60);
    const GeometricTensor o = geometric_tensor(projection_derivatives(osc.family(), point(0.4, -0.3)));
    CHECK((o.g - rmat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(std::abs(o.omega(0, 1)) - 1.0) < 1e-8);
    CHECK(compatibility(o).compatible);

    rmat w = rmat::Zero(2, 2);
    w(0, 1) = 2.0;
    w(1, 0) = -2.0;
    const CompatibilityReport bad = compatibility(rmat::Identity(2, 2), w);
    CHECK_FALSE(bad.compatible);
    CHECK(bad.det_gap == doctest::Approx(3.0));
}

TEST_CASE("real-symmetric families have zero curvature and fail compatibility") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SpectralData s = projection_derivatives(family(seed, 4, RandomKind::real_symmetric), point(1.0, 2.0));
        const GeometricTensor gt = geometric_tensor(s);
        CHECK(gt.omega.cwiseAbs().maxCoeff() < 1e-10);
        CHECK_THROWS_AS(compatibility(gt), NumericalError);
    }
}

TEST_CASE("holomorphic charts have vanishing holomorphicity residual") {
    for (auto [x, y] : {std::pair{0.3, -0.2}, std::pair{1.5, 0.7}}) {
        const SpectralData s = projection_derivatives(qubit_stereographic(), point(x, y));
        CHECK(holomorphicity_residual(s, cplx(0.0, 1.0)) < 1e-8);
        CHECK(holomorphicity_residual(s, cplx(0.0, -1.0)) > 1e-2);
        CHECK(compatibility(geometric_tensor(s)).residual < 1e-6);
    }
    const OscillatorModel osc(60);
    const SpectralData so = projection_derivatives(osc.family(), point(0.5, -0.5));
    CHECK(holomorphicity_residual(so, cplx(0.0, 1.0)) < 1e-8);
    CHECK_THROWS_AS(holomorphicity_residual(so, cplx(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("Chern numbers on closed charts") {
    const ChernResult q = chern_number(qubit_spherical(), default_chern_grid(ManifoldKind::sphere), true);
    CHECK(q.chern == -1);
    CHECK(q.deviation < 1e-6);
    REQUIRE(q.quadrature_value.has_value());
    CHECK(std::abs(*q.quadrature_value + 1.0) < 1e-2);

    // grid stability between N and 2N
    const ChernResult q2 = chern_number(qubit_spherical(), ChernGrid{64, 128});
    CHECK(std::abs(q2.value - q.value) < 1e-6);

    cmat H0 = cmat::Zero(3, 3);
    H0.diagonal() << 0.0, 1.0, 2.0;
    const ChernResult c = chern_number(constant_family(H0), ChernGrid{});
    CHECK(c.chern == 0);
    CHECK(c.deviation < 1e-12);

    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const ChernResult r = chern_number(family(seed, 3), ChernGrid{});
        CHECK(r.deviation < 1e-6);
    }
    CHECK_THROWS_AS(chern_number(qubit_stereographic(), ChernGrid{}), std::invalid_argument);
}

TEST_CASE("Chern number flips with the chart orientation") {
    HamiltonianFamily f = qubit_spherical();
    const auto eval = f.eval;
    f.eval = [eval](const ControlPoint& p) { return eval(point(p[0], 2.0 * pi - p[1])); };
    f.grad = nullptr;
    CHECK(chern_number(f, default_chern_grid(ManifoldKind::sphere)).chern == 1);
}
