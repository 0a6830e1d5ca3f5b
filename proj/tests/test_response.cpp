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

HamiltonianFamily family(std::uint64_t seed, int dim, RandomKind kind = RandomKind::generic) {
    RandomFamilyOptions o;
    o.hilbert_dim = dim;
    o.seed = seed;
    o.kind = kind;
    return random_family(o);
}

double max_abs(const rmat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("closed form special values") {
    const GeometricTensor gt = qubit_closed_form_geometry(pi / 2.0, 0.0);
    CHECK(max_abs(response_closed_form(gt, 1.0).f - 0.5 * (gt.g + gt.omega)) < 1e-15);
    CHECK(max_abs(response_closed_form(gt, 0.0).f - gt.omega) < 1e-15);
    CHECK(max_abs(response_closed_form(gt, 0.5).f - (0.4 * gt.g + 0.8 * gt.omega)) < 1e-15);
    CHECK_THROWS_AS(response_closed_form(gt, -0.1), std::invalid_argument);
}

TEST_CASE("three routes agree on random families of dimension 2 to 8") {
    double worst = 0.0, imag = 0.0;
    for (int k = 0; k < 50; ++k) {
        const int dim = 2 + k % 7;
        const SpectralData s = projection_derivatives(family(100 + k, dim), point(0.37 * k, 1.0 + 0.11 * k));
        const GeometricTensor gt = geometric_tensor(s, true);
        for (double gamma : {0.0, 0.1, 1.0, 10.0}) {
            const DephasingSpec d = DephasingSpec::single_rate(gamma);
            const ResponseMatrix a = response_superop(s, d);
            const rmat b = response_spectral_sum(s, d).f;
            const rmat c = response_closed_form(gt, gamma).f;
            worst = std::max({worst, max_abs(a.f - b), max_abs(a.f - c), max_abs(b - c)});
            imag = std::max(imag, a.imag_residue);
            if (dim <= 4) worst = std::max(worst, max_abs(response_superop(s, d, true).f - a.f));
        }
    }
    CHECK(worst < 1e-9);
    CHECK(imag < 1e-10);
}

TEST_CASE("single-rate decomposition into metric and curvature") {
    const SpectralData s = projection_derivatives(family(7, 5), point(1.0, 2.0));
    const GeometricTensor gt = geometric_tensor(s);
    for (double gamma : {0.0, 0.3, 2.0}) {
        const ResponseMatrix r = response_spectral_sum(s, DephasingSpec::single_rate(gamma));
        const double d = 1.0 + gamma * gamma;
        CHECK(max_abs(r.sym() - gamma / d * gt.g) < 1e-9);
        CHECK(max_abs(r.antisym() - gt.omega / d) < 1e-9);
    }
    CHECK(max_abs(response_spectral_sum(s, DephasingSpec::none()).sym()) < 1e-10);
}

TEST_CASE("small and large gamma behaviour") {
    const SpectralData s = projection_derivatives(family(21, 4), point(0.5, 0.5));
    const GeometricTensor gt = geometric_tensor(s, true);
    const auto levels = static_cast<Eigen::Index>(gt.per_level.size());
    // central difference through the spectral sum, which accepts signed rates
    const double h = 1e-4;
    const rmat fp = spectral_sum(gt, rvec::Constant(levels, h)), fm = spectral_sum(gt, rvec::Constant(levels, -h));
    const rmat dsym = 0.5 * ((fp + fp.transpose()) - (fm + fm.transpose())) / (2.0 * h);
    CHECK(max_abs(dsym - gt.g) < 1e-6);
    for (double gamma : {0.01, 0.05, 0.1}) {
        const ResponseMatrix r = response_spectral_sum(s, DephasingSpec::single_rate(gamma));
        CHECK((r.antisym() - gt.omega).norm() <= 1.01 * gamma * gamma * gt.omega.norm());
    }
    double prev = 1e300;
    for (double gamma : {1e2, 1e3, 1e4}) {
        const rmat f = response_spectral_sum(s, DephasingSpec::single_rate(gamma)).f;
        const double dev = max_abs(gamma * f - gt.g);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("multi-rate spectral sum against the superoperator") {
    const SpectralData s = projection_derivatives(family(55, 3, RandomKind::isospectral), point(2.0, 1.0));
    const DephasingSpec d = DephasingSpec::level_rates({0.2, 2.0});
    const rvec rates = ground_rates(s, d);
    CHECK(rates[0] == doctest::Approx(0.2));
    CHECK(rates[1] == doctest::Approx(2.0));
    CHECK_FALSE(is_single_rate(rates));
    const rmat sum = response_spectral_sum(s, d).f;
    CHECK(max_abs(sum - response_superop(s, d).f) < 1e-9);
    CHECK(max_abs(sum - response_superop(s, d, true).f) < 1e-9);
    const GeometricTensor gt = geometric_tensor(s);
    for (double gamma : {0.2, 2.0, 1.1}) CHECK(max_abs(sum - response_closed_form(gt, gamma).f) > 1e-3);
}

TEST_CASE("constant family has no response") {
    cmat H0 = cmat::Zero(2, 2);
    H0(1, 1) = 1.0;
    const SpectralData s = projection_derivatives(constant_family(H0), point(0.1, 0.2));
    CHECK(max_abs(response_superop(s, DephasingSpec::single_rate(1.0)).f) == 0.0);
}

TEST_CASE("immunity of the antisymmetric part of the inverse") {
    const GeometricTensor gt = geometric_tensor(projection_derivatives(qubit_spherical(), point(1.3, 0.4)));
    const InverseResponseReport rep = inverse_response_check(gt, {0.0, 0.3, 1.0, 5.0, 20.0});
    CHECK(rep.compat.compatible);
    for (const auto& row : rep.rows) {
        CHECK(row.antisym_error <= 1e-8 * rep.omega_inverse.norm());
        CHECK(row.sym_error <= 1e-8 * (1.0 + row.gamma) * rep.omega_inverse.norm());
    }
    CHECK(max_abs(rep.rows.front().f_inverse - rep.omega_inverse) < 1e-14);

    rmat w = rmat::Zero(2, 2);
    w(0, 1) = 2.0;
    w(1, 0) = -2.0;
    const InverseResponseReport bad =
        inverse_response_check(GeometricTensor{point(0, 0), rmat::Identity(2, 2), w, {}}, {0.0, 0.3, 1.0, 5.0, 20.0});
    CHECK_FALSE(bad.compat.compatible);
    CHECK(bad.antisym_variation > 1e-3);

    rmat g = rmat::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = -1.0;
    rmat w1 = rmat::Zero(2, 2);
    w1(0, 1) = 1.0;
    w1(1, 0) = -1.0;
    CHECK_THROWS_AS(inverse_response_check(GeometricTensor{point(0, 0), g, w1, {}}, {1.0}), NumericalError);
}

TEST_CASE("conductance sweep scales like 1/(1 + gamma^2)") {
    const SweepTable t = conductance_sweep(qubit_spherical(), [](double g) { return DephasingSpec::single_rate(g); },
                                           {0.0, 1.0, 3.0}, ChernGrid{64, 64});
    CHECK(std::abs(t.curvature_integral + 1.0) < 1e-3);
    for (const SweepRow& r : t.rows) CHECK(std::abs(r.value - t.curvature_integral / (1.0 + r.gamma * r.gamma)) < 1e-9);
}
