// acceptance.cpp

#include "dephase/acceptance.hpp"

#include "dephase/dynamics.hpp"
#include "dephase/models.hpp"
#include "dephase/response.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace dephase {

namespace {

constexpr double pi = std::numbers::pi;

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

double max_abs(const rmat& m) { return m.cwiseAbs().maxCoeff(); }

ControlPoint random_point(CounterRng& rng, int m, double lo, double hi) {
    ControlPoint p(m);
    for (int i = 0; i < m; ++i) {
        const double u = static_cast<double>(rng() >> 11) / 9007199254740992.0;
        p[i] = lo + (hi - lo) * u;
    }
    return p;
}

HamiltonianFamily seeded_family(std::uint64_t seed, int dim, int m, RandomKind kind = RandomKind::generic) {
    RandomFamilyOptions o;
    o.hilbert_dim = dim;
    o.control_dim = m;
    o.seed = seed;
    o.kind = kind;
    return random_family(o);
}

struct Outcome {
    bool passed{true};
    std::ostringstream detail;

    void require(bool ok) { passed = passed && ok; }
};

const std::vector<double> probe_gammas{0.0, 0.1, 0.5, 1.0, 3.0, 10.0};
const std::vector<double> immunity_gammas{0.0, 0.3, 1.0, 5.0, 20.0};

// 1 -----------------------------------------------------------------------
void qubit_geometry(Outcome& out, const AcceptanceOptions&) {
    const HamiltonianFamily fam = qubit_spherical();
    DerivativeOptions fd;
    fd.method = DerivativeMethod::finite_difference;
    double err_pert = 0.0, err_fd = 0.0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            const double th = pi * (i + 0.5) / 20.0, al = 2.0 * pi * (j + 0.5) / 20.0;
            ControlPoint p(2);
            p << th, al;
            const GeometricTensor exact = qubit_closed_form_geometry(th, al);
            const GeometricTensor a = geometric_tensor(projection_derivatives(fam, p));
            const GeometricTensor b = geometric_tensor(projection_derivatives(fam, p, fd));
            err_pert = std::max({err_pert, max_abs(a.g - exact.g), max_abs(a.omega - exact.omega)});
            err_fd = std::max({err_fd, max_abs(b.g - exact.g), max_abs(b.omega - exact.omega)});
        }
    }
    out.require(err_pert <= 1e-8 && err_fd <= 1e-6);
    out.detail << "perturbative " << sci(err_pert) << " <= 1e-8, finite-difference " << sci(err_fd) << " <= 1e-6";
}

// 2 -----------------------------------------------------------------------
void two_level(Outcome& out, const AcceptanceOptions& opts) {
    double err = 0.0, err_vec = 0.0;
    for (int k = 0; k < 50; ++k) {
        const HamiltonianFamily fam = seeded_family(opts.seed + 1000 + k, 2, 2);
        CounterRng rng(opts.seed, 2000 + k);
        const SpectralData spec = projection_derivatives(fam, random_point(rng, 2, 0.0, 2.0 * pi));
        const GeometricTensor gt = geometric_tensor(spec);
        for (double gamma : probe_gammas) {
            const DephasingSpec deph = DephasingSpec::single_rate(gamma);
            const rmat closed = response_closed_form(gt, gamma).f;
            err = std::max(err, max_abs(response_superop(spec, deph).f - closed));
            err_vec = std::max(err_vec, max_abs(response_superop(spec, deph, true).f - closed));
        }
    }
    out.require(err <= 1e-9 && err_vec <= 1e-9);
    out.detail << "50 families x 6 rates: superop vs closed form " << sci(err) << ", vectorized " << sci(err_vec)
               << " <= 1e-9";
}

// 3 -----------------------------------------------------------------------
void multi_level_single_rate(Outcome& out, const AcceptanceOptions& opts) {
    double rate_err = 0.0, route_err = 0.0;
    bool gate = true;
    for (int k = 0; k < 10; ++k) {
        const HamiltonianFamily fam = seeded_family(opts.seed + 3000 + k, 5, 2);
        CounterRng rng(opts.seed, 4000 + k);
        const SpectralData spec = projection_derivatives(fam, random_point(rng, 2, 0.0, 2.0 * pi));
        const GeometricTensor gt = geometric_tensor(spec, true);
        for (double gamma : probe_gammas) {
            const DephasingSpec deph = DephasingSpec::single_rate(gamma);
            const rvec rates = ground_rates(spec, deph);
            rate_err = std::max(rate_err, (rates.array() - gamma).abs().maxCoeff());
            gate = gate && is_single_rate(rates);
            const rmat a = response_superop(spec, deph).f;
            const rmat v = response_superop(spec, deph, true).f;
            const rmat b = response_spectral_sum(spec, deph).f;
            const rmat c = response_closed_form(gt, gamma).f;
            route_err = std::max({route_err, max_abs(a - b), max_abs(a - c), max_abs(b - c), max_abs(v - a)});
        }
    }
    out.require(rate_err <= 1e-10 && gate && route_err <= 1e-9);
    out.detail << "10 five-level families: rate spread " << sci(rate_err) << " <= 1e-10, pairwise routes "
               << sci(route_err) << " <= 1e-9";
}

// 4 -----------------------------------------------------------------------
void multi_rate(Outcome& out, const AcceptanceOptions& opts) {
    const HamiltonianFamily fam = seeded_family(opts.seed + 5000, 3, 2, RandomKind::isospectral);
    const DephasingSpec deph = DephasingSpec::level_rates({0.2, 2.0});
    double route_err = 0.0, naive_gap = std::numeric_limits<double>::infinity(), rate_err = 0.0;
    for (int k = 0; k < 5; ++k) {
        CounterRng rng(opts.seed, 5100 + k);
        const SpectralData spec = projection_derivatives(fam, random_point(rng, 2, 0.0, 2.0 * pi));
        const rvec rates = ground_rates(spec, deph);
        rate_err = std::max({rate_err, std::abs(rates[0] - 0.2), std::abs(rates[1] - 2.0)});
        const rmat sum = response_spectral_sum(spec, deph).f;
        route_err = std::max(route_err, max_abs(sum - response_superop(spec, deph).f));
        const GeometricTensor gt = geometric_tensor(spec);
        for (double gamma : {0.2, 2.0, 1.1}) {
            naive_gap = std::min(naive_gap, max_abs(sum - response_closed_form(gt, gamma).f));
        }
    }
    out.require(rate_err <= 1e-10 && route_err <= 1e-9 && naive_gap > 1e-3);
    out.detail << "spectral sum vs superop " << sci(route_err) << " <= 1e-9, single-rate closed form off by "
               << sci(naive_gap) << " > 1e-3";
}

// 5 -----------------------------------------------------------------------
double immunity_error(const GeometricTensor& gt) {
    const InverseResponseReport rep = inverse_response_check(gt, immunity_gammas);
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, row.antisym_error / rep.omega_inverse.norm());
    return worst;
}

void immunity(Outcome& out, const AcceptanceOptions&) {
    const HamiltonianFamily qubit = qubit_spherical();
    double qubit_err = 0.0;
    for (double th : {0.4, pi / 2.0, 2.3}) {
        ControlPoint p(2);
        p << th, 0.7;
        qubit_err = std::max(qubit_err, immunity_error(geometric_tensor(projection_derivatives(qubit, p))));
    }
    double landau_err = 0.0;
    for (cplx tau : {cplx(0.0, 1.0), cplx(0.3, 0.8)}) {
        LandauModel lm;
        lm.tau = tau;
        const StateFamily fam = landau_family(lm);
        for (auto [a, b] : {std::pair{0.25, 0.6}, std::pair{0.8, 0.1}}) {
            ControlPoint p(2);
            p << a, b;
            landau_err = std::max(landau_err, immunity_error(geometric_tensor(bundle_spectral_data(fam, p, 1e-4))));
        }
    }
    rmat g = rmat::Identity(2, 2), w = rmat::Zero(2, 2);
    w(0, 1) = 2.0;
    w(1, 0) = -2.0;
    GeometricTensor synthetic{ControlPoint::Zero(2), g, w, {}};
    const InverseResponseReport control = inverse_response_check(synthetic, immunity_gammas);
    out.require(qubit_err <= 1e-8 && landau_err <= 1e-8 && control.antisym_variation > 1e-3 &&
                !control.compat.compatible);
    out.detail << "qubit " << sci(qubit_err) << ", Landau " << sci(landau_err)
               << " <= 1e-8 relative; incompatible control varies by " << sci(control.antisym_variation)
               << " > 1e-3";
}

// 6 -----------------------------------------------------------------------
void chern(Outcome& out, const AcceptanceOptions&) {
    const HamiltonianFamily qubit = qubit_spherical();
    const ChernResult q = chern_number(qubit, default_chern_grid(ManifoldKind::sphere));
    out.require(std::abs(q.chern) == 1 && q.deviation <= 1e-6);
    out.detail << "qubit c=" << q.chern << " dev " << sci(q.deviation);
    for (cplx tau : {cplx(0.0, 1.0), cplx(0.3, 0.8)}) {
        LandauModel lm;
        lm.tau = tau;
        const ChernResult l = chern_number(landau_family(lm), default_chern_grid(ManifoldKind::torus));
        out.require(std::abs(l.chern) == 1 && l.deviation <= 1e-6);
        out.detail << "; Landau tau=" << tau.real() << "+" << tau.imag() << "i c=" << l.chern << " dev "
                   << sci(l.deviation);
    }
    cmat H0 = cmat::Zero(2, 2);
    H0(1, 1) = 1.0;
    const ChernResult c = chern_number(constant_family(H0), default_chern_grid(ManifoldKind::torus));
    out.require(c.chern == 0 && c.deviation <= 1e-6);
    out.detail << "; constant c=" << c.chern << " dev " << sci(c.deviation);
}

// 7 -----------------------------------------------------------------------
void degradation(Outcome& out, const AcceptanceOptions&) {
    LandauModel lm;
    const StateFamily fam = landau_family(lm);
    const ChernGrid grid = default_chern_grid(ManifoldKind::torus);
    const int c = chern_number(fam, grid).chern;
    const SweepTable t = conductance_sweep(fam, {0.0, 1.0, 3.0}, grid);
    double worst = 0.0;
    out.detail << "c=" << c;
    for (const SweepRow& row : t.rows) {
        const double expected = c / (1.0 + row.gamma * row.gamma);
        worst = std::max(worst, std::abs(row.value - expected));
        out.detail << ", gamma=" << row.gamma << ": " << row.value;
    }
    out.require(c != 0 && worst <= 1e-3);
    out.detail << "; max deviation from c/(1+gamma^2) " << sci(worst) << " <= 1e-3";
}

// 8 -----------------------------------------------------------------------
void dynamics_extraction(Outcome& out, const AcceptanceOptions&) {
    const HamiltonianFamily fam = qubit_spherical();
    const double theta0 = 1.0;
    Protocol protocol;
    protocol.path = [theta0](double s) {
        ControlPoint p(2);
        p << theta0, 2.0 * pi * s;
        return p;
    };
    protocol.tangent = [](double) {
        ControlPoint d(2);
        d << 0.0, 2.0 * pi;
        return d;
    };
    ExtractionOptions eo;
    eo.driven = 1;
    const ExtractionReport rep =
        extract_response(fam, DephasingSpec::single_rate(1.0), protocol, {1e-2, 3e-3, 1e-3}, eo);
    // independent reference: (g + omega)/2 from the closed-form geometry
    const GeometricTensor exact = qubit_closed_form_geometry(theta0, 0.0);
    const rvec ref = (0.5 * (exact.g + exact.omega)).col(1);
    double closed_err = 0.0, last = 0.0;
    for (const ExtractionRun& r : rep.runs) {
        const double e = (r.measured - ref).norm() / ref.norm();
        out.detail << "eps=" << r.epsilon << ": " << sci(e) << "; ";
        if (r.epsilon == 1e-3) last = e;
        closed_err = std::max(closed_err, (r.predicted - ref).norm() / ref.norm());
    }
    out.require(last <= 0.01 && rep.error_decreasing && closed_err <= 1e-8);
    out.detail << "relative error at eps=1e-3 " << sci(last) << " <= 1e-2, decreasing "
               << (rep.error_decreasing ? "yes" : "no");
}

// 9 -----------------------------------------------------------------------
void sde(Outcome& out, const AcceptanceOptions& opts) {
    SdeConfig cfg;
    const cmat sz = pauli_z();
    cfg.h0 = [sz](double) { return sz; };
    cfg.bias = 1.0;
    cfg.variance = 0.2;
    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    cfg.n_traj = 10000;
    cfg.seed = opts.seed;
    cfg.record_every = 10;
    cmat rho0 = cmat::Constant(2, 2, 0.5);
    const SdeResult res = evolve_sde_ensemble(cfg, rho0);

    MasterOptions mo;
    mo.t_final = cfg.t_final;
    mo.dt = cfg.dt;
    mo.record_every = static_cast<std::size_t>(cfg.record_every);
    const Trajectory lind = integrate_master(sde_mean_generator(cfg), rho0, mo);
    double dist = 0.0;
    for (std::size_t i = 0; i < res.mean.size() && i < lind.states.size(); ++i) {
        dist = std::max(dist, trace_distance(res.mean[i], lind.states[i]));
    }
    const double coherence = std::abs(res.mean.back()(0, 1));
    const double expected = 0.5 * std::exp(-0.4);
    const bool aligned = res.mean.size() == lind.states.size();
    out.require(aligned && std::abs(coherence - expected) <= 0.02 && dist <= 0.05);
    out.detail << "|rho_01(1)| = " << coherence << " vs " << expected << " (tol 0.02), max trace distance "
               << sci(dist) << " <= 0.05";
}

// 10 ----------------------------------------------------------------------
struct PropTally {
    double psd{0};          // max(-min eig(g) / ||g||, 0)
    double electron_hole{0};
    double real_omega{0};
};

void tally(PropTally& t, const SpectralData& spec) {
    const GeometricTensor gt = geometric_tensor(spec);
    Eigen::SelfAdjointEigenSolver<rmat> es(gt.g, Eigen::EigenvaluesOnly);
    const double gn = std::max(gt.g.norm(), 1e-300);
    t.psd = std::max(t.psd, -es.eigenvalues().minCoeff() / gn);
    const ElectronHoleReport eh = electron_hole_check(spec);
    t.electron_hole = std::max({t.electron_hole, eh.metric_residual, eh.curvature_residual});
}

void proposition_suite(Outcome& out, const AcceptanceOptions& opts) {
    PropTally t;
    {
        const HamiltonianFamily q = qubit_spherical();
        const HamiltonianFamily s = qubit_stereographic();
        for (double a : {0.3, 1.1, 2.5}) {
            ControlPoint p(2);
            p << a, 2.0 * a;
            tally(t, projection_derivatives(q, p));
            p << a - 1.0, 0.5 * a;
            tally(t, projection_derivatives(s, p));
        }
    }
    {
        const OscillatorModel osc(60);
        const HamiltonianFamily fam = osc.family();
        for (auto [z, m] : {std::pair{0.0, 0.0}, std::pair{1.0, -0.5}}) {
            ControlPoint p(2);
            p << z, m;
            tally(t, projection_derivatives(fam, p));
        }
    }
    {
        LandauModel lm;
        lm.grid = 64;
        ControlPoint p(2);
        p << 0.3, 0.7;
        tally(t, bundle_spectral_data(landau_family(lm), p, 1e-4));
    }
    for (int k = 0; k < 20; ++k) {
        const int dim = 2 + k % 7;
        const HamiltonianFamily fam = seeded_family(opts.seed + 6000 + k, dim, 2);
        CounterRng rng(opts.seed, 6100 + k);
        tally(t, projection_derivatives(fam, random_point(rng, 2, 0.0, 2.0 * pi)));
    }
    for (int k = 0; k < 5; ++k) {
        const HamiltonianFamily fam = seeded_family(opts.seed + 6200 + k, 3 + k, 2, RandomKind::real_symmetric);
        CounterRng rng(opts.seed, 6300 + k);
        const SpectralData spec = projection_derivatives(fam, random_point(rng, 2, 0.0, 2.0 * pi));
        tally(t, spec);
        t.real_omega = std::max(t.real_omega, max_abs(geometric_tensor(spec).omega));
    }

    // d omega = 0 for the three-parameter qubit, by central differences at h and h/2
    const HamiltonianFamily cart = qubit_cartesian();
    ControlPoint x0(3);
    x0 << 0.3, -0.5, 0.8;
    auto omega_at = [&](const ControlPoint& p) { return geometric_tensor(projection_derivatives(cart, p)).omega; };
    auto exterior = [&](double h) {
        auto d = [&](int mu, int a, int b) {
            ControlPoint pp = x0, pm = x0;
            pp[mu] += h;
            pm[mu] -= h;
            return (omega_at(pp)(a, b) - omega_at(pm)(a, b)) / (2.0 * h);
        };
        return std::abs(d(0, 1, 2) + d(1, 2, 0) + d(2, 0, 1));
    };
    const double d1 = exterior(1e-2), d2 = exterior(5e-3);
    const bool second_order = d2 <= 1e-10 || d1 / d2 >= 3.0;

    out.require(t.psd <= 1e-10 && t.electron_hole <= 1e-10 && t.real_omega <= 1e-10 && second_order);
    out.detail << "PSD violation " << sci(t.psd) << ", electron-hole " << sci(t.electron_hole)
               << ", real-symmetric omega " << sci(t.real_omega) << " (all <= 1e-10); d omega " << sci(d1) << " -> "
               << sci(d2) << " at h -> h/2";
}

// 11 ----------------------------------------------------------------------
void integrator(Outcome& out, const AcceptanceOptions&) {
    const cmat H = pauli_z();
    const cmat G = std::sqrt(0.2) * pauli_z();
    GeneratorFn gen = [H, G](double) { return Generator{H, {G}}; };
    const cmat rho0 = cmat::Constant(2, 2, 0.5);
    const double T = 2.0;
    const cplx exact = 0.5 * std::exp(cplx(-0.8 * T, -2.0 * T));
    std::vector<double> errs;
    double drift = 0.0;
    for (double dt : {0.04, 0.02, 0.01}) {
        MasterOptions mo;
        mo.t_final = T;
        mo.dt = dt;
        const Trajectory tr = integrate_master(gen, rho0, mo);
        const cmat& rho = tr.states.back();
        errs.push_back(std::max(std::abs(rho(0, 1) - exact), std::abs(rho(0, 0) - 0.5)));
        drift = std::max(drift, tr.trace_drift);
    }
    const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
    out.require(std::min(o1, o2) >= 3.5 && drift <= 1e-9);
    out.detail << "measured order " << o1 << ", " << o2 << " >= 3.5; trace drift " << sci(drift) << " <= 1e-9";
}

struct Entry {
    const char* name;
    double budget;
    void (*run)(Outcome&, const AcceptanceOptions&);
};

const Entry table[acceptance_criteria_count] = {
    {"qubit geometry vs closed form", 5.0, qubit_geometry},
    {"two-level response vs closed form", 10.0, two_level},
    {"multi-level single rate, three routes", 10.0, multi_level_single_rate},
    {"multi-rate spectral sum", 5.0, multi_rate},
    {"immunity of antisym(f^-1)", 30.0, immunity},
    {"Chern numbers", 120.0, chern},
    {"dephasing degradation of transport", 120.0, degradation},
    {"dynamics extraction", 60.0, dynamics_extraction},
    {"stochastic ensemble vs Lindblad", 30.0, sde},
    {"geometric tensor properties", 30.0, proposition_suite},
    {"RK4 integrator quality", 10.0, integrator},
};

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opts) {
    if (id < 1 || id > acceptance_criteria_count) {
        throw std::invalid_argument("run_criterion: no criterion " + std::to_string(id));
    }
    const Entry& e = table[id - 1];
    CriterionResult r;
    r.id = id;
    r.name = e.name;
    r.budget_seconds = e.budget;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        e.run(out, opts);
    } catch (const std::exception& ex) {
        out.passed = false;
        out.detail << " error: " << ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.detail = out.detail.str();
    r.passed = out.passed;
    if (opts.enforce_budget && r.seconds > r.budget_seconds) {
        r.passed = false;
        r.detail += "; over runtime budget";
    }
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    std::vector<CriterionResult> results;
    for (int id = 1; id <= acceptance_criteria_count; ++id) {
        if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end()) continue;
        results.push_back(run_criterion(id, opts));
    }
    return results;
}

std::string format_line(const CriterionResult& r) {
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %2d  %-40s (%.1f s / %.0f s)  ", r.passed ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.seconds, r.budget_seconds);
    return head + r.detail;
}

}  // namespace dephase
