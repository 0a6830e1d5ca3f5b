// dynamics.cpp

#include "dephase/dynamics.hpp"

#include "dephase/parallel.hpp"
#include "dephase/response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dephase {

namespace {

double min_hermitian_eigenvalue(const cmat& rho) {
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// In-place generator action into `out`; scratch avoids per-step allocation.
struct GeneratorAction {
    cmat scratch;
    cmat scratch2;

    void operator()(const Generator& g, const cmat& rho, cmat& out) {
        out.noalias() = g.hamiltonian * rho;
        out.noalias() -= rho * g.hamiltonian;
        out *= -I_unit;
        for (const cmat& G : g.jumps) {
            scratch.noalias() = G * rho;
            out.noalias() += 2.0 * scratch * G.adjoint();
            scratch2.noalias() = G.adjoint() * G;
            out.noalias() -= scratch2 * rho;
            out.noalias() -= rho * scratch2;
        }
    }
};

}  // namespace

double generator_rate(const GeneratorFn& gen, double t_final) {
    double rate = 0.0;
    constexpr int samples = 16;
    for (int i = 0; i <= samples; ++i) {
        const Generator g = gen(t_final * i / samples);
        double r = operator_norm(g.hamiltonian);
        for (const cmat& G : g.jumps) {
            const double n = operator_norm(G);
            r += n * n;
        }
        rate = std::max(rate, r);
    }
    return rate;
}

Trajectory integrate_master(const GeneratorFn& gen, const cmat& rho0, const MasterOptions& opts) {
    return integrate_master(gen, rho0, opts, nullptr, 0);
}

Trajectory integrate_master(const GeneratorFn& gen, const cmat& rho0, const MasterOptions& opts,
                            const std::function<void(double, const cmat&)>& observer, std::size_t observe_every) {
    if (rho0.rows() != rho0.cols()) {
        throw std::invalid_argument("integrate_master: initial state must be square");
    }
    if (!(opts.t_final > 0.0)) {
        throw std::invalid_argument("integrate_master: t_final must be positive");
    }
    Trajectory tr;
    const double rate = generator_rate(gen, opts.t_final);
    double dt = opts.dt;
    if (dt <= 0.0) {
        dt = rate > 0.0 ? opts.dt_rule / rate : opts.t_final / 16.0;
    } else if (rate * dt > opts.dt_rule) {
        tr.warnings.push_back("step size above rule: (||H|| + sum ||G||^2) dt = " + std::to_string(rate * dt));
    }
    const auto steps = static_cast<std::size_t>(std::ceil(opts.t_final / dt - 1e-9));
    dt = opts.t_final / static_cast<double>(steps);
    tr.dt = dt;
    tr.steps = steps;

    const cplx trace0 = rho0.trace();
    auto record = [&](double t, const cmat& rho) {
        tr.times.push_back(t);
        tr.states.push_back(rho);
        tr.hermiticity = std::max(tr.hermiticity, hermiticity_residual(rho));
        const double ev = min_hermitian_eigenvalue(rho);
        tr.min_eigenvalue = tr.states.size() == 1 ? ev : std::min(tr.min_eigenvalue, ev);
    };

    const Eigen::Index n = rho0.rows();
    cmat rho = rho0, k1(n, n), k2(n, n), k3(n, n), k4(n, n), stage(n, n);
    GeneratorAction act;
    record(0.0, rho);
    if (observer) observer(0.0, rho);
    Generator g_start = gen(0.0);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        const Generator g_mid = gen(t + 0.5 * dt);
        Generator g_end = gen(t + dt);
        act(g_start, rho, k1);
        stage = rho + 0.5 * dt * k1;
        act(g_mid, stage, k2);
        stage = rho + 0.5 * dt * k2;
        act(g_mid, stage, k3);
        stage = rho + dt * k3;
        act(g_end, stage, k4);
        rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        g_start = std::move(g_end);

        tr.trace_drift = std::max(tr.trace_drift, std::abs(rho.trace() - trace0));
        const double t_next = static_cast<double>(s + 1) * dt;
        if (observer && observe_every > 0 && (s + 1) % observe_every == 0) observer(t_next, rho);
        if ((opts.record_every > 0 && (s + 1) % opts.record_every == 0) || s + 1 == steps) {
            record(t_next, rho);
        }
    }
    if (tr.trace_drift > opts.trace_drift_limit) {
        throw NumericalError("integrate_master: trace drift " + std::to_string(tr.trace_drift) +
                             " exceeds limit; reduce the step size");
    }
    if (tr.trace_drift > 1e-9) {
        tr.warnings.push_back("trace drift " + std::to_string(tr.trace_drift) + " above 1e-9");
    }
    return tr;
}

// ------------------------------ protocols -----------------------------------

double Protocol::progress(double u) const {
    const double r = ramp_fraction;
    if (r <= 0.0) return u;
    if (u < r) {
        const double x = u / r;
        const double x4 = x * x * x * x;
        return r * (x4 * x * x - 3.0 * x4 * x + 2.5 * x4);
    }
    return 0.5 * r + (u - r);
}

double Protocol::progress_rate(double u) const {
    const double r = ramp_fraction;
    if (r <= 0.0 || u >= r) return 1.0;
    const double x = u / r;
    return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

ControlPoint Protocol::position(double t) const { return path(progress(epsilon * t)); }

ControlPoint Protocol::velocity(double t) const {
    const double u = epsilon * t;
    const double s = progress(u);
    ControlPoint d;
    if (tangent) {
        d = tangent(s);
    } else {
        const double h = 1e-6;
        d = (path(s + h) - path(s - h)) / (2.0 * h);
    }
    return d * (progress_rate(u) * epsilon);
}

GeneratorFn protocol_generator(const HamiltonianFamily& fam, const DephasingSpec& deph, const Protocol& protocol) {
    return [&fam, deph, protocol](double t) {
        const cmat H = fam.hamiltonian(protocol.position(t));
        const SpectralData spec = eigensystem(H);
        return Generator{H, channel_operators(spec, deph)};
    };
}

Trajectory evolve_master(const HamiltonianFamily& fam, const DephasingSpec& deph, const Protocol& protocol,
                         const cmat& rho0, MasterOptions opts) {
    const double tr = rho0.trace().real();
    if (hermiticity_residual(rho0) > 1e-10 || std::abs(tr - 1.0) > 1e-10 || min_hermitian_eigenvalue(rho0) < -1e-10) {
        throw std::invalid_argument("evolve_master: initial state must be Hermitian, PSD and of unit trace");
    }
    if (opts.t_final <= 0.0) opts.t_final = protocol.duration();
    return integrate_master(protocol_generator(fam, deph, protocol), rho0, opts);
}

ExtractionReport extract_response(const HamiltonianFamily& fam, const DephasingSpec& deph, const Protocol& base,
                                  const std::vector<double>& epsilons, const ExtractionOptions& opts) {
    if (opts.driven >= static_cast<std::size_t>(fam.control_dim)) {
        throw std::invalid_argument("extract_response: driven direction out of range");
    }
    // with a moving spectrum Tr(rho F) picks up terms not proportional to the velocity
    const double s_end = base.progress(1.0);
    const rvec e_ref = eigensystem(fam.hamiltonian(base.path(0.0))).energies;
    for (int i = 1; i <= 16; ++i) {
        const rvec e = eigensystem(fam.hamiltonian(base.path(s_end * i / 16.0))).energies;
        const double scale = std::max(1.0, e_ref.cwiseAbs().maxCoeff());
        if (e.size() != e_ref.size() || (e - e_ref).cwiseAbs().maxCoeff() > opts.isospectral_tol * scale) {
            throw NumericalError("extract_response: family is not isospectral along the path; "
                                 "non-velocity terms would contaminate the measured response");
        }
    }

    ExtractionReport report;
    const auto m = static_cast<Eigen::Index>(fam.control_dim);
    const auto nu = static_cast<Eigen::Index>(opts.driven);
    for (double eps : epsilons) {
        Protocol protocol = base;
        protocol.epsilon = eps;
        const SpectralData start = eigensystem(fam.hamiltonian(protocol.position(0.0)));
        const cmat rho0 = start.ground() / static_cast<double>(start.ground_rank());

        ExtractionRun run;
        run.epsilon = eps;
        run.measured = rvec::Zero(m);
        run.predicted = rvec::Zero(m);
        const double T = protocol.duration();
        MasterOptions mo;
        mo.t_final = T;
        const double rate = generator_rate(protocol_generator(fam, deph, protocol), T);
        const double dt_est = rate > 0.0 ? mo.dt_rule / rate : T / 16.0;
        const auto steps_est = static_cast<std::size_t>(std::ceil(T / dt_est - 1e-9));
        const double window = (opts.measure_to - opts.measure_from) * static_cast<double>(steps_est);
        const auto every = std::max<std::size_t>(1, static_cast<std::size_t>(window / static_cast<double>(opts.samples)));

        auto observer = [&](double t, const cmat& rho) {
            const double u = eps * t;
            if (u < opts.measure_from - 1e-12 || u > opts.measure_to + 1e-12) return;
            const ControlPoint phi = protocol.position(t);
            const double speed = protocol.velocity(t)[nu];
            if (std::abs(speed) < opts.speed_floor) {
                ++run.undefined_samples;
                return;
            }
            const SpectralData spec = projection_derivatives(fam, phi);
            const rmat f = response_spectral_sum(spec, deph).f;
            for (Eigen::Index mu = 0; mu < m; ++mu) {
                const cmat& F = spec.forces[static_cast<std::size_t>(mu)];
                const double excess = (rho * F).trace().real() - (spec.ground() * F).trace().real();
                run.measured[mu] += excess / speed;
                run.predicted[mu] += f(mu, nu);
            }
            ++run.valid_samples;
        };
        const Trajectory tr = integrate_master(protocol_generator(fam, deph, protocol), rho0, mo, observer, every);
        run.trace_drift = tr.trace_drift;
        if (run.valid_samples > 0) {
            run.measured /= static_cast<double>(run.valid_samples);
            run.predicted /= static_cast<double>(run.valid_samples);
            const double ref = run.predicted.norm();
            run.relative_error = (run.measured - run.predicted).norm() / (ref > 0.0 ? ref : 1.0);
        } else {
            run.relative_error = std::numeric_limits<double>::quiet_NaN();
        }
        report.runs.push_back(std::move(run));
    }

    std::vector<const ExtractionRun*> by_eps;
    for (const auto& r : report.runs) by_eps.push_back(&r);
    std::sort(by_eps.begin(), by_eps.end(), [](auto* a, auto* b) { return a->epsilon > b->epsilon; });
    report.error_decreasing = true;
    for (std::size_t i = 1; i < by_eps.size(); ++i) {
        if (!(by_eps[i]->relative_error < by_eps[i - 1]->relative_error)) report.error_decreasing = false;
    }
    return report;
}

// ---------------------------------------------------------------- SDE ----

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream * golden + 0x632BE59BD9B4E019ULL))) {}

CounterRng::result_type CounterRng::operator()() {
    ++counter_;
    return splitmix64(key_ + counter_ * golden);
}

double standard_normal(CounterRng& rng) {
    constexpr double to_unit = 1.0 / 9007199254740992.0;  // 2^-53
    const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * to_unit;
    const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * to_unit;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double trace_distance(const cmat& a, const cmat& b) {
    const cmat d = a - b;
    Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

GeneratorFn sde_mean_generator(const SdeConfig& cfg) {
    if (cfg.variance < 0.0) throw std::invalid_argument("sde: variance D must be >= 0");
    return [cfg](double t) {
        const cmat H0 = cfg.h0(t);
        return Generator{cfg.bias * H0, {std::sqrt(0.5 * cfg.variance) * H0}};
    };
}

SdeResult evolve_sde_ensemble(const SdeConfig& cfg, const cmat& rho0) {
    if (cfg.variance < 0.0) throw std::invalid_argument("sde: variance D must be >= 0");
    if (!(cfg.dt > 0.0) || !(cfg.t_final > 0.0) || cfg.n_traj == 0) {
        throw std::invalid_argument("sde: dt, t_final and n_traj must be positive");
    }
    SdeResult res;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
    const std::size_t every = std::max<std::size_t>(1, cfg.record_every);

    std::vector<cmat> h0(steps);
    double h_norm = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        h0[s] = cfg.h0(static_cast<double>(s) * cfg.dt);
        h_norm = std::max(h_norm, operator_norm(h0[s]));
    }
    if (cfg.dt * h_norm * h_norm > 0.05) {
        res.warnings.push_back("dt ||H0||^2 = " + std::to_string(cfg.dt * h_norm * h_norm) + " above 0.05");
    }
    std::vector<std::size_t> record_steps{0};
    for (std::size_t s = every; s <= steps; s += every) record_steps.push_back(s);
    if (record_steps.back() != steps) record_steps.push_back(steps);
    for (std::size_t s : record_steps) res.times.push_back(static_cast<double>(s) * cfg.dt);

    // fixed chunking keeps the reduction order independent of the thread count
    constexpr std::size_t chunk_count = 64;
    const std::size_t chunk = (cfg.n_traj + chunk_count - 1) / chunk_count;
    const Eigen::Index n = rho0.rows();
    std::vector<std::vector<cmat>> partial(chunk_count);
    std::vector<double> drift(chunk_count, 0.0);
    const cplx trace0 = rho0.trace();

    parallel_for(chunk_count, [&](std::size_t c) {
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(cfg.n_traj, begin + chunk);
        auto& sums = partial[c];
        sums.assign(record_steps.size(), cmat::Zero(n, n));
        cmat c1(n, n), c2(n, n);
        for (std::size_t k = begin; k < end; ++k) {
            CounterRng rng(cfg.seed, k);
            cmat rho = rho0;
            std::size_t next_record = 1;
            sums[0] += rho;
            for (std::size_t s = 0; s < steps; ++s) {
                const cmat& H = h0[s];
                const double db = cfg.bias * cfg.dt + std::sqrt(cfg.variance * cfg.dt) * standard_normal(rng);
                c1.noalias() = H * rho;
                c1.noalias() -= rho * H;
                c2.noalias() = H * c1;
                c2.noalias() -= c1 * H;
                rho += (-I_unit * db) * c1 - (0.5 * db * db) * c2;
                if (next_record < record_steps.size() && s + 1 == record_steps[next_record]) {
                    sums[next_record] += rho;
                    drift[c] = std::max(drift[c], std::abs(rho.trace() - trace0));
                    ++next_record;
                }
            }
        }
    }, cfg.threads);

    res.mean.assign(record_steps.size(), cmat::Zero(n, n));
    for (std::size_t c = 0; c < chunk_count; ++c) {
        if (partial[c].empty()) continue;
        for (std::size_t r = 0; r < record_steps.size(); ++r) res.mean[r] += partial[c][r];
        res.max_trace_drift = std::max(res.max_trace_drift, drift[c]);
    }
    for (auto& m : res.mean) m /= static_cast<double>(cfg.n_traj);
    if (res.max_trace_drift > 1e-3) {
        throw NumericalError("sde: trajectory trace drift " + std::to_string(res.max_trace_drift) + " exceeds 1e-3");
    }
    return res;
}

}  // namespace dephase
