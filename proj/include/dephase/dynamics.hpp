// dynamics.hpp: time-domain checks: RK4 master-equation integration along slow
// protocols, response extraction from simulated expectation values, and the
// stochastic-unitary ensemble whose mean obeys a dephasing Lindblad equation.

#pragma once

#include "dephase/lindblad.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dephase {

// Instantaneous generator: L(rho) = -i[H, rho] + sum (2 G rho G^+ - G^+G rho - rho G^+G).
struct Generator {
    cmat hamiltonian;
    std::vector<cmat> jumps;
};

using GeneratorFn = std::function<Generator(double t)>;

struct MasterOptions {
    double t_final{0.0};             // evolve_master: 0 means the protocol duration
    double dt{0.0};                  // 0: (||H|| + sum ||G||^2) dt = 0.01
    std::size_t record_every{0};     // 0: first and last state only
    double trace_drift_limit{1e-6};  // exceeded -> NumericalError
    double dt_rule{0.01};
};

struct Trajectory {
    std::vector<double> times;
    std::vector<cmat> states;
    double dt{0};
    std::size_t steps{0};
    double trace_drift{0};       // max |Tr rho - Tr rho0| over recorded states
    double hermiticity{0};       // max ||rho - rho^+||_F over recorded states
    double min_eigenvalue{0};    // min over recorded states
    std::vector<std::string> warnings;
};

// Fixed-step classical RK4 on the matrix ODE.
Trajectory integrate_master(const GeneratorFn& gen, const cmat& rho0, const MasterOptions& opts);

// Same, calling observer(t, rho) after every `observe_every` steps (and at t = 0).
Trajectory integrate_master(const GeneratorFn& gen, const cmat& rho0, const MasterOptions& opts,
                            const std::function<void(double, const cmat&)>& observer, std::size_t observe_every);

// Largest ||H|| + sum ||G||^2 over a few sample times in [0, t_final].
double generator_rate(const GeneratorFn& gen, double t_final);

// phi(t) = path(sigma(eps t)); sigma ramps the speed in with a C^2 quintic
// smoothstep over the first ramp_fraction of the run, then moves at unit rate.
struct Protocol {
    std::function<ControlPoint(double s)> path;
    std::function<ControlPoint(double s)> tangent;  // optional d path / ds
    double epsilon{1e-3};
    double ramp_fraction{0.1};

    double duration() const { return 1.0 / epsilon; }
    double progress(double u) const;       // sigma(u)
    double progress_rate(double u) const;  // sigma'(u)
    ControlPoint position(double t) const;
    ControlPoint velocity(double t) const;  // d phi / dt
};

// Generator for the dephasing Lindbladian slaved to H(phi(t)).
GeneratorFn protocol_generator(const HamiltonianFamily& fam, const DephasingSpec& deph, const Protocol& protocol);

Trajectory evolve_master(const HamiltonianFamily& fam, const DephasingSpec& deph, const Protocol& protocol,
                         const cmat& rho0, MasterOptions opts = {});

struct ExtractionOptions {
    std::size_t driven{0};         // index nu of the single driven direction
    double measure_from{0.5};      // sample window in u = eps t
    double measure_to{1.0};
    std::size_t samples{200};
    double isospectral_tol{1e-10};
    double speed_floor{1e-14};     // |dphi^nu/dt| below this marks a sample undefined
};

struct ExtractionRun {
    double epsilon{0};
    rvec measured;        // column f_{. nu}, averaged over valid samples
    rvec predicted;       // spectral-sum prediction averaged over the same samples
    double relative_error{0};
    std::size_t valid_samples{0};
    std::size_t undefined_samples{0};
    double trace_drift{0};
};

struct ExtractionReport {
    std::vector<ExtractionRun> runs;
    bool error_decreasing{false};
};

// Starts in P(phi(0)). Measured f_{mu nu} = [Tr(rho F_mu) - Tr(P F_mu)] / dphi^nu/dt.
// Refuses non-isospectral families along the path.
ExtractionReport extract_response(const HamiltonianFamily& fam, const DephasingSpec& deph, const Protocol& protocol,
                                  const std::vector<double>& epsilons, const ExtractionOptions& opts = {});

// ---------------------------------------------------------------- SDE ----

struct SdeConfig {
    std::function<cmat(double t)> h0;
    double bias{1.0};       // mu = E(W_t)
    double variance{0.0};   // D, E(W_t W_s) = D delta(t - s)
    double dt{1e-3};
    double t_final{1.0};
    std::size_t n_traj{1000};
    std::uint64_t seed{0};
    std::size_t record_every{10};
    unsigned threads{0};
};

struct SdeResult {
    std::vector<double> times;
    std::vector<cmat> mean;   // ensemble mean at each recorded time
    double max_trace_drift{0};
    std::vector<std::string> warnings;
};

// Euler-Maruyama with db = mu dt + sqrt(D dt) N(0,1):
//   rho += -i[H0, rho] db - 1/2 db^2 [H0, [H0, rho]]
// Per-trajectory streams are keyed by (seed, index); the mean is a fixed-order sum.
SdeResult evolve_sde_ensemble(const SdeConfig& cfg, const cmat& rho0);

// The averaged generator -i mu [H0, .] - D/2 [H0, [H0, .]] in jump form.
GeneratorFn sde_mean_generator(const SdeConfig& cfg);

double trace_distance(const cmat& a, const cmat& b);

// Counter-based generator: output n of stream k is splitmix64(key(seed, k) + n * golden).
class CounterRng {
public:
    using result_type = std::uint64_t;
    CounterRng(std::uint64_t seed, std::uint64_t stream);
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

private:
    std::uint64_t key_;
    std::uint64_t counter_{0};
};

double standard_normal(CounterRng& rng);

}  // namespace dephase
