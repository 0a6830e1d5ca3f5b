// response.cpp

#include "dephase/response.hpp"

#include "dephase/parallel.hpp"

#include <cmath>
#include <numbers>

namespace dephase {

std::string to_string(ResponseRoute route) {
    switch (route) {
    case ResponseRoute::superop: return "superop";
    case ResponseRoute::superop_vectorized: return "superop_vectorized";
    case ResponseRoute::spectral_sum: return "spectral_sum";
    case ResponseRoute::closed_form: return "closed_form";
    }
    return "unknown";
}

namespace {

rvec rates_from_energies(const rvec& energies, const DephasingSpec& deph) {
    const rmat v = deph.channel_values(energies);
    const Eigen::Index n = energies.size();
    rvec rates(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index j = 1; j < n; ++j) {
        double re = 0.0;
        for (Eigen::Index a = 0; a < v.rows(); ++a) {
            const double d = v(a, j) - v(a, 0);
            re += d * d;
        }
        rates[j - 1] = re / (energies[j] - energies[0]);
    }
    return rates;
}

}  // namespace

rvec ground_rates(const SpectralData& spec, const DephasingSpec& deph) {
    return rates_from_energies(spec.energies, deph);
}

bool is_single_rate(const rvec& rates, double* mean) {
    if (rates.size() == 0) {
        if (mean) *mean = 0.0;
        return true;
    }
    const double m = rates.mean();
    if (mean) *mean = m;
    return (rates.array() - m).abs().maxCoeff() <= 1e-8 * (1.0 + m);
}

ResponseMatrix response_superop(const SpectralData& spec, const DephasingSpec& deph, bool vectorized) {
    if (!spec.has_derivatives() || spec.forces.size() != spec.dP.size()) {
        throw std::invalid_argument("response_superop: spectral data needs dP and forces");
    }
    const Superoperator L = build_lindbladian(spec, deph, vectorized);
    if (vectorized && !L.vectorized()) {
        throw std::invalid_argument("response_superop: vectorized route limited to dim <= 60");
    }
    const auto m = static_cast<Eigen::Index>(spec.dP.size());
    std::vector<cmat> response_state;
    response_state.reserve(spec.dP.size());
    for (const cmat& d : spec.dP) {
        if (vectorized) {
            // range membership is enforced the same way as on the spectral path
            (void)L.invert_on_range(d);
            response_state.push_back(pseudo_inverse_solve(*L.vectorized(), d));
        } else {
            response_state.push_back(L.invert_on_range(d));
        }
    }
    ResponseMatrix r;
    r.point = spec.point;
    r.route = vectorized ? ResponseRoute::superop_vectorized : ResponseRoute::superop;
    r.gamma_used = ground_rates(spec, deph);
    r.f.resize(m, m);
    for (Eigen::Index mu = 0; mu < m; ++mu) {
        for (Eigen::Index nu = 0; nu < m; ++nu) {
            const cplx v = (spec.forces[static_cast<std::size_t>(mu)] * response_state[static_cast<std::size_t>(nu)]).trace();
            r.f(mu, nu) = v.real();
            r.imag_residue = std::max(r.imag_residue, std::abs(v.imag()));
        }
    }
    return r;
}

rmat spectral_sum(const GeometricTensor& gt, const rvec& rates) {
    if (static_cast<Eigen::Index>(gt.per_level.size()) != rates.size()) {
        throw std::invalid_argument("spectral_sum: need one rate per excited level");
    }
    rmat f = rmat::Zero(gt.g.rows(), gt.g.cols());
    for (std::size_t j = 0; j < gt.per_level.size(); ++j) {
        const double gam = rates[static_cast<Eigen::Index>(j)];
        f += (gam * gt.per_level[j].g + gt.per_level[j].omega) / (1.0 + gam * gam);
    }
    return f;
}

ResponseMatrix response_spectral_sum(const SpectralData& spec, const DephasingSpec& deph) {
    const GeometricTensor gt = geometric_tensor(spec, true);
    ResponseMatrix r;
    r.point = spec.point;
    r.route = ResponseRoute::spectral_sum;
    r.gamma_used = ground_rates(spec, deph);
    r.f = spectral_sum(gt, r.gamma_used);
    return r;
}

ResponseMatrix response_closed_form(const GeometricTensor& gt, double gamma) {
    if (!(gamma >= 0.0)) {
        throw std::invalid_argument("response_closed_form: gamma must be >= 0");
    }
    ResponseMatrix r;
    r.point = gt.point;
    r.route = ResponseRoute::closed_form;
    r.gamma_used = rvec::Constant(1, gamma);
    const double denom = 1.0 + gamma * gamma;
    r.f = gamma / denom * gt.g + gt.omega / denom;
    return r;
}

InverseResponseReport inverse_response_check(const GeometricTensor& gt, const std::vector<double>& gammas,
                                             double compat_tol) {
    InverseResponseReport rep;
    rep.compat = compatibility(gt, compat_tol);
    rep.omega_inverse = Eigen::FullPivLU<rmat>(gt.omega).inverse();
    const rmat g_inv = Eigen::FullPivLU<rmat>(gt.g).inverse();
    rmat first_antisym;
    for (double gamma : gammas) {
        const rmat f = response_closed_form(gt, gamma).f;
        Eigen::FullPivLU<rmat> lu(f);
        if (!lu.isInvertible()) {
            throw NumericalError("inverse_response_check: response matrix is singular at gamma = " +
                                 std::to_string(gamma));
        }
        InverseResponseRow row;
        row.gamma = gamma;
        row.f_inverse = lu.inverse();
        const rmat anti = 0.5 * (row.f_inverse - row.f_inverse.transpose());
        const rmat sym = 0.5 * (row.f_inverse + row.f_inverse.transpose());
        row.antisym_error = (anti - rep.omega_inverse).norm();
        row.sym_error = (sym - gamma * g_inv).norm();
        if (rep.rows.empty()) {
            first_antisym = anti;
        } else {
            rep.antisym_variation = std::max(rep.antisym_variation, (anti - first_antisym).norm());
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

namespace {

struct SweepCells {
    rvec lo, hi;
    std::vector<ControlPoint> centres;
    double cell_area{0};
};

SweepCells sweep_cells(const rvec& lo, const rvec& hi, int control_dim, ChernGrid grid, const std::string& name) {
    if (control_dim != 2 || lo.size() != 2 || hi.size() != 2) {
        throw std::invalid_argument(name + ": conductance sweep needs a two-parameter closed chart");
    }
    SweepCells c{lo, hi, {}, (hi[0] - lo[0]) * (hi[1] - lo[1]) / (grid.n1 * grid.n2)};
    for (int i = 0; i < grid.n1; ++i) {
        for (int j = 0; j < grid.n2; ++j) {
            ControlPoint p(2);
            p[0] = lo[0] + (hi[0] - lo[0]) * (i + 0.5) / grid.n1;
            p[1] = lo[1] + (hi[1] - lo[1]) * (j + 0.5) / grid.n2;
            c.centres.push_back(p);
        }
    }
    return c;
}

}  // namespace

SweepTable conductance_sweep(const HamiltonianFamily& fam, const std::function<DephasingSpec(double)>& preset,
                             const std::vector<double>& gammas, ChernGrid grid) {
    const SweepCells cells = sweep_cells(fam.domain_lower, fam.domain_upper, fam.control_dim, grid, fam.name);
    struct PointData {
        GeometricTensor gt;
        rvec energies;
    };
    std::vector<PointData> data(cells.centres.size());
    parallel_for(data.size(), [&](std::size_t i) {
        const SpectralData spec = projection_derivatives(fam, cells.centres[i]);
        data[i] = {geometric_tensor(spec, true), spec.energies};
    });

    SweepTable t;
    t.n1 = grid.n1;
    t.n2 = grid.n2;
    const double norm = cells.cell_area / (2.0 * std::numbers::pi);
    for (const auto& d : data) t.curvature_integral += d.gt.omega(0, 1) * norm;
    for (double gamma : gammas) {
        const DephasingSpec deph = preset(gamma);
        double acc = 0.0;
        for (const auto& d : data) {
            const rmat f = spectral_sum(d.gt, rates_from_energies(d.energies, deph));
            acc += 0.5 * (f(0, 1) - f(1, 0));
        }
        t.rows.push_back({gamma, acc * norm});
    }
    return t;
}

SweepTable conductance_sweep(const StateFamily& fam, const std::vector<double>& gammas, ChernGrid grid,
                             double fd_step) {
    const SweepCells cells = sweep_cells(fam.domain_lower, fam.domain_upper, fam.control_dim, grid, fam.name);
    std::vector<GeometricTensor> tensors(cells.centres.size());
    parallel_for(tensors.size(), [&](std::size_t i) {
        tensors[i] = geometric_tensor(bundle_spectral_data(fam, cells.centres[i], fd_step));
    });
    SweepTable t;
    t.n1 = grid.n1;
    t.n2 = grid.n2;
    const double norm = cells.cell_area / (2.0 * std::numbers::pi);
    for (const auto& gt : tensors) t.curvature_integral += gt.omega(0, 1) * norm;
    for (double gamma : gammas) {
        double acc = 0.0;
        for (const auto& gt : tensors) acc += response_closed_form(gt, gamma).antisym()(0, 1);
        t.rows.push_back({gamma, acc * norm});
    }
    return t;
}

}  // namespace dephase
