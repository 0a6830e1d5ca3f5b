// lindblad.cpp

#include "dephase/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace dephase {

DephasingSpec DephasingSpec::none() { return {}; }

DephasingSpec DephasingSpec::single_rate(double gamma) {
    if (!(gamma >= 0.0)) {
        throw std::invalid_argument("single_rate: gamma must be >= 0");
    }
    DephasingSpec d;
    d.channels.push_back({"sqrt(gamma (H - e0))", [gamma](std::size_t j, const rvec& e) {
                              return std::sqrt(gamma * std::max(0.0, e[static_cast<Eigen::Index>(j)] - e[0]));
                          }});
    return d;
}

DephasingSpec DephasingSpec::level_rates(std::vector<double> rates) {
    if (rates.empty()) {
        throw std::invalid_argument("level_rates: need at least one rate");
    }
    for (double r : rates) {
        if (!(r >= 0.0)) throw std::invalid_argument("level_rates: rates must be >= 0");
    }
    DephasingSpec d;
    d.channels.push_back({"sqrt(gamma_j (H - e0))", [rates = std::move(rates)](std::size_t j, const rvec& e) {
                              if (j == 0) return 0.0;
                              const double r = rates[std::min(j, rates.size()) - 1];
                              return std::sqrt(r * std::max(0.0, e[static_cast<Eigen::Index>(j)] - e[0]));
                          }});
    return d;
}

DephasingSpec DephasingSpec::function(std::string name, std::function<double(double)> f) {
    DephasingSpec d;
    d.channels.push_back({std::move(name), [f = std::move(f)](std::size_t j, const rvec& e) {
                              return f(e[static_cast<Eigen::Index>(j)]);
                          }});
    return d;
}

rmat DephasingSpec::channel_values(const rvec& energies) const {
    rmat v(static_cast<Eigen::Index>(channels.size()), energies.size());
    for (std::size_t a = 0; a < channels.size(); ++a) {
        for (Eigen::Index j = 0; j < energies.size(); ++j) {
            const double x = channels[a].value(static_cast<std::size_t>(j), energies);
            if (!std::isfinite(x)) {
                // a non-real spectral value would make Gamma(H) non-Hermitian
                throw NotHermitianError("dephasing channel '" + channels[a].name + "'",
                                        std::numeric_limits<double>::infinity());
            }
            v(static_cast<Eigen::Index>(a), j) = x;
        }
    }
    return v;
}

std::vector<cmat> channel_operators(const SpectralData& spec, const DephasingSpec& deph) {
    const rmat v = deph.channel_values(spec.energies);
    std::vector<cmat> ops;
    for (Eigen::Index a = 0; a < v.rows(); ++a) {
        cmat G = cmat::Zero(spec.dim(), spec.dim());
        for (std::size_t j = 0; j < spec.levels(); ++j) {
            G += v(a, static_cast<Eigen::Index>(j)) * spec.projections[j];
        }
        ops.push_back(std::move(G));
    }
    return ops;
}

cmat lindblad_eigenvalues(const SpectralData& spec, const DephasingSpec& deph) {
    const rmat v = deph.channel_values(spec.energies);
    const auto n = static_cast<Eigen::Index>(spec.levels());
    cmat lambda(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            double re = 0.0;
            for (Eigen::Index a = 0; a < v.rows(); ++a) {
                const double d = v(a, j) - v(a, k);
                re -= d * d;
            }
            lambda(j, k) = cplx(re, -(spec.energies[j] - spec.energies[k]));
        }
    }
    return lambda;
}

rmat dephasing_rates(const SpectralData& spec, const DephasingSpec& deph) {
    const cmat lambda = lindblad_eigenvalues(spec, deph);
    const auto n = lambda.rows();
    rmat gamma = rmat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            if (j == k) continue;  // distinct classes are never degenerate
            gamma(j, k) = -lambda(j, k).real() / std::abs(spec.energies[j] - spec.energies[k]);
        }
    }
    return gamma;
}

cmat lindblad_apply(const cmat& H, const std::vector<cmat>& jumps, const cmat& rho) {
    cmat out = -I_unit * (H * rho - rho * H);
    for (const cmat& G : jumps) {
        const cmat Gd = G.adjoint();
        const cmat GdG = Gd * G;
        out += 2.0 * G * rho * Gd - GdG * rho - rho * GdG;
    }
    return out;
}

cmat vectorized_lindbladian(const cmat& H, const std::vector<cmat>& jumps) {
    const Eigen::Index n = H.rows();
    const cmat Id = cmat::Identity(n, n);
    auto kron = [](const cmat& a, const cmat& b) {
        cmat k(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            for (Eigen::Index j = 0; j < a.cols(); ++j) {
                k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
            }
        }
        return k;
    };
    cmat L = -I_unit * (kron(Id, H) - kron(H.transpose(), Id));
    for (const cmat& G : jumps) {
        const cmat GdG = G.adjoint() * G;
        L += 2.0 * kron(G.conjugate(), G) - kron(Id, GdG) - kron(GdG.transpose(), Id);
    }
    return L;
}

cmat pseudo_inverse_solve(const cmat& vectorized_L, const cmat& X) {
    const Eigen::Index n = X.rows();
    const cvec x = Eigen::Map<const cvec>(X.data(), n * n);
    Eigen::CompleteOrthogonalDecomposition<cmat> cod(vectorized_L);
    cod.setThreshold(1e-10);
    const cvec y = cod.solve(x);
    return Eigen::Map<const cmat>(y.data(), n, n);
}

// ------------------------------ Superoperator ------------------------------

Superoperator::Superoperator(SpectralData spec, const DephasingSpec& deph, bool build_vectorized)
    : spec_(std::move(spec)),
      channels_(channel_operators(spec_, deph)),
      lambda_(lindblad_eigenvalues(spec_, deph)) {
    if (build_vectorized && spec_.dim() <= max_vectorized_dim) {
        vectorized_ = vectorized_lindbladian(spec_.hamiltonian(), channels_);
    }
}

cmat Superoperator::apply(const cmat& rho) const {
    return lindblad_apply(spec_.hamiltonian(), channels_, rho);
}

cmat Superoperator::kernel_component(const cmat& X) const {
    cmat K = cmat::Zero(dim(), dim());
    for (const cmat& P : spec_.projections) K += P * X * P;
    return K;
}

cmat Superoperator::range_component(const cmat& X) const { return X - kernel_component(X); }

Eigen::Index Superoperator::kernel_dimension() const {
    Eigen::Index d = 0;
    for (const auto& cls : spec_.degeneracy_classes) {
        const auto r = static_cast<Eigen::Index>(cls.size());
        d += r * r;
    }
    return d;
}

cmat Superoperator::invert_on_range(const cmat& X, double tol) const {
    if (X.rows() != dim() || X.cols() != dim()) {
        throw std::invalid_argument("invert_on_range: dimension mismatch");
    }
    const double kernel_norm = kernel_component(X).norm();
    if (kernel_norm > tol * X.norm()) {
        throw NumericalError("invert_on_range: argument has a kernel component of norm " +
                             std::to_string(kernel_norm));
    }
    cmat Y = cmat::Zero(dim(), dim());
    for (std::size_t j = 0; j < spec_.levels(); ++j) {
        for (std::size_t k = 0; k < spec_.levels(); ++k) {
            if (j == k) continue;
            Y += spec_.projections[j] * X * spec_.projections[k] /
                 lambda_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
        }
    }
    return Y;
}

Superoperator build_lindbladian(const SpectralData& spec, const DephasingSpec& deph, bool build_vectorized) {
    return Superoperator(spec, deph, build_vectorized);
}

}  // namespace dephase
