// lindblad.hpp: dephasing Lindbladians slaved to H
//
//   L(rho) = -i[H, rho] + sum_a ( [G_a rho, G_a^*] + [G_a, rho G_a^*] ),  G_a = Gamma_a(H)
//
// With real spectral functions Gamma_a, the operators E_jk = |j><k| are
// eigenvectors with eigenvalue
//   lambda_jk = -i (e_j - e_k) - sum_a (Gamma_a(e_j) - Gamma_a(e_k))^2.

#pragma once

#include "dephase/operator_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dephase {

// Value of Gamma_a on degeneracy class `level` of the ascending class energies.
using ChannelFn = std::function<double(std::size_t level, const rvec& energies)>;

struct DephasingChannel {
    std::string name;
    ChannelFn value;
};

struct DephasingSpec {
    std::vector<DephasingChannel> channels;

    // Gamma = 0: unitary evolution.
    static DephasingSpec none();
    // Gamma(H) = sqrt(gamma (H - e_0)): the same rate gamma_j0 = gamma to every level.
    static DephasingSpec single_rate(double gamma);
    // Gamma(e_j) = sqrt(rates[j-1] (e_j - e_0)); levels beyond rates.size() reuse the last rate.
    static DephasingSpec level_rates(std::vector<double> rates);
    // Gamma(H) = f(H) for an arbitrary real scalar function.
    static DephasingSpec function(std::string name, std::function<double(double)> f);

    // (#channels x #levels) matrix of Gamma_a(e_j); throws on non-finite values.
    rmat channel_values(const rvec& energies) const;
};

// Gamma_a(H) = sum_j Gamma_a(e_j) P_j.
std::vector<cmat> channel_operators(const SpectralData& spec, const DephasingSpec& deph);

// Class-pair eigenvalues lambda_jk (levels x levels).
cmat lindblad_eigenvalues(const SpectralData& spec, const DephasingSpec& deph);

// gamma_jk = -Re lambda_jk / |e_j - e_k|, zero on the diagonal.
rmat dephasing_rates(const SpectralData& spec, const DephasingSpec& deph);

// Generic action and vectorized form for arbitrary Hamiltonian and jump operators.
// Column-major vectorization: vec(A X B) = (B^T kron A) vec(X).
cmat lindblad_apply(const cmat& H, const std::vector<cmat>& jumps, const cmat& rho);
cmat vectorized_lindbladian(const cmat& H, const std::vector<cmat>& jumps);

// Minimum-norm least-squares solution of L(Y) = X with the vectorized L.
cmat pseudo_inverse_solve(const cmat& vectorized_L, const cmat& X);

class Superoperator {
public:
    static constexpr Eigen::Index max_vectorized_dim = 60;

    Superoperator(SpectralData spec, const DephasingSpec& deph, bool build_vectorized);

    Eigen::Index dim() const { return spec_.dim(); }
    const SpectralData& spectral() const { return spec_; }
    const cmat& eigenvalues() const { return lambda_; }
    const std::vector<cmat>& channels() const { return channels_; }

    // Dense dim^2 x dim^2 matrix; present only when built and dim <= 60.
    const std::optional<cmat>& vectorized() const { return vectorized_; }

    cmat apply(const cmat& rho) const;

    // Orthogonal (trace inner product) split into Ker L (block diagonal over
    // degeneracy classes) and Range L (off-diagonal class blocks).
    cmat kernel_component(const cmat& X) const;
    cmat range_component(const cmat& X) const;
    Eigen::Index kernel_dimension() const;

    // L^-1 restricted to Range L: sum_{j != k} P_j X P_k / lambda_jk. Throws
    // NumericalError when the kernel component of X exceeds tol * ||X||.
    cmat invert_on_range(const cmat& X, double tol = 1e-10) const;

private:
    SpectralData spec_;
    std::vector<cmat> channels_;
    cmat lambda_;
    std::optional<cmat> vectorized_;
};

Superoperator build_lindbladian(const SpectralData& spec, const DephasingSpec& deph,
                                bool build_vectorized = true);

}  // namespace dephase
