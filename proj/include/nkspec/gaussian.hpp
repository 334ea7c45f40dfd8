#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "nkspec/kernel.hpp"
#include "nkspec/sphere.hpp"

namespace nkspec {

/// Probability rule for q ~ χ²_d / d: generalized Gauss–Laguerre with
/// exponent d/2 - 1, mapped by q = 2x/d, weights summing to one.
struct ChiSqRule {
    int d = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t count() const { return nodes.size(); }
    /// Σ_i w_i f(q_i)
    [[nodiscard]] double expect(const std::function<double(double)>& f) const;
};

inline constexpr int kDefaultChiSqNodes = 64;

/// Cached per (d, n).
std::shared_ptr<const ChiSqRule> chi_sq_rule(int d, int n = kDefaultChiSqNodes);

/// Φ̂_d(t) = E_{q ~ χ²_d/d} Φ(t, q, q).
double hat_phi(const KernelConfig& cfg, int d, double t, const ChiSqRule& rule);
double hat_phi(const KernelConfig& cfg, int d, double t);

struct GaussianOptions {
    SphereOptions sphere{};
    int chi_sq_nodes = kDefaultChiSqNodes;
};

/// Per-degree trace summary a_l = E_q A_l(q, q) of the kernel over N(0, I_d):
/// the sphere spectrum of Φ̂_d.
SphereSpectrum gaussian_spectrum(const KernelConfig& cfg, int d, int lmax, const GaussianOptions& opts = {});

/// Eigenvalues λ² a_l of a kernel R(q)R(q')Φ̄(t) over N(0, I_d), given the
/// Gegenbauer coefficients a_l of Φ̄ and λ² = E R(q)².
std::vector<double> homogeneous_gaussian_spectrum(const SphereSpectrum& sphere_a, double lambda_sq, int lmax);

/// Same, for a CK/NTK assumed to factor as R(q)R(q')Φ(t,1,1)/R(1)².  The
/// factorization is checked at sample points (relative 1e-8) and λ² is
/// computed with the χ² rule.  Throws InvalidInput if the check fails.
std::vector<double> homogeneous_gaussian_spectrum(const KernelConfig& cfg, const SphereSpectrum& sphere_a,
                                                  const std::function<double(double)>& radial, int lmax,
                                                  int chi_sq_nodes = kDefaultChiSqNodes);

}  // namespace nkspec
