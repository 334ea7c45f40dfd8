#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nkspec/boolcube.hpp"
#include "nkspec/jet.hpp"
#include "nkspec/kernel.hpp"

namespace nkspec {

enum class SphereMethod { Quadrature, Taylor };

/// Gegenbauer eigenvalues a_0..a_L of a dot-product kernel on √d·S^{d-1}:
/// Φ(t) = Σ_l a_l c_{d,l}^{-1} C_l^{((d-2)/2)}(t).
struct SphereSpectrum {
    int d = 0;
    std::vector<double> a;
    SphereMethod method = SphereMethod::Quadrature;
    /// Taylor path only: the jet ran out before the series converged.
    bool truncated = false;

    [[nodiscard]] double c(int l) const;
};

/// Gauss rule for the weight (1 - t²)^((d-3)/2) on [-1, 1].
struct JacobiRule {
    int d = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] double exponent() const { return (d - 3) / 2.0; }
    [[nodiscard]] std::size_t count() const { return nodes.size(); }
};

/// Golub–Welsch rule, cached per (d, n) behind a mutex.
std::shared_ptr<const JacobiRule> jacobi_rule(int d, int n);
/// ∫ (1 - t²)^((d-3)/2) dt over [-1, 1] (a Beta function).
double jacobi_weight_mass(int d);

/// C_l^(α)(t) with C_0 = 1, C_1 = 2αt.
double gegenbauer_eval(double alpha, int l, double t);
/// ∫ C_l² (1 - t²)^(α - 1/2) dt with α = (d - 2)/2.
double gegenbauer_sq_norm(int d, int l);
/// c_{d,l} = (d - 2) / (d + 2l - 2).
double sphere_c(int d, int l);
/// Dimension of the degree-l spherical harmonics on S^{d-1}.
double sphere_multiplicity(int d, int l);

/// N(d,l) a_l / trace per degree; the trace is Φ(1) on the sphere and
/// Φ̂_d(1) for the Gaussian.
std::vector<double> sphere_fractional_variance(const SphereSpectrum& s, double trace);

inline int default_node_count(int lmax) { return 4 * lmax + 64; }
inline constexpr std::size_t kDefaultJetOrder = 64;

SphereSpectrum sphere_spectrum_quadrature(const PhiFunction& phi, int d, int lmax, int n_nodes);
SphereSpectrum sphere_spectrum_quadrature(const PhiFunction& phi, int d, int lmax);

/// Gegenbauer coefficients from Taylor coefficients at 0.  Requires a
/// nonnegative jet (within -1e-10 relative) so the series is monotone.
SphereSpectrum sphere_spectrum_from_jet(const Jet& jet, int d, int lmax, double tol = 1e-14);

struct SphereOptions {
    /// Unset: Taylor for d > 64, quadrature otherwise.
    std::optional<SphereMethod> method;
    int n_nodes = 0;  // 0 → default_node_count(lmax)
    std::size_t jet_order = kDefaultJetOrder;
    double tol = 1e-14;
};

SphereMethod default_sphere_method(int d);
SphereSpectrum sphere_spectrum(const KernelConfig& cfg, int d, int lmax, const SphereOptions& opts = {});

}  // namespace nkspec
