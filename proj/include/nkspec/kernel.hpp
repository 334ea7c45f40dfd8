#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "nkspec/jet.hpp"

namespace nkspec {

enum class ActivationKind { Relu, Erf, Exp };
enum class KernelKind { CK, NTK };

/// Pointwise nonlinearity.  `sigma` is only meaningful for Exp, where the
/// activation is x ↦ exp(x / sigma).
struct Activation {
    ActivationKind kind = ActivationKind::Relu;
    double sigma = 1.0;

    static Activation relu() { return {ActivationKind::Relu, 1.0}; }
    static Activation erf() { return {ActivationKind::Erf, 1.0}; }
    static Activation exp(double sigma) { return {ActivationKind::Exp, sigma}; }
};

/// MLP architecture generating a CK or NTK.  `depth` counts applications of
/// the layer map, so depth 1 is the linear kernel Σ¹ and a network with h
/// hidden layers has depth h + 1.
struct KernelConfig {
    int depth = 1;
    Activation activation{};
    double weight_var = 1.0;  // σ_w²
    double bias_var = 0.0;    // σ_b²
    KernelKind kind = KernelKind::CK;

    /// Throws InvalidInput / UnsupportedOperation on a bad configuration.
    void validate() const;
};

/// 2×2 restriction (K(x,x), K(x,y), K(y,y)) of a PSD kernel.
struct KernelEntryTriple {
    double k_xx = 0.0;
    double k_xy = 0.0;
    double k_yy = 0.0;
};

/// Cosines may exceed [-1, 1] by this much from roundoff before it is
/// treated as a non-PSD input.
inline constexpr double kCosineClampTol = 1e-12;

double v_phi(const Activation& act, const KernelEntryTriple& e);
double v_phi_prime(const Activation& act, const KernelEntryTriple& e);

/// Φ(t, q, q2): the kernel at cosine t between inputs with ‖x‖²/d = q and
/// ‖y‖²/d = q2.
double phi_eval(const KernelConfig& cfg, double t, double q = 1.0, double q2 = 1.0);

/// Taylor coefficients of t ↦ Φ(t, q, q) at t = 0 up to `order`.
Jet phi_jet(const KernelConfig& cfg, std::size_t order, double q = 1.0);

std::string_view to_string(ActivationKind kind);
std::string_view to_string(KernelKind kind);
ActivationKind parse_activation(std::string_view name);
KernelKind parse_kernel_kind(std::string_view name);

}  // namespace nkspec
