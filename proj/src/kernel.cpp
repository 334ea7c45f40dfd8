#include "nkspec/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nkspec/errors.hpp"
#include "nkspec/multiprecision.hpp"

namespace nkspec {

namespace {

constexpr double kPi = std::numbers::pi;

void require_psd(const KernelEntryTriple& e) {
    if (!std::isfinite(e.k_xx) || !std::isfinite(e.k_xy) || !std::isfinite(e.k_yy)) {
        throw InvalidInput("kernel entries must be finite");
    }
    if (e.k_xx < 0.0 || e.k_yy < 0.0) {
        throw InvalidInput("kernel diagonal entries must be nonnegative");
    }
}

// With equal diagonals divide directly: sqrt(x * x) need not round back to x,
// and arccos turns a one-ulp miss at c = 1 into a 1e-8 error.
double cosine(const KernelEntryTriple& e) {
    const double c = e.k_xx == e.k_yy ? e.k_xy / e.k_xx : e.k_xy / std::sqrt(e.k_xx * e.k_yy);
    if (std::abs(c) > 1.0 + kCosineClampTol) {
        throw InvalidInput("kernel triple is not PSD: cosine " + std::to_string(c));
    }
    return std::clamp(c, -1.0, 1.0);
}

// The layer recursion is shared between scalar evaluation and jet
// evaluation.  Diagonal entries are always plain scalars; the off-diagonal
// entry is either a double or a Jet in t.

double relu_dual(double kxy, double kxx, double kyy) {
    if (kxx == 0.0 || kyy == 0.0) {
        return 0.0;
    }
    const double c = cosine({kxx, kxy, kyy});
    return (std::sqrt(1.0 - c * c) + (kPi - std::acos(c)) * c) / (2.0 * kPi) *
           std::sqrt(kxx * kyy);
}

Jet relu_dual(const Jet& kxy, double kxx, double kyy) {
    if (kxx == 0.0 || kyy == 0.0) {
        return Jet(kxy.order());
    }
    const Jet c = kxy * (1.0 / std::sqrt(kxx * kyy));
    const Jet one_minus_c2 = 1.0 - c * c;
    return (sqrt(one_minus_c2) + (kPi - acos(c)) * c) * (std::sqrt(kxx * kyy) / (2.0 * kPi));
}

double relu_dual_prime(double kxy, double kxx, double kyy) {
    if (kxx == 0.0 || kyy == 0.0) {
        return 0.0;
    }
    const double c = cosine({kxx, kxy, kyy});
    return (kPi - std::acos(c)) / (2.0 * kPi);
}

Jet relu_dual_prime(const Jet& kxy, double kxx, double kyy) {
    if (kxx == 0.0 || kyy == 0.0) {
        return Jet(kxy.order());
    }
    const Jet c = kxy * (1.0 / std::sqrt(kxx * kyy));
    return (kPi - acos(c)) * (1.0 / (2.0 * kPi));
}

double erf_dual(double kxy, double kxx, double kyy) {
    double s = kxy / std::sqrt((kxx + 0.5) * (kyy + 0.5));
    if (std::abs(s) > 1.0 + kCosineClampTol) {
        throw InvalidInput("kernel triple is not PSD: erf argument " + std::to_string(s));
    }
    s = std::clamp(s, -1.0, 1.0);
    return 2.0 / kPi * std::asin(s);
}

Jet erf_dual(const Jet& kxy, double kxx, double kyy) {
    return asin(kxy * (1.0 / std::sqrt((kxx + 0.5) * (kyy + 0.5)))) * (2.0 / kPi);
}

double erf_dual_prime(double kxy, double kxx, double kyy) {
    const double det = (1.0 + 2.0 * kxx) * (1.0 + 2.0 * kyy) - 4.0 * kxy * kxy;
    if (!(det > 0.0)) {
        throw InvalidInput("degenerate erf derivative denominator");
    }
    return 4.0 / (kPi * std::sqrt(det));
}

Jet erf_dual_prime(const Jet& kxy, double kxx, double kyy) {
    const Jet det = (1.0 + 2.0 * kxx) * (1.0 + 2.0 * kyy) - 4.0 * (kxy * kxy);
    return recip(sqrt(det)) * (4.0 / kPi);
}

double exp_dual(double kxy, double kxx, double kyy, double sigma) {
    return std::exp((kxx + 2.0 * kxy + kyy) / (2.0 * sigma * sigma));
}

Jet exp_dual(const Jet& kxy, double kxx, double kyy, double sigma) {
    return exp((kxy * 2.0 + (kxx + kyy)) * (1.0 / (2.0 * sigma * sigma)));
}

// MPFR overloads for the off-diagonal entry; π is taken at the working
// precision of the argument.
MpReal mp_pi(const MpReal& like) {
    MpReal p(0, like.precision());
    mpfr_const_pi(p.backend().data(), GMP_RNDN);
    return p;
}

MpReal mp_cosine(const MpReal& kxy, const MpReal& kxx, const MpReal& kyy) {
    MpReal c = kxx == kyy ? MpReal(kxy / kxx) : MpReal(kxy / sqrt(kxx * kyy));
    if (abs(c) > 1.0 + kCosineClampTol) {
        throw InvalidInput("kernel triple is not PSD");
    }
    if (c > 1) {
        c = 1;
    } else if (c < -1) {
        c = -1;
    }
    return c;
}

MpReal relu_dual(const MpReal& kxy, const MpReal& kxx, const MpReal& kyy) {
    if (kxx == 0 || kyy == 0) {
        return MpReal(0, kxy.precision());
    }
    const MpReal c = mp_cosine(kxy, kxx, kyy);
    const MpReal pi = mp_pi(kxy);
    return (sqrt(1 - c * c) + (pi - acos(c)) * c) / (2 * pi) * sqrt(kxx * kyy);
}

MpReal relu_dual_prime(const MpReal& kxy, const MpReal& kxx, const MpReal& kyy) {
    if (kxx == 0 || kyy == 0) {
        return MpReal(0, kxy.precision());
    }
    const MpReal c = mp_cosine(kxy, kxx, kyy);
    const MpReal pi = mp_pi(kxy);
    return (pi - acos(c)) / (2 * pi);
}

MpReal erf_dual(const MpReal& kxy, const MpReal& kxx, const MpReal& kyy) {
    MpReal s = kxy / sqrt((kxx + 0.5) * (kyy + 0.5));
    if (abs(s) > 1.0 + kCosineClampTol) {
        throw InvalidInput("kernel triple is not PSD");
    }
    if (s > 1) {
        s = 1;
    } else if (s < -1) {
        s = -1;
    }
    return 2 / mp_pi(kxy) * asin(s);
}

MpReal erf_dual_prime(const MpReal& kxy, const MpReal& kxx, const MpReal& kyy) {
    const MpReal det = (1 + 2 * kxx) * (1 + 2 * kyy) - 4 * kxy * kxy;
    if (!(det > 0)) {
        throw InvalidInput("degenerate erf derivative denominator");
    }
    return 4 / (mp_pi(kxy) * sqrt(det));
}

MpReal exp_dual(const MpReal& kxy, const MpReal& kxx, const MpReal& kyy, double sigma) {
    return exp((kxx + 2 * kxy + kyy) / (2.0 * sigma * sigma));
}

template <class T, class D>
T dual(const Activation& act, const T& kxy, const D& kxx, const D& kyy) {
    switch (act.kind) {
        case ActivationKind::Relu: return relu_dual(kxy, kxx, kyy);
        case ActivationKind::Erf: return erf_dual(kxy, kxx, kyy);
        case ActivationKind::Exp: return exp_dual(kxy, kxx, kyy, act.sigma);
    }
    throw InvalidInput("unknown activation");
}

template <class T, class D>
T dual_prime(const Activation& act, const T& kxy, const D& kxx, const D& kyy) {
    switch (act.kind) {
        case ActivationKind::Relu: return relu_dual_prime(kxy, kxx, kyy);
        case ActivationKind::Erf: return erf_dual_prime(kxy, kxx, kyy);
        case ActivationKind::Exp:
            throw UnsupportedOperation("derivative dual of the exp activation is not defined");
    }
    throw InvalidInput("unknown activation");
}

// Runs the CK (and optionally NTK) recursion from the first-layer entries.
template <class T, class D = double>
T layer_recursion(const KernelConfig& cfg, T sxy, D sxx, D syy) {
    const double w = cfg.weight_var;
    const double b = cfg.bias_var;
    T theta = sxy;
    for (int l = 2; l <= cfg.depth; ++l) {
        T next = dual(cfg.activation, sxy, sxx, syy) * w + b;
        if (cfg.kind == KernelKind::NTK) {
            theta = next + (theta * dual_prime(cfg.activation, sxy, sxx, syy)) * w;
        }
        sxx = w * dual(cfg.activation, sxx, sxx, sxx) + b;
        syy = w * dual(cfg.activation, syy, syy, syy) + b;
        sxy = std::move(next);
    }
    return cfg.kind == KernelKind::NTK ? theta : sxy;
}

}  // namespace

void KernelConfig::validate() const {
    if (depth < 1) {
        throw InvalidInput("depth must be >= 1");
    }
    if (!(weight_var > 0.0) || !std::isfinite(weight_var)) {
        throw InvalidInput("weight variance must be positive");
    }
    if (!(bias_var >= 0.0) || !std::isfinite(bias_var)) {
        throw InvalidInput("bias variance must be nonnegative");
    }
    if (activation.kind == ActivationKind::Exp) {
        if (!(activation.sigma > 0.0)) {
            throw InvalidInput("exp activation needs sigma > 0");
        }
        if (kind == KernelKind::NTK) {
            throw UnsupportedOperation("NTK of the exp activation is not supported");
        }
    }
}

double v_phi(const Activation& act, const KernelEntryTriple& e) {
    require_psd(e);
    if (act.kind != ActivationKind::Exp && e.k_xx > 0.0 && e.k_yy > 0.0) {
        cosine(e);  // PSD check
    }
    return dual(act, e.k_xy, e.k_xx, e.k_yy);
}

double v_phi_prime(const Activation& act, const KernelEntryTriple& e) {
    require_psd(e);
    if (act.kind == ActivationKind::Exp) {
        throw UnsupportedOperation("derivative dual of the exp activation is not defined");
    }
    if (e.k_xx > 0.0 && e.k_yy > 0.0) {
        cosine(e);
    }
    return dual_prime(act, e.k_xy, e.k_xx, e.k_yy);
}

double phi_eval(const KernelConfig& cfg, double t, double q, double q2) {
    cfg.validate();
    if (!(std::abs(t) <= 1.0 + kCosineClampTol)) {
        throw InvalidInput("cosine argument outside [-1, 1]: " + std::to_string(t));
    }
    if (!(q > 0.0) || !(q2 > 0.0)) {
        throw InvalidInput("norm arguments must be positive");
    }
    t = std::clamp(t, -1.0, 1.0);
    const double w = cfg.weight_var;
    const double b = cfg.bias_var;
    return layer_recursion<double>(cfg, w * t * std::sqrt(q * q2) + b, w * q + b, w * q2 + b);
}

Jet phi_jet(const KernelConfig& cfg, std::size_t order, double q) {
    cfg.validate();
    if (order < 1) {
        throw InvalidInput("jet order must be >= 1");
    }
    if (!(q > 0.0)) {
        throw InvalidInput("norm argument must be positive");
    }
    const double w = cfg.weight_var;
    const double b = cfg.bias_var;
    const Jet first = Jet::variable(order) * (w * q) + b;
    return layer_recursion<Jet>(cfg, first, w * q + b, w * q + b);
}

MpReal phi_eval_mp(const KernelConfig& cfg, const MpReal& t) {
    cfg.validate();
    if (!(abs(t) <= 1.0 + kCosineClampTol)) {
        throw InvalidInput("cosine argument outside [-1, 1]");
    }
    MpReal tc = t;
    if (tc > 1) {
        tc = 1;
    } else if (tc < -1) {
        tc = -1;
    }
    const double w = cfg.weight_var;
    const double b = cfg.bias_var;
    const MpReal diag = MpReal(w, t.precision()) + b;
    return layer_recursion<MpReal, MpReal>(cfg, w * tc + b, diag, diag);
}

std::string_view to_string(ActivationKind kind) {
    switch (kind) {
        case ActivationKind::Relu: return "relu";
        case ActivationKind::Erf: return "erf";
        case ActivationKind::Exp: return "exp";
    }
    return "?";
}

std::string_view to_string(KernelKind kind) { return kind == KernelKind::CK ? "ck" : "ntk"; }

ActivationKind parse_activation(std::string_view name) {
    if (name == "relu") return ActivationKind::Relu;
    if (name == "erf") return ActivationKind::Erf;
    if (name == "exp") return ActivationKind::Exp;
    throw InvalidInput("unknown activation '" + std::string(name) + "'");
}

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "ck") return KernelKind::CK;
    if (name == "ntk") return KernelKind::NTK;
    throw InvalidInput("unknown kernel kind '" + std::string(name) + "'");
}

}  // namespace nkspec
