#include "nkspec/sphere.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "golub_welsch.hpp"
#include "nkspec/errors.hpp"

namespace nkspec {

namespace {

void require_sphere_dim(int d) {
    if (d < 3) {
        throw InvalidInput("sphere spectra need d >= 3");
    }
}

JacobiRule build_jacobi_rule(int d, int n) {
    // Monic ultraspherical recurrence, λ = (d - 2)/2:
    // β_k = k (k + 2λ - 1) / (4 (k + λ)(k + λ - 1)), zero diagonal.
    const double lambda = (d - 2) / 2.0;
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    std::vector<double> off(static_cast<std::size_t>(n - 1));
    for (int k = 1; k < n; ++k) {
        const double beta = k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0));
        off[static_cast<std::size_t>(k - 1)] = std::sqrt(beta);
    }
    auto nw = detail::golub_welsch(diag, off, jacobi_weight_mass(d));
    return JacobiRule{d, std::move(nw.nodes), std::move(nw.weights)};
}

}  // namespace

double SphereSpectrum::c(int l) const { return sphere_c(d, l); }

double jacobi_weight_mass(int d) {
    require_sphere_dim(d);
    // B(1/2, (d-1)/2)
    return std::exp(std::lgamma(0.5) + std::lgamma((d - 1) / 2.0) - std::lgamma(d / 2.0));
}

std::shared_ptr<const JacobiRule> jacobi_rule(int d, int n) {
    require_sphere_dim(d);
    if (n < 1) {
        throw InvalidInput("quadrature needs at least one node");
    }
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const JacobiRule>> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find({d, n}); it != cache.end()) {
            return it->second;
        }
    }
    auto rule = std::make_shared<const JacobiRule>(build_jacobi_rule(d, n));
    std::lock_guard lock(mutex);
    return cache.try_emplace({d, n}, std::move(rule)).first->second;
}

double gegenbauer_eval(double alpha, int l, double t) {
    if (l < 0) {
        throw InvalidInput("Gegenbauer degree must be >= 0");
    }
    if (l == 0) {
        return 1.0;
    }
    double prev = 1.0;
    double cur = 2.0 * alpha * t;
    for (int n = 1; n < l; ++n) {
        const double next = (2.0 * t * (n + alpha) * cur - (n + 2.0 * alpha - 1.0) * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

double gegenbauer_sq_norm(int d, int l) {
    require_sphere_dim(d);
    if (l < 0) {
        throw InvalidInput("Gegenbauer degree must be >= 0");
    }
    const double alpha = (d - 2) / 2.0;
    const double log_norm = std::log(std::numbers::pi) + (1.0 - 2.0 * alpha) * std::log(2.0) +
                            std::lgamma(l + 2.0 * alpha) - std::lgamma(l + 1.0) - std::log(l + alpha) -
                            2.0 * std::lgamma(alpha);
    const double out = std::exp(log_norm);
    if (!std::isfinite(out)) {
        throw ResourceLimit("Gegenbauer norm overflows for d=" + std::to_string(d) + ", l=" + std::to_string(l));
    }
    return out;
}

double sphere_c(int d, int l) { return (d - 2.0) / (d + 2.0 * l - 2.0); }

double sphere_multiplicity(int d, int l) {
    require_sphere_dim(d);
    if (l == 0) {
        return 1.0;
    }
    // (2l + d - 2)/(d - 2) · binom(l + d - 3, l)
    const double n = std::exp(std::log(2.0 * l + d - 2.0) - std::log(d - 2.0) + std::lgamma(l + d - 2.0) -
                              std::lgamma(l + 1.0) - std::lgamma(d - 2.0));
    // An integer; snap while it is exactly representable.
    return n < 9e15 ? std::round(n) : n;
}

std::vector<double> sphere_fractional_variance(const SphereSpectrum& s, double trace) {
    if (!(trace > 0.0) || !std::isfinite(trace)) {
        throw InvalidInput("fractional variance needs a positive finite trace");
    }
    std::vector<double> out(s.a.size());
    for (std::size_t l = 0; l < s.a.size(); ++l) {
        out[l] = sphere_multiplicity(s.d, static_cast<int>(l)) * s.a[l] / trace;
    }
    return out;
}

SphereSpectrum sphere_spectrum_quadrature(const PhiFunction& phi, int d, int lmax, int n_nodes) {
    require_sphere_dim(d);
    if (lmax < 0) {
        throw InvalidInput("lmax must be >= 0");
    }
    if (n_nodes < lmax + 16) {
        throw InvalidInput("quadrature needs n_nodes >= lmax + 16");
    }
    const auto rule = jacobi_rule(d, n_nodes);
    const double alpha = (d - 2) / 2.0;
    std::vector<double> acc(static_cast<std::size_t>(lmax) + 1, 0.0);
    for (std::size_t i = 0; i < rule->count(); ++i) {
        const double t = rule->nodes[i];
        const double wf = rule->weights[i] * phi(t);
        // C_l(t) for all l by the three-term recurrence.
        double prev = 1.0;
        double cur = 2.0 * alpha * t;
        acc[0] += wf;
        for (int l = 1; l <= lmax; ++l) {
            acc[static_cast<std::size_t>(l)] += wf * cur;
            const double next = (2.0 * t * (l + alpha) * cur - (l + 2.0 * alpha - 1.0) * prev) / (l + 1.0);
            prev = cur;
            cur = next;
        }
    }
    SphereSpectrum s;
    s.d = d;
    s.method = SphereMethod::Quadrature;
    s.a.resize(acc.size());
    for (int l = 0; l <= lmax; ++l) {
        s.a[static_cast<std::size_t>(l)] = sphere_c(d, l) * acc[static_cast<std::size_t>(l)] / gegenbauer_sq_norm(d, l);
    }
    return s;
}

SphereSpectrum sphere_spectrum_quadrature(const PhiFunction& phi, int d, int lmax) {
    return sphere_spectrum_quadrature(phi, d, lmax, default_node_count(lmax));
}

SphereSpectrum sphere_spectrum_from_jet(const Jet& jet, int d, int lmax, double tol) {
    require_sphere_dim(d);
    if (lmax < 0 || static_cast<std::size_t>(lmax) > jet.order()) {
        throw InvalidInput("jet order must be >= lmax");
    }
    const auto c = jet.coeffs();
    double scale = 0.0;
    for (double x : c) {
        scale += std::abs(x);
    }
    for (std::size_t n = 0; n < c.size(); ++n) {
        if (c[n] < -1e-10 * scale) {
            throw InvalidInput("jet coefficient " + std::to_string(n) + " is negative; series is not monotone");
        }
    }
    // a_l = Γ(d/2) Σ_k Φ^(l+2k)(0) / (2^(l+2k) k! Γ(d/2 + l + k)), with Φ^(n)(0) = n! c_n.
    const double half_d = d / 2.0;
    SphereSpectrum s;
    s.d = d;
    s.method = SphereMethod::Taylor;
    s.a.assign(static_cast<std::size_t>(lmax) + 1, 0.0);
    const double ln2 = std::log(2.0);
    for (int l = 0; l <= lmax; ++l) {
        double sum = 0.0;
        double last_term = 0.0;
        for (int k = 0; static_cast<std::size_t>(l + 2 * k) < c.size(); ++k) {
            const int n = l + 2 * k;
            const double cn = c[static_cast<std::size_t>(n)];
            if (cn == 0.0) {
                last_term = 0.0;
                continue;
            }
            const double log_w = std::lgamma(half_d) + std::lgamma(n + 1.0) - n * ln2 - std::lgamma(k + 1.0) -
                                 std::lgamma(half_d + l + k);
            last_term = std::copysign(std::exp(log_w + std::log(std::abs(cn))), cn);
            sum += last_term;
        }
        s.a[static_cast<std::size_t>(l)] = sum;
        if (std::abs(last_term) > tol * std::abs(sum)) {
            s.truncated = true;
        }
    }
    return s;
}

SphereMethod default_sphere_method(int d) { return d > 64 ? SphereMethod::Taylor : SphereMethod::Quadrature; }

SphereSpectrum sphere_spectrum(const KernelConfig& cfg, int d, int lmax, const SphereOptions& opts) {
    cfg.validate();
    const SphereMethod method = opts.method.value_or(default_sphere_method(d));
    if (method == SphereMethod::Taylor) {
        const std::size_t order = std::max<std::size_t>(opts.jet_order, static_cast<std::size_t>(lmax));
        return sphere_spectrum_from_jet(phi_jet(cfg, order), d, lmax, opts.tol);
    }
    const int n = opts.n_nodes > 0 ? opts.n_nodes : default_node_count(lmax);
    return sphere_spectrum_quadrature([&cfg](double t) { return phi_eval(cfg, t); }, d, lmax, n);
}

}  // namespace nkspec
