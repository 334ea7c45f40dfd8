#include "nkspec/gaussian.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "golub_welsch.hpp"
#include "nkspec/errors.hpp"

namespace nkspec {

namespace {

ChiSqRule build_chi_sq_rule(int d, int n) {
    // Laguerre weight x^a e^{-x}: diagonal 2k + a + 1, off-diagonal sqrt(k (k + a)).
    const double a = d / 2.0 - 1.0;
    std::vector<double> diag(static_cast<std::size_t>(n));
    std::vector<double> off(static_cast<std::size_t>(n - 1));
    for (int k = 0; k < n; ++k) {
        diag[static_cast<std::size_t>(k)] = 2.0 * k + a + 1.0;
    }
    for (int k = 1; k < n; ++k) {
        off[static_cast<std::size_t>(k - 1)] = std::sqrt(k * (k + a));
    }
    auto nw = detail::golub_welsch(diag, off, 1.0);
    double total = 0.0;
    for (double w : nw.weights) {
        total += w;
    }
    ChiSqRule rule;
    rule.d = d;
    rule.nodes.resize(nw.nodes.size());
    rule.weights.resize(nw.weights.size());
    for (std::size_t i = 0; i < nw.nodes.size(); ++i) {
        rule.nodes[i] = 2.0 * nw.nodes[i] / d;
        rule.weights[i] = nw.weights[i] / total;
    }
    return rule;
}

}  // namespace

double ChiSqRule::expect(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        acc += weights[i] * f(nodes[i]);
    }
    return acc;
}

std::shared_ptr<const ChiSqRule> chi_sq_rule(int d, int n) {
    if (d < 1) {
        throw InvalidInput("chi-square rule needs d >= 1");
    }
    if (n < 4) {
        throw InvalidInput("chi-square rule needs at least 4 nodes");
    }
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const ChiSqRule>> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find({d, n}); it != cache.end()) {
            return it->second;
        }
    }
    auto rule = std::make_shared<const ChiSqRule>(build_chi_sq_rule(d, n));
    std::lock_guard lock(mutex);
    return cache.try_emplace({d, n}, std::move(rule)).first->second;
}

double hat_phi(const KernelConfig& cfg, int d, double t, const ChiSqRule& rule) {
    if (rule.d != d) {
        throw InvalidInput("chi-square rule built for a different dimension");
    }
    return rule.expect([&](double q) { return phi_eval(cfg, t, q, q); });
}

double hat_phi(const KernelConfig& cfg, int d, double t) { return hat_phi(cfg, d, t, *chi_sq_rule(d)); }

SphereSpectrum gaussian_spectrum(const KernelConfig& cfg, int d, int lmax, const GaussianOptions& opts) {
    cfg.validate();
    const auto rule = chi_sq_rule(d, opts.chi_sq_nodes);
    const SphereMethod method = opts.sphere.method.value_or(default_sphere_method(d));
    if (method == SphereMethod::Taylor) {
        const std::size_t order = std::max<std::size_t>(opts.sphere.jet_order, static_cast<std::size_t>(lmax));
        Jet averaged(order);
        for (std::size_t i = 0; i < rule->count(); ++i) {
            averaged += phi_jet(cfg, order, rule->nodes[i]) * rule->weights[i];
        }
        return sphere_spectrum_from_jet(averaged, d, lmax, opts.sphere.tol);
    }
    const int n = opts.sphere.n_nodes > 0 ? opts.sphere.n_nodes : default_node_count(lmax);
    return sphere_spectrum_quadrature([&](double t) { return hat_phi(cfg, d, t, *rule); }, d, lmax, n);
}

std::vector<double> homogeneous_gaussian_spectrum(const SphereSpectrum& sphere_a, double lambda_sq, int lmax) {
    if (lmax < 0 || static_cast<std::size_t>(lmax) >= sphere_a.a.size()) {
        throw InvalidInput("lmax exceeds the supplied sphere spectrum");
    }
    if (!(lambda_sq >= 0.0)) {
        throw InvalidInput("lambda^2 must be nonnegative");
    }
    std::vector<double> out(static_cast<std::size_t>(lmax) + 1);
    for (int l = 0; l <= lmax; ++l) {
        out[static_cast<std::size_t>(l)] = lambda_sq * sphere_a.a[static_cast<std::size_t>(l)];
    }
    return out;
}

std::vector<double> homogeneous_gaussian_spectrum(const KernelConfig& cfg, const SphereSpectrum& sphere_a,
                                                  const std::function<double(double)>& radial, int lmax,
                                                  int chi_sq_nodes) {
    const double r1 = radial(1.0);
    if (!(std::abs(r1) > 0.0)) {
        throw InvalidInput("radial factor must be nonzero at q = 1");
    }
    const double phi_one = phi_eval(cfg, 1.0);
    constexpr std::array<double, 3> ts{-0.5, 0.1, 0.7};
    constexpr std::array<std::pair<double, double>, 3> qs{{{0.5, 2.0}, {1.5, 1.5}, {0.25, 0.8}}};
    for (auto [q, q2] : qs) {
        const double expected_ratio = radial(q) * radial(q2) / (r1 * r1);
        for (double t : ts) {
            const double base = phi_eval(cfg, t, 1.0, 1.0);
            if (std::abs(base) < 1e-12 * std::abs(phi_one)) {
                continue;
            }
            const double ratio = phi_eval(cfg, t, q, q2) / base;
            if (std::abs(ratio - expected_ratio) > 1e-8 * std::abs(expected_ratio)) {
                throw InvalidInput("kernel does not factor as R(q)R(q')Φ(t): ratio " + std::to_string(ratio) +
                                   " vs " + std::to_string(expected_ratio) + " at t=" + std::to_string(t));
            }
        }
    }
    const auto rule = chi_sq_rule(sphere_a.d, chi_sq_nodes);
    const double lambda_sq = rule->expect([&](double q) {
        const double r = radial(q);
        return r * r;
    });
    return homogeneous_gaussian_spectrum(sphere_a, lambda_sq / (r1 * r1), lmax);
}

}  // namespace nkspec
