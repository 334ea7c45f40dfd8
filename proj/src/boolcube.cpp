#include "nkspec/boolcube.hpp"

#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>

#include "nkspec/errors.hpp"
#include "nkspec/multiprecision.hpp"
#include "cube_passes.hpp"

namespace nkspec {

namespace {

constexpr int kMaxEnumerationDim = 24;
constexpr int kMaxCoefficientDim = 40;

void require_dim(int d) {
    if (d < 1) {
        throw InvalidInput("cube dimension must be >= 1");
    }
}

void require_grid(const PhiGrid& grid) {
    require_dim(grid.d);
    if (grid.values.size() != static_cast<std::size_t>(grid.d) + 1) {
        throw InvalidInput("phi grid must have d + 1 values");
    }
    for (double v : grid.values) {
        if (std::isnan(v)) {
            throw InvalidInput("phi grid contains NaN");
        }
    }
}

// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

double mu_stable(const PhiGrid& grid, int k, [[maybe_unused]] double nonneg_tol) {
    auto check = [&](const std::vector<double>& w) {
        (void)w;
#ifndef NDEBUG
        if (nonneg_tol > 0.0) {
            for (double x : w) {
                assert(x >= -nonneg_tol && "negative finite difference of a CK/NTK profile");
            }
        }
#endif
    };
    return detail::mu_stable(grid.values, grid.d, k, check);
}

CubeSpectrum spectrum_from_grid(const PhiGrid& grid, double nonneg_tol) {
    require_grid(grid);
    CubeSpectrum s;
    s.d = grid.d;
    s.phi_one = grid.values.front();
    s.mu.resize(static_cast<std::size_t>(grid.d) + 1);
    for (int k = 0; k <= grid.d; ++k) {
        s.mu[static_cast<std::size_t>(k)] = mu_stable(grid, k, nonneg_tol);
    }
    return s;
}

}  // namespace

double binom_double(int n, int k) {
    if (k < 0 || k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double b = 1.0;
    for (int i = 0; i < k; ++i) {
        b = b * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    return b < 9e15 ? std::round(b) : b;
}

double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double CubeSpectrum::trace() const {
    CompensatedSum acc;
    for (int k = 0; k <= d; ++k) {
        const double m = mu[static_cast<std::size_t>(k)];
        if (m == 0.0) {
            continue;
        }
        const double b = binom_double(d, k);
        acc.add(std::isfinite(b) ? b * m
                                 : std::copysign(std::exp(log_binom(d, k) + std::log(std::abs(m))), m));
    }
    return acc.value();
}

PhiGrid make_phi_grid(const PhiFunction& phi, int d) {
    require_dim(d);
    PhiGrid g;
    g.d = d;
    g.values.resize(static_cast<std::size_t>(d) + 1);
    for (int r = 0; r <= d; ++r) {
        g.values[static_cast<std::size_t>(r)] = phi(g.cosine(r));
    }
    return g;
}

PhiGrid make_phi_grid(const KernelConfig& cfg, int d) {
    return make_phi_grid([&cfg](double t) { return phi_eval(cfg, t); }, d);
}

std::vector<BigInt> c_coef_row(int d, int k) {
    if (d < 0 || k < 0 || k > d) {
        throw InvalidInput("c_coef needs 0 <= k <= d");
    }
    // Multiply out (1 - x)^k (1 + x)^(d - k) one linear factor at a time.
    std::vector<BigInt> poly{1};
    poly.reserve(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i < d; ++i) {
        const int sign = i < k ? -1 : 1;
        poly.emplace_back(0);
        for (std::size_t j = poly.size() - 1; j >= 1; --j) {
            poly[j] += sign * poly[j - 1];
        }
    }
    return poly;
}

BigInt c_coef(int d, int k, int r) {
    if (r < 0 || r > d) {
        throw InvalidInput("c_coef needs 0 <= r <= d");
    }
    return c_coef_row(d, k)[static_cast<std::size_t>(r)];
}

double mu_enumerate(const PhiGrid& grid, int k) {
    require_grid(grid);
    const int d = grid.d;
    if (k < 0 || k > d) {
        throw InvalidInput("degree out of range");
    }
    if (d > kMaxEnumerationDim) {
        throw ResourceLimit("enumeration limited to d <= " + std::to_string(kMaxEnumerationDim));
    }
    // Bit i set means x_i = -1; S = {0, ..., k-1}.
    const std::uint32_t s_mask = k == 0 ? 0u : (k >= 32 ? ~0u : ((1u << k) - 1u));
    const std::uint64_t n_points = std::uint64_t{1} << d;
    CompensatedSum acc;
    for (std::uint64_t x = 0; x < n_points; ++x) {
        const auto mask = static_cast<std::uint32_t>(x);
        const double v = grid.values[static_cast<std::size_t>(std::popcount(mask))];
        acc.add((std::popcount(mask & s_mask) & 1) ? -v : v);
    }
    return std::ldexp(acc.value(), -d);
}

double mu_coefficient_sum(const PhiGrid& grid, int k) {
    require_grid(grid);
    const int d = grid.d;
    if (d > kMaxCoefficientDim) {
        throw ResourceLimit("coefficient sum limited to d <= " + std::to_string(kMaxCoefficientDim));
    }
    const auto row = c_coef_row(d, k);
    CompensatedSum acc;
    for (int r = 0; r <= d; ++r) {
        // |C| <= 2^40 here, so the conversion is exact.
        acc.add(row[static_cast<std::size_t>(r)].convert_to<double>() *
                grid.values[static_cast<std::size_t>(r)]);
    }
    return std::ldexp(acc.value(), -d);
}

double mu_reference(const PhiGrid& grid, int k) {
    require_grid(grid);
    const double by_coefficients = mu_coefficient_sum(grid, k);
    if (grid.d > kMaxEnumerationDim) {
        return by_coefficients;
    }
    const double by_enumeration = mu_enumerate(grid, k);
    double scale = 0.0;
    for (double v : grid.values) {
        scale = std::max(scale, std::abs(v));
    }
    const double tol = 1e-6 * std::max(std::abs(by_enumeration), std::abs(by_coefficients)) + 1e-13 * scale;
    if (std::abs(by_enumeration - by_coefficients) > tol) {
        throw NumericalInconsistency("mu_reference: enumeration " + std::to_string(by_enumeration) +
                                     " vs coefficient sum " + std::to_string(by_coefficients));
    }
    return by_enumeration;
}

CubeSpectrum cube_spectrum(const PhiGrid& grid) { return spectrum_from_grid(grid, 0.0); }

CubeSpectrum cube_spectrum(const PhiFunction& phi, int d) { return cube_spectrum(make_phi_grid(phi, d)); }

CubeSpectrum cube_spectrum(const KernelConfig& cfg, int d) {
    require_dim(d);
    if (d > kDoubleCubeMaxDim) {
        const auto mu = cube_spectrum_mp(cfg, d, cube_digits10(d));
        CubeSpectrum s;
        s.d = d;
        s.phi_one = phi_eval(cfg, 1.0);
        s.mu.reserve(mu.size());
        for (const auto& m : mu) {
            s.mu.push_back(m.convert_to<double>());
        }
        return s;
    }
    const PhiGrid grid = make_phi_grid(cfg, d);
    return spectrum_from_grid(grid, 1e-9 * std::abs(grid.values.front()) + 1e-300);
}

double mu_exp_closed(double sigma_sq, int d, int k) {
    require_dim(d);
    if (!(sigma_sq > 0.0)) {
        throw InvalidInput("sigma^2 must be positive");
    }
    if (k < 0 || k > d) {
        throw InvalidInput("degree out of range");
    }
    const double delta = 2.0 / d;
    const double e = std::exp(-delta / sigma_sq);
    // 2^-d (1 - e)^k (1 + e)^(d-k) exp(1/σ²), assembled in log space.
    const double log_mu = k * std::log((-std::expm1(-delta / sigma_sq)) / 2.0) +
                          (d - k) * std::log((1.0 + e) / 2.0) + 1.0 / sigma_sq;
    return std::exp(log_mu);
}

std::vector<double> fractional_variance(const CubeSpectrum& s) {
    const double total = s.trace();
    if (!(total > 0.0)) {
        throw InvalidInput("fractional variance needs a positive trace");
    }
    std::vector<double> out(s.mu.size());
    for (int k = 0; k <= s.d; ++k) {
        const double m = s.mu[static_cast<std::size_t>(k)];
        if (m == 0.0) {
            out[static_cast<std::size_t>(k)] = 0.0;
            continue;
        }
        const double b = binom_double(s.d, k);
        out[static_cast<std::size_t>(k)] =
            std::isfinite(b) ? b * m / total
                             : std::copysign(std::exp(log_binom(s.d, k) + std::log(std::abs(m)) - std::log(total)), m);
    }
    return out;
}

double reconstruct_phi(const CubeSpectrum& s, int r) {
    if (r < 0 || r > s.d) {
        throw InvalidInput("Hamming distance out of range");
    }
    // Φ((d/2 - r)Δ) = Σ_k C^{d-r,r}_k μ_k, with C^{d-r,r} the row of (1-x)^r (1+x)^(d-r).
    const auto row = c_coef_row(s.d, r);
    CompensatedSum acc;
    for (int k = 0; k <= s.d; ++k) {
        acc.add(row[static_cast<std::size_t>(k)].convert_to<double>() * s.mu[static_cast<std::size_t>(k)]);
    }
    return acc.value();
}

}  // namespace nkspec
