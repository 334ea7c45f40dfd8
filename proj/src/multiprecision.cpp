#include "nkspec/multiprecision.hpp"

#include <cmath>

#include "cube_passes.hpp"
#include "nkspec/errors.hpp"

namespace nkspec {

namespace {

class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned digits10) : saved_(MpReal::default_precision()) {
        MpReal::default_precision(digits10);
    }
    ~PrecisionGuard() { MpReal::default_precision(saved_); }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    unsigned saved_;
};

}  // namespace

unsigned cube_digits10(int d) {
    if (d < 1) {
        throw InvalidInput("cube dimension must be >= 1");
    }
    const int h = d / 2;
    const double lg = (std::lgamma(d + 1.0) - std::lgamma(h + 1.0) - std::lgamma(d - h + 1.0)) / std::log(10.0) -
                      h * std::log10(2.0);
    return static_cast<unsigned>(std::ceil(std::max(lg, 0.0))) + 20U;
}

std::vector<MpReal> cube_spectrum_mp(const MpPhiFunction& phi, int d, unsigned digits10) {
    if (d < 1) {
        throw InvalidInput("cube dimension must be >= 1");
    }
    if (digits10 < 16) {
        throw InvalidInput("cube_spectrum_mp: need at least 16 digits");
    }
    PrecisionGuard guard(digits10);
    std::vector<MpReal> grid(static_cast<std::size_t>(d) + 1);
    for (int r = 0; r <= d; ++r) {
        const MpReal t = MpReal(d - 2 * r) / d;
        grid[static_cast<std::size_t>(r)] = phi(t);
        if (boost::multiprecision::isnan(grid[static_cast<std::size_t>(r)])) {
            throw InvalidInput("phi grid contains NaN");
        }
    }
    std::vector<MpReal> mu;
    mu.reserve(grid.size());
    for (int k = 0; k <= d; ++k) {
        mu.push_back(detail::mu_stable(grid, d, k, [](const auto&) {}));
    }
    return mu;
}

std::vector<MpReal> cube_spectrum_mp(const KernelConfig& cfg, int d, unsigned digits10) {
    cfg.validate();
    return cube_spectrum_mp([&cfg](const MpReal& t) { return phi_eval_mp(cfg, t); }, d, digits10);
}

}  // namespace nkspec
