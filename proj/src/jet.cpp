#include "nkspec/jet.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "nkspec/errors.hpp"

namespace nkspec {

namespace {

void require_same_order(const Jet& a, const Jet& b) {
    if (a.order() != b.order()) {
        throw InvalidInput("jet order mismatch: " + std::to_string(a.order()) + " vs " +
                           std::to_string(b.order()));
    }
}

// Integrate p (order N-1) into a jet of order N with the given constant term.
Jet integrate(const Jet& p, double constant) {
    std::vector<double> c(p.order() + 2);
    c[0] = constant;
    for (std::size_t n = 1; n < c.size(); ++n) {
        c[n] = p[n - 1] / static_cast<double>(n);
    }
    return Jet(std::move(c));
}

Jet truncate(const Jet& a, std::size_t order) {
    auto src = a.coeffs();
    return Jet(std::vector<double>(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(order + 1)));
}

Jet jet_sqrt(const Jet& u) {
    const double u0 = u.constant_term();
    if (!(u0 > 0.0)) {
        throw DomainError("sqrt of a jet with constant term " + std::to_string(u0));
    }
    const std::size_t n_max = u.order();
    std::vector<double> y(n_max + 1);
    y[0] = std::sqrt(u0);
    // y*y = u
    for (std::size_t n = 1; n <= n_max; ++n) {
        double acc = u[n];
        for (std::size_t j = 1; j < n; ++j) {
            acc -= y[j] * y[n - j];
        }
        y[n] = acc / (2.0 * y[0]);
    }
    return Jet(std::move(y));
}

Jet jet_recip(const Jet& u) {
    const double u0 = u.constant_term();
    if (!(u0 > 0.0)) {
        throw DomainError("reciprocal of a jet with constant term " + std::to_string(u0));
    }
    const std::size_t n_max = u.order();
    std::vector<double> y(n_max + 1);
    y[0] = 1.0 / u0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            acc += u[j] * y[n - j];
        }
        y[n] = -acc / u0;
    }
    return Jet(std::move(y));
}

Jet jet_exp(const Jet& u) {
    // y' = y u'  =>  n y_n = sum_{j=1}^{n} j u_j y_{n-j}
    const std::size_t n_max = u.order();
    std::vector<double> y(n_max + 1);
    y[0] = std::exp(u.constant_term());
    for (std::size_t n = 1; n <= n_max; ++n) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= n; ++j) {
            acc += static_cast<double>(j) * u[j] * y[n - j];
        }
        y[n] = acc / static_cast<double>(n);
    }
    return Jet(std::move(y));
}

Jet jet_asin(const Jet& u) {
    const double u0 = u.constant_term();
    if (!(std::abs(u0) < 1.0)) {
        throw DomainError("arcsin of a jet with constant term " + std::to_string(u0));
    }
    if (u.order() == 0) {
        return Jet::constant(std::asin(u0), 0);
    }
    // (asin u)' = u' / sqrt(1 - u^2)
    const Jet du = u.derivative();
    const Jet lower = truncate(u, u.order() - 1);
    const Jet w = jet_recip(jet_sqrt(1.0 - lower * lower));
    return integrate(du * w, std::asin(u0));
}

}  // namespace

Jet::Jet(std::size_t order) : coeffs_(order + 1, 0.0) {}

Jet::Jet(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        throw InvalidInput("a jet needs at least one coefficient");
    }
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw InvalidInput("jet coefficients must be finite");
        }
    }
}

Jet Jet::constant(double value, std::size_t order) {
    Jet j(order);
    j.coeffs_[0] = value;
    return j;
}

Jet Jet::variable(std::size_t order) {
    Jet j(order);
    if (order >= 1) {
        j.coeffs_[1] = 1.0;
    }
    return j;
}

double Jet::evaluate(double t) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * t + *it;
    }
    return acc;
}

Jet Jet::derivative() const {
    if (order() == 0) {
        return Jet(0);
    }
    std::vector<double> d(order());
    for (std::size_t n = 0; n < d.size(); ++n) {
        d[n] = static_cast<double>(n + 1) * coeffs_[n + 1];
    }
    return Jet(std::move(d));
}

Jet& Jet::operator+=(const Jet& other) {
    require_same_order(*this, other);
    for (std::size_t n = 0; n < coeffs_.size(); ++n) {
        coeffs_[n] += other.coeffs_[n];
    }
    return *this;
}

Jet& Jet::operator-=(const Jet& other) {
    require_same_order(*this, other);
    for (std::size_t n = 0; n < coeffs_.size(); ++n) {
        coeffs_[n] -= other.coeffs_[n];
    }
    return *this;
}

Jet& Jet::operator+=(double s) {
    coeffs_[0] += s;
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (double& c : coeffs_) {
        c *= s;
    }
    return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a += -s; }
Jet operator-(double s, Jet a) {
    a *= -1.0;
    return a += s;
}
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }

Jet operator*(const Jet& a, const Jet& b) {
    require_same_order(a, b);
    const std::size_t n_max = a.order();
    std::vector<double> c(n_max + 1, 0.0);
    for (std::size_t i = 0; i <= n_max; ++i) {
        const double ai = a[i];
        if (ai == 0.0) {
            continue;
        }
        for (std::size_t j = 0; i + j <= n_max; ++j) {
            c[i + j] += ai * b[j];
        }
    }
    return Jet(std::move(c));
}

Jet jet_add(const Jet& a, const Jet& b) { return a + b; }
Jet jet_scale(const Jet& a, double s) { return a * s; }
Jet jet_mul(const Jet& a, const Jet& b) { return a * b; }

Jet jet_elementary(Elementary fn, const Jet& u) {
    switch (fn) {
        case Elementary::Sqrt: return jet_sqrt(u);
        case Elementary::Recip: return jet_recip(u);
        case Elementary::Exp: return jet_exp(u);
        case Elementary::Arcsin: return jet_asin(u);
        case Elementary::Arccos: return std::numbers::pi / 2.0 - jet_asin(u);
    }
    throw InvalidInput("unknown elementary function");
}

Jet sqrt(const Jet& u) { return jet_elementary(Elementary::Sqrt, u); }
Jet recip(const Jet& u) { return jet_elementary(Elementary::Recip, u); }
Jet exp(const Jet& u) { return jet_elementary(Elementary::Exp, u); }
Jet asin(const Jet& u) { return jet_elementary(Elementary::Arcsin, u); }
Jet acos(const Jet& u) { return jet_elementary(Elementary::Arccos, u); }

}  // namespace nkspec
