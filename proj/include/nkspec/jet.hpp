#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nkspec {

/// Truncated Taylor series c_0 + c_1 t + ... + c_N t^N about t = 0, where
/// c_n = f^(n)(0) / n!.  All arithmetic is truncated at order N; binary
/// operations require both operands to carry the same order.
class Jet {
public:
    Jet() = default;

    /// Zero jet of the given order.
    explicit Jet(std::size_t order);
    explicit Jet(std::vector<double> coeffs);

    static Jet constant(double value, std::size_t order);
    /// The identity t ↦ t.
    static Jet variable(std::size_t order);

    [[nodiscard]] std::size_t order() const noexcept { return coeffs_.size() - 1; }
    [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] double operator[](std::size_t n) const { return coeffs_.at(n); }
    [[nodiscard]] double constant_term() const noexcept { return coeffs_.front(); }

    /// Horner evaluation of the truncated polynomial.
    [[nodiscard]] double evaluate(double t) const noexcept;
    /// d/dt, dropping the order by one.
    [[nodiscard]] Jet derivative() const;

    Jet& operator+=(const Jet& other);
    Jet& operator-=(const Jet& other);
    Jet& operator+=(double s);
    Jet& operator*=(double s);

private:
    std::vector<double> coeffs_{0.0};
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, Jet a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
/// Cauchy product truncated at the common order.
Jet operator*(const Jet& a, const Jet& b);

Jet jet_add(const Jet& a, const Jet& b);
Jet jet_scale(const Jet& a, double s);
Jet jet_mul(const Jet& a, const Jet& b);

enum class Elementary { Sqrt, Recip, Exp, Arcsin, Arccos };

/// Jet of fn∘u.  The constant term u_0 must lie in the open domain of fn
/// (u_0 > 0 for Sqrt and Recip, |u_0| < 1 for Arcsin and Arccos); otherwise
/// DomainError is thrown.
Jet jet_elementary(Elementary fn, const Jet& u);

Jet sqrt(const Jet& u);
Jet recip(const Jet& u);
Jet exp(const Jet& u);
Jet asin(const Jet& u);
Jet acos(const Jet& u);

}  // namespace nkspec
