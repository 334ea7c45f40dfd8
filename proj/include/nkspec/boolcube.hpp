#pragma once

#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nkspec/kernel.hpp"

namespace nkspec {

using BigInt = boost::multiprecision::cpp_int;

/// Univariate kernel profile t ↦ Φ(t) on [-1, 1].
using PhiFunction = std::function<double(double)>;

/// Φ sampled on the Hamming-distance grid: values[r] = Φ(1 - 2r/d), r = 0..d.
struct PhiGrid {
    int d = 0;
    std::vector<double> values;

    /// Grid cosine for Hamming distance r.
    [[nodiscard]] double cosine(int r) const { return static_cast<double>(d - 2 * r) / d; }
};

/// Eigenvalues μ_0..μ_d of a Hamming-invariant kernel over {±1}^d; μ_k is
/// shared by all degree-k characters χ_S.
struct CubeSpectrum {
    int d = 0;
    std::vector<double> mu;
    double phi_one = 0.0;

    /// Σ_k binom(d,k) μ_k.
    [[nodiscard]] double trace() const;
};

PhiGrid make_phi_grid(const PhiFunction& phi, int d);
PhiGrid make_phi_grid(const KernelConfig& cfg, int d);

/// Coefficient of x^r in (1 - x)^k (1 + x)^(d-k).
BigInt c_coef(int d, int k, int r);
/// All coefficients r = 0..d of (1 - x)^k (1 + x)^(d-k).
std::vector<BigInt> c_coef_row(int d, int k);

/// Brute-force eigenvalue: enumerates E_x x^S Φ(Σx_i/d) over all 2^d points
/// (d ≤ 24) and the signed binomial-coefficient sum (d ≤ 40), and checks that
/// both agree.  Throws NumericalInconsistency on disagreement and
/// ResourceLimit when d is too large.
double mu_reference(const PhiGrid& grid, int k);

/// Enumeration half of mu_reference on its own (d ≤ 24), with compensated
/// summation.
double mu_enumerate(const PhiGrid& grid, int k);
/// Coefficient-sum half of mu_reference on its own (d ≤ 40).
double mu_coefficient_sum(const PhiGrid& grid, int k);

/// All eigenvalues via finite differences of step 2Δ followed by averaging
/// passes of step Δ.  Every intermediate stays on the scale of Φ itself.
CubeSpectrum cube_spectrum(const PhiGrid& grid);
CubeSpectrum cube_spectrum(const PhiFunction& phi, int d);
/// CK/NTK spectrum.  In debug builds, additionally asserts that finite
/// differences of Φ are nonnegative.  For d > kDoubleCubeMaxDim the passes
/// run in MPFR at cube_digits10(d) digits and are rounded back to double.
CubeSpectrum cube_spectrum(const KernelConfig& cfg, int d);

/// μ_k for Φ(t) = exp(t / σ²) in closed form.
double mu_exp_closed(double sigma_sq, int d, int k);

/// binom(d,k) μ_k / Σ_i binom(d,i) μ_i for every k.
std::vector<double> fractional_variance(const CubeSpectrum& s);

/// Φ at the grid point for Hamming distance r, rebuilt from the eigenvalues.
double reconstruct_phi(const CubeSpectrum& s, int r);

/// binom(n, k) as a double (may be +inf for very large n).
double binom_double(int n, int k);
/// log binom(n, k).
double log_binom(int n, int k);

}  // namespace nkspec
