#pragma once

#include <functional>
#include <vector>

#include <boost/multiprecision/mpfr.hpp>

#include "nkspec/kernel.hpp"

namespace nkspec {

using MpReal = boost::multiprecision::mpfr_float;
using MpPhiFunction = std::function<MpReal(const MpReal&)>;

/// Largest d for which cube_spectrum(KernelConfig, d) runs in doubles.
/// Beyond it the rounding noise of the grid, amplified by binom(d,k), swamps
/// mid-degree fractional variances, so the spectrum is computed in MPFR.
inline constexpr int kDoubleCubeMaxDim = 32;

/// Working digits for which binom(d,k)·|error in μ_k| stays near 1e-14·Φ(1)
/// for every k: about log10(binom(d, d/2) 2^(-d/2)) + 20.
unsigned cube_digits10(int d);

/// Φ(t, 1, 1) with the whole recursion in MPFR at the precision of `t`.
/// Diagonals are carried in MPFR too: near c = 1 the relu duals have a
/// square-root singularity, so a double-rounded diagonal is not a harmless
/// smooth perturbation.
MpReal phi_eval_mp(const KernelConfig& cfg, const MpReal& t);

/// cube eigenvalues in `digits10`-digit arithmetic, same pass structure as
/// cube_spectrum.
std::vector<MpReal> cube_spectrum_mp(const MpPhiFunction& phi, int d, unsigned digits10);
std::vector<MpReal> cube_spectrum_mp(const KernelConfig& cfg, int d, unsigned digits10);

}  // namespace nkspec
