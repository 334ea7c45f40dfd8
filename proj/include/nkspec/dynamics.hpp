#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "nkspec/boolcube.hpp"

namespace nkspec {

/// Cube points are bitmasks: bit i set means x_i = -1.
using CubePoint = std::uint32_t;
/// Sorted, duplicate-free coordinate indices.
using Subset = std::vector<int>;

inline constexpr int kMaxPointDim = 14;

/// Kernel value by Hamming distance, r = 0..d.
struct GramByDistance {
    int d = 0;
    std::vector<double> values;

    static GramByDistance from_grid(const PhiGrid& grid);
    /// Checks values[0] dominates in absolute value (PSD neural kernels).
    void validate() const;
    [[nodiscard]] double at(CubePoint x, CubePoint y) const;
};

/// A real function on {±1}^d held as point values (d ≤ 14) or as Fourier
/// coefficients on an explicit support; the two convert exactly through the
/// Walsh basis.
class CubeFunction {
public:
    static CubeFunction from_points(int d, std::vector<double> values);
    static CubeFunction from_fourier(int d, std::map<Subset, double> coeffs);
    /// χ_S
    static CubeFunction character(int d, Subset s);

    [[nodiscard]] int dim() const { return d_; }
    [[nodiscard]] bool has_points() const { return points_.has_value(); }

    [[nodiscard]] std::vector<double> points() const;
    [[nodiscard]] std::map<Subset, double> fourier() const;
    [[nodiscard]] double evaluate(CubePoint x) const;

private:
    CubeFunction() = default;
    int d_ = 0;
    std::optional<std::vector<double>> points_;
    std::optional<std::map<Subset, double>> fourier_;
};

/// In-place fast Walsh–Hadamard transform (unnormalized).
void walsh_hadamard(std::vector<double>& v);

CubePoint subset_mask(const Subset& s);
Subset mask_subset(CubePoint mask);
double character_value(const Subset& s, CubePoint x);

struct TrajectoryRecord {
    int step = 0;
    double loss = 0.0;
    /// Σ_{|S|=k} (g - g*)^_S² per degree k; empty unless requested.
    std::vector<double> degree_error;
    bool diverged = false;
    /// Masked runs only: mean squared error over the training points.
    std::optional<double> train_loss;
};

enum class GdMode { Matrix, Eigen };

struct GdOptions {
    double alpha = 0.0;
    int steps = 0;
    GdMode mode = GdMode::Eigen;
    bool record_degree_errors = false;
    /// Diverged once loss exceeds this multiple of the initial loss.
    double divergence_factor = 1e6;
    /// Stop at the first diverged record.
    bool stop_on_divergence = true;
    /// g⁰; zero when unset.
    std::optional<CubeFunction> initial;
};

/// Population gradient descent g ← g - 2αK(g - g*) with K the integral
/// operator under the uniform measure.  Records steps 0..steps.
std::vector<TrajectoryRecord> gd_trajectory(const CubeSpectrum& spectrum, const CubeFunction& target,
                                            const GdOptions& opts);
std::vector<TrajectoryRecord> gd_trajectory(const GramByDistance& gram, const CubeFunction& target,
                                            const GdOptions& opts);

/// g ← g - (2α/|X|) K·D_train (g - g*).  Records population and train loss.
std::vector<TrajectoryRecord> masked_gd_trajectory(const GramByDistance& gram, const std::vector<CubePoint>& train,
                                                   const CubeFunction& target, const GdOptions& opts);

/// Kernel-regression mean K(x, X) K(X, X)^{-1} f*(X).  Falls back to a
/// ridge of 1e-10·Φ(1) when K(X, X) is numerically singular.
class GpPosterior {
public:
    GpPosterior(const GramByDistance& gram, std::vector<CubePoint> train, const std::vector<double>& values);

    [[nodiscard]] double mean(CubePoint query) const;
    [[nodiscard]] bool ridge_used() const { return ridge_used_; }

private:
    GramByDistance gram_;
    std::vector<CubePoint> train_;
    std::vector<double> coef_;
    bool ridge_used_ = false;
};

double gp_posterior_mean(const GramByDistance& gram, const std::vector<CubePoint>& train,
                         const std::vector<double>& values, CubePoint query);

/// GP sample Σ_S √μ_|S| ω_S χ_S over all |S| ≤ max_degree; ω_S is keyed on
/// (seed, S) so samples are reproducible independent of enumeration order.
CubeFunction gp_sample(const CubeSpectrum& spectrum, std::uint64_t seed, int max_degree);

enum class MaxLrMode { Exact, PhiZero };

/// Exact: n / max(μ_0, μ_1).  PhiZero: n / Φ(0).
double max_lr(const CubeSpectrum& spectrum, int n_outputs, MaxLrMode mode, double phi_at_zero = 0.0);

/// Bisection on a divergence oracle: sim(α) returns true if training at α
/// diverges.  Starts from [0, upper0] and returns the final upper bracket.
double empirical_max_lr(const std::function<bool(double)>& diverges, double upper0, double tol);

/// Bracketed bisection on exact eigen-mode dynamics: upper0 = 16× and
/// tol = 1% of the exact prediction, `steps` iterations per probe.
double empirical_max_lr(const CubeSpectrum& spectrum, const CubeFunction& target, int steps = 1000);

}  // namespace nkspec
