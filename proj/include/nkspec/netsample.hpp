#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nkspec/kernel.hpp"

namespace nkspec {

/// Scalar-output MLP in NTK parametrization:
///   h¹ = σ_w/√d W¹x + σ_b b¹,  h^l = σ_w/√n W^l φ(h^{l-1}) + σ_b b^l.
struct ArchConfig {
    int input_dim = 0;
    std::vector<int> hidden_widths;
    Activation activation{};
    double weight_var = 1.0;
    double bias_var = 0.0;

    void validate() const;
    /// Matching kernel depth: hidden layers + 1.
    [[nodiscard]] int kernel_depth() const { return static_cast<int>(hidden_widths.size()) + 1; }
};

inline constexpr int kMaxCensusDim = 16;

/// Outputs for each column of `inputs` (input_dim × batch).  Weights and
/// biases are standard normals keyed by (seed, layer, row, column).
std::vector<double> mlp_forward(const ArchConfig& arch, std::uint64_t seed, const Eigen::MatrixXd& inputs);

/// All 2^d cube points as columns; column index bit i set means x_i = -1.
Eigen::MatrixXd cube_points(int d);

struct CensusHistogram {
    int d = 0;
    /// Function id (hex of the 2^d-bit truth table) → count.
    std::map<std::string, long> counts;
    long total = 0;
    /// Outputs that were exactly zero (thresholded to +1).
    long ties = 0;
};

/// Per-sample seed for sample i of a census.
std::uint64_t census_sample_seed(std::uint64_t base_seed, std::uint64_t i);

/// Hex identifier of a sign pattern; bit x is set when the output at point x
/// thresholds to +1.
std::string truth_table_id(const std::vector<bool>& plus);
/// Inverse of truth_table_id.
std::vector<bool> parse_truth_table_id(const std::string& id, int d);
/// f(-x) = -f(x) for every cube point.
bool is_odd_function(const std::string& id, int d);

CensusHistogram boolean_census(const ArchConfig& arch, long n_samples, std::uint64_t base_seed, int workers = 1);

/// (id, count) sorted by descending count, ties broken by id.
std::vector<std::pair<std::string, long>> ranked_counts(const CensusHistogram& h);

/// (rank, probability) sorted by descending count, ties broken by id.
std::vector<std::pair<long, double>> rank_curve(const CensusHistogram& h);

}  // namespace nkspec
