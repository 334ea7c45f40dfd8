#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nkspec/kernel.hpp"

namespace nkspec::cli {

enum ExitCode : int {
    kOk = 0,
    kUsageError = 2,
    kNumericalError = 3,
    kResourceError = 4,
};

enum class Distribution { Cube, Sphere, Gaussian };

Distribution parse_distribution(const std::string& name);
std::string to_string(Distribution dist);

/// Fixed 17-significant-digit formatting used for every emitted number.
std::string fmt(double v);

inline constexpr const char* kSpectrumHeader =
    "distribution,kind,activation,depth,sigw2,sigb2,d,degree,eigenvalue,fractional_variance";

/// One spectrum table cell.  Degrees run 0..min(kmax, d) on the cube and
/// 0..kmax otherwise.
struct SpectrumRequest {
    Distribution dist = Distribution::Cube;
    KernelConfig kernel{};
    int d = 0;
    int kmax = 0;
};

/// Data rows (no header, newline-terminated) for one cell.
std::string spectrum_rows(const SpectrumRequest& req);

struct SweepConfig {
    std::vector<Distribution> distributions;
    std::vector<KernelKind> kinds;
    std::vector<ActivationKind> activations;
    double exp_sigma = 1.0;
    std::vector<int> depths;
    std::vector<double> sigw2;
    std::vector<double> sigb2;
    std::vector<int> dims;
    int kmax = 0;
    std::string output;
    int workers = 0;  // 0 → environment / hardware default
    std::uint64_t seed = 0;
};

/// Validates against the documented schema; throws InvalidInput.
SweepConfig parse_sweep_config(const nlohmann::json& j);

/// FNV-1a 64-bit of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

/// Writes <output>/<distribution>.csv and <output>/manifest.json.  Files
/// written by a failed run are removed.  Returns the written CSV paths.
std::vector<std::filesystem::path> run_sweep(const SweepConfig& cfg, const nlohmann::json& raw, int workers);

/// Full command-line entry point.  args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nkspec::cli
