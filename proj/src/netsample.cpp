#include "nkspec/netsample.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "nkspec/errors.hpp"
#include "nkspec/parallel.hpp"
#include "nkspec/rng.hpp"

namespace nkspec {

namespace {

constexpr std::uint64_t kWeightTag = 0;
constexpr std::uint64_t kBiasTag = 1;

void apply_activation(const Activation& act, Eigen::MatrixXd& h) {
    switch (act.kind) {
        case ActivationKind::Relu:
            h = h.cwiseMax(0.0);
            return;
        case ActivationKind::Erf:
            h = h.unaryExpr([](double x) { return std::erf(x); });
            return;
        case ActivationKind::Exp: {
            const double s = act.sigma;
            h = h.unaryExpr([s](double x) { return std::exp(x / s); });
            return;
        }
    }
}

}  // namespace

void ArchConfig::validate() const {
    if (input_dim < 1) {
        throw InvalidInput("arch: input_dim must be positive");
    }
    for (int w : hidden_widths) {
        if (w < 1) {
            throw InvalidInput("arch: widths must be >= 1");
        }
    }
    if (!(weight_var >= 0.0) || !(bias_var >= 0.0) || !std::isfinite(weight_var) || !std::isfinite(bias_var)) {
        throw InvalidInput("arch: variances must be finite and nonnegative");
    }
    if (activation.kind == ActivationKind::Exp && !(activation.sigma > 0.0)) {
        throw InvalidInput("arch: exp activation needs sigma > 0");
    }
}

std::vector<double> mlp_forward(const ArchConfig& arch, std::uint64_t seed, const Eigen::MatrixXd& inputs) {
    arch.validate();
    if (inputs.rows() != arch.input_dim) {
        throw InvalidInput("mlp_forward: input dimension mismatch");
    }
    const double sw = std::sqrt(arch.weight_var);
    const double sb = std::sqrt(arch.bias_var);

    std::vector<int> widths = arch.hidden_widths;
    widths.push_back(1);

    Eigen::MatrixXd act = inputs;
    int fan_in = arch.input_dim;
    for (std::size_t l = 0; l < widths.size(); ++l) {
        const int n = widths[l];
        Eigen::MatrixXd w(n, fan_in);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < fan_in; ++j) {
                w(i, j) = keyed_normal(hash_key(seed, {kWeightTag, l, static_cast<std::uint64_t>(i),
                                                       static_cast<std::uint64_t>(j)}));
            }
            b(i) = keyed_normal(hash_key(seed, {kBiasTag, l, static_cast<std::uint64_t>(i)}));
        }
        Eigen::MatrixXd h = (sw / std::sqrt(static_cast<double>(fan_in))) * (w * act);
        h.colwise() += sb * b;
        if (l + 1 < widths.size()) {
            apply_activation(arch.activation, h);
        }
        act = std::move(h);
        fan_in = n;
    }
    return {act.data(), act.data() + act.cols()};
}

Eigen::MatrixXd cube_points(int d) {
    if (d < 1 || d > kMaxCensusDim) {
        throw ResourceLimit("cube_points: d must lie in [1, 16]");
    }
    const Eigen::Index n = Eigen::Index{1} << d;
    Eigen::MatrixXd x(d, n);
    for (Eigen::Index c = 0; c < n; ++c) {
        for (int i = 0; i < d; ++i) {
            x(i, c) = ((c >> i) & 1) ? -1.0 : 1.0;
        }
    }
    return x;
}

std::uint64_t census_sample_seed(std::uint64_t base_seed, std::uint64_t i) { return hash_key(base_seed, {i}); }

std::string truth_table_id(const std::vector<bool>& plus) {
    static constexpr char kHex[] = "0123456789abcdef";
    const std::size_t nibbles = std::max<std::size_t>(1, (plus.size() + 3) / 4);
    std::string id(nibbles, '0');
    for (std::size_t q = 0; q < nibbles; ++q) {
        unsigned v = 0;
        for (std::size_t b = 0; b < 4; ++b) {
            const std::size_t x = 4 * q + b;
            if (x < plus.size() && plus[x]) {
                v |= 1U << b;
            }
        }
        // Most significant nibble first.
        id[nibbles - 1 - q] = kHex[v];
    }
    return id;
}

std::vector<bool> parse_truth_table_id(const std::string& id, int d) {
    const std::size_t n = std::size_t{1} << d;
    const std::size_t nibbles = std::max<std::size_t>(1, (n + 3) / 4);
    if (id.size() != nibbles) {
        throw InvalidInput("truth table id has wrong length");
    }
    std::vector<bool> plus(n);
    for (std::size_t q = 0; q < nibbles; ++q) {
        const char c = id[nibbles - 1 - q];
        unsigned v = 0;
        if (c >= '0' && c <= '9') {
            v = static_cast<unsigned>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            v = static_cast<unsigned>(c - 'a' + 10);
        } else {
            throw InvalidInput("truth table id: bad hex digit");
        }
        for (std::size_t b = 0; b < 4; ++b) {
            const std::size_t x = 4 * q + b;
            if (x < n) {
                plus[x] = ((v >> b) & 1U) != 0;
            }
        }
    }
    return plus;
}

bool is_odd_function(const std::string& id, int d) {
    const auto plus = parse_truth_table_id(id, d);
    const std::size_t all = plus.size() - 1;
    for (std::size_t x = 0; x < plus.size(); ++x) {
        if (plus[x] == plus[x ^ all]) {
            return false;
        }
    }
    return true;
}

CensusHistogram boolean_census(const ArchConfig& arch, long n_samples, std::uint64_t base_seed, int workers) {
    arch.validate();
    if (arch.input_dim > kMaxCensusDim) {
        throw ResourceLimit("boolean_census: d must be <= 16");
    }
    if (n_samples < 0) {
        throw InvalidInput("boolean_census: negative sample count");
    }
    const Eigen::MatrixXd x = cube_points(arch.input_dim);
    workers = std::max(1, workers);
    std::vector<CensusHistogram> local(static_cast<std::size_t>(workers));
    parallel_for(static_cast<std::size_t>(n_samples), workers, [&](int w, std::size_t i) {
        const auto out = mlp_forward(arch, census_sample_seed(base_seed, i), x);
        std::vector<bool> plus(out.size());
        auto& h = local[static_cast<std::size_t>(w)];
        for (std::size_t p = 0; p < out.size(); ++p) {
            if (out[p] == 0.0) {
                ++h.ties;
            }
            plus[p] = out[p] >= 0.0;
        }
        ++h.counts[truth_table_id(plus)];
        ++h.total;
    });
    CensusHistogram merged;
    merged.d = arch.input_dim;
    for (const auto& h : local) {
        for (const auto& [id, c] : h.counts) {
            merged.counts[id] += c;
        }
        merged.total += h.total;
        merged.ties += h.ties;
    }
    return merged;
}

std::vector<std::pair<std::string, long>> ranked_counts(const CensusHistogram& h) {
    if (h.total <= 0 || h.counts.empty()) {
        throw InvalidInput("rank_curve: empty histogram");
    }
    std::vector<std::pair<std::string, long>> entries(h.counts.begin(), h.counts.end());
    // std::map iteration is id-ordered, so a stable sort breaks count ties by id.
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return entries;
}

std::vector<std::pair<long, double>> rank_curve(const CensusHistogram& h) {
    const auto entries = ranked_counts(h);
    std::vector<std::pair<long, double>> out;
    out.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out.emplace_back(static_cast<long>(i) + 1,
                         static_cast<double>(entries[i].second) / static_cast<double>(h.total));
    }
    return out;
}

}  // namespace nkspec
