#include "nkspec/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "nkspec/errors.hpp"
#include "nkspec/rng.hpp"

namespace nkspec {

namespace {

void check_point_dim(int d, const char* what) {
    if (d < 1) {
        throw InvalidInput(std::string(what) + ": dimension must be positive");
    }
    if (d > kMaxPointDim) {
        throw ResourceLimit(std::string(what) + ": point representation requires d <= " +
                            std::to_string(kMaxPointDim));
    }
}

void check_subset(int d, const Subset& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < 0 || s[i] >= d) {
            throw InvalidInput("subset index out of range");
        }
        if (i > 0 && s[i] <= s[i - 1]) {
            throw InvalidInput("subset must be sorted and duplicate-free");
        }
    }
}

double mean_square(const std::vector<double>& e) {
    double s = 0.0;
    for (double v : e) {
        s += v * v;
    }
    return s / static_cast<double>(e.size());
}

bool is_diverged(double loss, double initial, double factor) {
    if (!std::isfinite(loss)) {
        return true;
    }
    return initial > 0.0 && loss > factor * initial;
}

void check_gd_options(const GdOptions& opts) {
    if (!(opts.alpha > 0.0) || !std::isfinite(opts.alpha)) {
        throw InvalidInput("learning rate must be positive");
    }
    if (opts.steps < 0) {
        throw InvalidInput("step count must be nonnegative");
    }
}

std::vector<double> degree_errors_from_points(int d, std::vector<double> e) {
    walsh_hadamard(e);
    const double scale = std::ldexp(1.0, -d);
    std::vector<double> out(static_cast<std::size_t>(d) + 1, 0.0);
    for (std::size_t m = 0; m < e.size(); ++m) {
        const double c = e[m] * scale;
        out[static_cast<std::size_t>(std::popcount(m))] += c * c;
    }
    return out;
}

// Applies the uniform-measure integral operator: (Kv)(x) = 2^-d Σ_y Φ(x,y) v(y).
std::vector<double> apply_gram(const GramByDistance& gram, const std::vector<double>& v) {
    const std::size_t n = v.size();
    const double scale = std::ldexp(1.0, -gram.d);
    std::vector<double> out(n, 0.0);
    for (std::size_t x = 0; x < n; ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            acc += gram.values[static_cast<std::size_t>(std::popcount(x ^ y))] * v[y];
        }
        out[x] = acc * scale;
    }
    return out;
}

}  // namespace

GramByDistance GramByDistance::from_grid(const PhiGrid& grid) {
    GramByDistance g{grid.d, grid.values};
    g.validate();
    return g;
}

void GramByDistance::validate() const {
    if (d < 1 || values.size() != static_cast<std::size_t>(d) + 1) {
        throw InvalidInput("gram: expected d + 1 distance values");
    }
    const double top = std::abs(values[0]);
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InvalidInput("gram: non-finite entry");
        }
        if (std::abs(v) > top * (1.0 + 1e-12)) {
            throw InvalidInput("gram: values[0] must dominate in absolute value");
        }
    }
}

double GramByDistance::at(CubePoint x, CubePoint y) const {
    return values[static_cast<std::size_t>(std::popcount(x ^ y))];
}

void walsh_hadamard(std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n == 0 || !std::has_single_bit(n)) {
        throw InvalidInput("walsh_hadamard: length must be a power of two");
    }
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = v[j];
                const double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
}

CubePoint subset_mask(const Subset& s) {
    CubePoint m = 0;
    int prev = -1;
    for (int i : s) {
        if (i < 0 || i >= 32) {
            throw InvalidInput("subset_mask: index out of range");
        }
        if (i <= prev) {
            throw InvalidInput("subset_mask: indices must be strictly increasing");
        }
        prev = i;
        m |= CubePoint{1} << i;
    }
    return m;
}

Subset mask_subset(CubePoint mask) {
    Subset s;
    for (int i = 0; i < 32; ++i) {
        if ((mask >> i) & 1U) {
            s.push_back(i);
        }
    }
    return s;
}

double character_value(const Subset& s, CubePoint x) {
    int parity = 0;
    for (int i : s) {
        if (i < 32) {
            parity ^= static_cast<int>((x >> i) & 1U);
        }
    }
    return parity != 0 ? -1.0 : 1.0;
}

CubeFunction CubeFunction::from_points(int d, std::vector<double> values) {
    check_point_dim(d, "CubeFunction");
    if (values.size() != (std::size_t{1} << d)) {
        throw InvalidInput("CubeFunction: expected 2^d point values");
    }
    CubeFunction f;
    f.d_ = d;
    f.points_ = std::move(values);
    return f;
}

CubeFunction CubeFunction::from_fourier(int d, std::map<Subset, double> coeffs) {
    if (d < 1) {
        throw InvalidInput("CubeFunction: dimension must be positive");
    }
    for (const auto& [s, c] : coeffs) {
        check_subset(d, s);
        if (!std::isfinite(c)) {
            throw InvalidInput("CubeFunction: non-finite coefficient");
        }
    }
    CubeFunction f;
    f.d_ = d;
    f.fourier_ = std::move(coeffs);
    return f;
}

CubeFunction CubeFunction::character(int d, Subset s) {
    std::map<Subset, double> c;
    c.emplace(std::move(s), 1.0);
    return from_fourier(d, std::move(c));
}

std::vector<double> CubeFunction::points() const {
    if (points_) {
        return *points_;
    }
    check_point_dim(d_, "CubeFunction::points");
    std::vector<double> v(std::size_t{1} << d_, 0.0);
    for (const auto& [s, c] : *fourier_) {
        v[subset_mask(s)] += c;
    }
    walsh_hadamard(v);
    return v;
}

std::map<Subset, double> CubeFunction::fourier() const {
    if (fourier_) {
        return *fourier_;
    }
    std::vector<double> v = *points_;
    walsh_hadamard(v);
    const double scale = std::ldexp(1.0, -d_);
    std::map<Subset, double> out;
    for (std::size_t m = 0; m < v.size(); ++m) {
        out.emplace(mask_subset(static_cast<CubePoint>(m)), v[m] * scale);
    }
    return out;
}

double CubeFunction::evaluate(CubePoint x) const {
    if (points_) {
        if (x >= points_->size()) {
            throw InvalidInput("CubeFunction::evaluate: point out of range");
        }
        return (*points_)[x];
    }
    if (d_ > 32) {
        throw ResourceLimit("CubeFunction::evaluate: d > 32");
    }
    double acc = 0.0;
    for (const auto& [s, c] : *fourier_) {
        acc += c * character_value(s, x);
    }
    return acc;
}

std::vector<TrajectoryRecord> gd_trajectory(const CubeSpectrum& spectrum, const CubeFunction& target,
                                            const GdOptions& opts) {
    check_gd_options(opts);
    const int d = spectrum.d;
    if (target.dim() != d || (opts.initial && opts.initial->dim() != d)) {
        throw InvalidInput("gd_trajectory: dimension mismatch");
    }

    // Error coefficients e_S = ĝ_S - ĝ*_S, grouped by degree.
    std::map<Subset, double> err;
    for (const auto& [s, c] : target.fourier()) {
        err[s] -= c;
    }
    if (opts.initial) {
        for (const auto& [s, c] : opts.initial->fourier()) {
            err[s] += c;
        }
    }
    std::vector<double> e0(static_cast<std::size_t>(d) + 1, 0.0);
    for (const auto& [s, c] : err) {
        e0[s.size()] += c * c;
    }
    std::vector<double> factor(static_cast<std::size_t>(d) + 1);
    for (int k = 0; k <= d; ++k) {
        const double f = 1.0 - 2.0 * opts.alpha * spectrum.mu[static_cast<std::size_t>(k)];
        factor[static_cast<std::size_t>(k)] = f * f;
    }

    std::vector<TrajectoryRecord> out;
    out.reserve(static_cast<std::size_t>(opts.steps) + 1);
    std::vector<double> e = e0;
    double initial = 0.0;
    for (int t = 0; t <= opts.steps; ++t) {
        if (t > 0) {
            for (std::size_t k = 0; k < e.size(); ++k) {
                if (e[k] != 0.0) {
                    e[k] *= factor[k];
                }
            }
        }
        double loss = 0.0;
        for (double v : e) {
            loss += v;
        }
        if (t == 0) {
            initial = loss;
        }
        TrajectoryRecord r;
        r.step = t;
        r.loss = loss;
        r.diverged = is_diverged(loss, initial, opts.divergence_factor);
        if (opts.record_degree_errors) {
            r.degree_error = e;
        }
        out.push_back(std::move(r));
        if (out.back().diverged && opts.stop_on_divergence) {
            break;
        }
    }
    return out;
}

std::vector<TrajectoryRecord> gd_trajectory(const GramByDistance& gram, const CubeFunction& target,
                                            const GdOptions& opts) {
    check_gd_options(opts);
    gram.validate();
    check_point_dim(gram.d, "gd_trajectory (matrix mode)");
    if (target.dim() != gram.d || (opts.initial && opts.initial->dim() != gram.d)) {
        throw InvalidInput("gd_trajectory: dimension mismatch");
    }
    const std::vector<double> gstar = target.points();
    std::vector<double> g = opts.initial ? opts.initial->points() : std::vector<double>(gstar.size(), 0.0);

    std::vector<TrajectoryRecord> out;
    out.reserve(static_cast<std::size_t>(opts.steps) + 1);
    std::vector<double> e(g.size());
    double initial = 0.0;
    for (int t = 0;; ++t) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            e[i] = g[i] - gstar[i];
        }
        const double loss = mean_square(e);
        if (t == 0) {
            initial = loss;
        }
        TrajectoryRecord r;
        r.step = t;
        r.loss = loss;
        r.diverged = is_diverged(loss, initial, opts.divergence_factor);
        if (opts.record_degree_errors) {
            r.degree_error = degree_errors_from_points(gram.d, e);
        }
        out.push_back(std::move(r));
        if (t == opts.steps || (out.back().diverged && opts.stop_on_divergence)) {
            break;
        }
        const std::vector<double> ke = apply_gram(gram, e);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] -= 2.0 * opts.alpha * ke[i];
        }
    }
    return out;
}

std::vector<TrajectoryRecord> masked_gd_trajectory(const GramByDistance& gram, const std::vector<CubePoint>& train,
                                                   const CubeFunction& target, const GdOptions& opts) {
    check_gd_options(opts);
    gram.validate();
    check_point_dim(gram.d, "masked_gd_trajectory");
    if (target.dim() != gram.d || (opts.initial && opts.initial->dim() != gram.d)) {
        throw InvalidInput("masked_gd_trajectory: dimension mismatch");
    }
    if (train.empty()) {
        throw InvalidInput("masked_gd_trajectory: empty train set");
    }
    const std::size_t n = std::size_t{1} << gram.d;
    for (CubePoint p : train) {
        if (p >= n) {
            throw InvalidInput("masked_gd_trajectory: train point out of range");
        }
    }
    const std::vector<double> gstar = target.points();
    std::vector<double> g = opts.initial ? opts.initial->points() : std::vector<double>(n, 0.0);
    const double step = 2.0 * opts.alpha / static_cast<double>(train.size());

    std::vector<TrajectoryRecord> out;
    out.reserve(static_cast<std::size_t>(opts.steps) + 1);
    std::vector<double> e(n);
    std::vector<double> e_train(train.size());
    double initial = 0.0;
    for (int t = 0;; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            e[i] = g[i] - gstar[i];
        }
        double train_loss = 0.0;
        for (std::size_t j = 0; j < train.size(); ++j) {
            e_train[j] = e[train[j]];
            train_loss += e_train[j] * e_train[j];
        }
        train_loss /= static_cast<double>(train.size());
        const double loss = mean_square(e);
        if (t == 0) {
            initial = loss;
        }
        TrajectoryRecord r;
        r.step = t;
        r.loss = loss;
        r.train_loss = train_loss;
        r.diverged = is_diverged(loss, initial, opts.divergence_factor);
        if (opts.record_degree_errors) {
            r.degree_error = degree_errors_from_points(gram.d, e);
        }
        out.push_back(std::move(r));
        if (t == opts.steps || (out.back().diverged && opts.stop_on_divergence)) {
            break;
        }
        for (std::size_t x = 0; x < n; ++x) {
            double acc = 0.0;
            for (std::size_t j = 0; j < train.size(); ++j) {
                acc += gram.at(static_cast<CubePoint>(x), train[j]) * e_train[j];
            }
            g[x] -= step * acc;
        }
    }
    return out;
}

GpPosterior::GpPosterior(const GramByDistance& gram, std::vector<CubePoint> train, const std::vector<double>& values)
    : gram_(gram), train_(std::move(train)) {
    gram_.validate();
    const auto m = static_cast<Eigen::Index>(train_.size());
    if (m == 0 || values.size() != train_.size()) {
        throw InvalidInput("gp_posterior: need one value per train point");
    }
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            k(i, j) = gram_.at(train_[static_cast<std::size_t>(i)], train_[static_cast<std::size_t>(j)]);
        }
    }
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(values.data(), m);

    auto well_posed = [](const Eigen::LDLT<Eigen::MatrixXd>& f) {
        if (f.info() != Eigen::Success || !f.isPositive()) {
            return false;
        }
        const Eigen::VectorXd dd = f.vectorD();
        const double top = dd.cwiseAbs().maxCoeff();
        return top > 0.0 && dd.minCoeff() > 1e-14 * top;
    };

    Eigen::LDLT<Eigen::MatrixXd> ldlt(k);
    if (!well_posed(ldlt)) {
        ridge_used_ = true;
        k.diagonal().array() += 1e-10 * gram_.values[0];
        ldlt.compute(k);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
            throw NumericalInconsistency("gp_posterior: train Gram matrix singular even with ridge");
        }
    }
    const Eigen::VectorXd c = ldlt.solve(y);
    coef_.assign(c.data(), c.data() + c.size());
}

double GpPosterior::mean(CubePoint query) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < train_.size(); ++j) {
        acc += gram_.at(query, train_[j]) * coef_[j];
    }
    return acc;
}

double gp_posterior_mean(const GramByDistance& gram, const std::vector<CubePoint>& train,
                         const std::vector<double>& values, CubePoint query) {
    return GpPosterior(gram, train, values).mean(query);
}

CubeFunction gp_sample(const CubeSpectrum& spectrum, std::uint64_t seed, int max_degree) {
    const int d = spectrum.d;
    if (max_degree < 0 || max_degree > d) {
        throw InvalidInput("gp_sample: support degree must lie in [0, d]");
    }
    double support = 0.0;
    for (int k = 0; k <= max_degree; ++k) {
        support += binom_double(d, k);
    }
    if (support > 1e6) {
        throw ResourceLimit("gp_sample: support exceeds 1e6 subsets");
    }
    std::map<Subset, double> coeffs;
    for (int k = 0; k <= max_degree; ++k) {
        const double mu = spectrum.mu[static_cast<std::size_t>(k)];
        if (mu < 0.0) {
            throw InvalidInput("gp_sample: negative eigenvalue");
        }
        const double amp = std::sqrt(mu);
        // Walk all k-subsets in lexicographic order.
        Subset s(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            s[static_cast<std::size_t>(i)] = i;
        }
        while (true) {
            std::uint64_t key = hash_key(seed, {static_cast<std::uint64_t>(k)});
            for (int i : s) {
                key = hash_combine(key, static_cast<std::uint64_t>(i));
            }
            coeffs.emplace(s, amp * keyed_normal(key));
            int i = k - 1;
            while (i >= 0 && s[static_cast<std::size_t>(i)] == d - k + i) {
                --i;
            }
            if (i < 0) {
                break;
            }
            ++s[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j) {
                s[static_cast<std::size_t>(j)] = s[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
    }
    return CubeFunction::from_fourier(d, std::move(coeffs));
}

double max_lr(const CubeSpectrum& spectrum, int n_outputs, MaxLrMode mode, double phi_at_zero) {
    if (n_outputs < 1) {
        throw InvalidInput("max_lr: n_outputs must be positive");
    }
    if (!(spectrum.trace() > 0.0)) {
        throw InvalidInput("max_lr: spectrum trace must be positive");
    }
    if (mode == MaxLrMode::PhiZero) {
        if (!(phi_at_zero > 0.0)) {
            throw InvalidInput("max_lr: Φ(0) must be positive");
        }
        return n_outputs / phi_at_zero;
    }
    const double mu0 = spectrum.mu[0];
    const double mu1 = spectrum.d >= 1 ? spectrum.mu[1] : 0.0;
    const double top = std::max(mu0, mu1);
    if (!(top > 0.0)) {
        throw InvalidInput("max_lr: both μ0 and μ1 are nonpositive");
    }
    return n_outputs / top;
}

double empirical_max_lr(const std::function<bool(double)>& diverges, double upper0, double tol) {
    if (!(upper0 > 0.0) || !(tol > 0.0)) {
        throw InvalidInput("empirical_max_lr: upper bound and tolerance must be positive");
    }
    if (diverges(upper0 * 1e-9)) {
        throw NumericalInconsistency("empirical_max_lr: simulator diverges as alpha -> 0");
    }
    double lower = 0.0;
    double upper = upper0;
    while (std::abs(upper - lower) > tol) {
        const double alpha = 0.5 * (upper + lower);
        if (diverges(alpha)) {
            upper = alpha;
        } else {
            lower = alpha;
        }
    }
    return upper;
}

double empirical_max_lr(const CubeSpectrum& spectrum, const CubeFunction& target, int steps) {
    const double theory = max_lr(spectrum, 1, MaxLrMode::Exact);
    auto sim = [&](double alpha) {
        GdOptions o;
        o.alpha = alpha;
        o.steps = steps;
        o.mode = GdMode::Eigen;
        const auto traj = gd_trajectory(spectrum, target, o);
        return traj.back().diverged;
    };
    return empirical_max_lr(sim, 16.0 * theory, 0.01 * theory);
}

}  // namespace nkspec
