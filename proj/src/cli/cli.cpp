#include "nkspec/cli.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "nkspec/boolcube.hpp"
#include "nkspec/dynamics.hpp"
#include "nkspec/errors.hpp"
#include "nkspec/gaussian.hpp"
#include "nkspec/netsample.hpp"
#include "nkspec/parallel.hpp"
#include "nkspec/rng.hpp"
#include "nkspec/sphere.hpp"
#include "nkspec/version.hpp"

namespace nkspec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

Distribution parse_distribution(const std::string& name) {
    if (name == "cube") {
        return Distribution::Cube;
    }
    if (name == "sphere") {
        return Distribution::Sphere;
    }
    if (name == "gaussian") {
        return Distribution::Gaussian;
    }
    throw InvalidInput("unknown distribution '" + name + "' (expected cube, sphere or gaussian)");
}

std::string to_string(Distribution dist) {
    switch (dist) {
        case Distribution::Cube:
            return "cube";
        case Distribution::Sphere:
            return "sphere";
        case Distribution::Gaussian:
            return "gaussian";
    }
    return "?";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string kernel_columns(const KernelConfig& k) {
    std::string s;
    s += std::string(nkspec::to_string(k.kind)) + ',';
    s += std::string(nkspec::to_string(k.activation.kind)) + ',';
    s += std::to_string(k.depth) + ',';
    s += fmt(k.weight_var) + ',';
    s += fmt(k.bias_var);
    return s;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw ResourceLimit("cannot open '" + path + "' for writing");
    }
    f << text;
    if (!f.flush()) {
        throw ResourceLimit("failed writing '" + path + "'");
    }
}

// Kernel options shared by several subcommands.
struct KernelArgs {
    std::string kind = "ck";
    std::string act = "relu";
    int depth = 1;
    double sigw2 = 1.0;
    double sigb2 = 0.0;
    double exp_sigma = 1.0;

    void attach(CLI::App* app) {
        app->add_option("--kind", kind, "ck or ntk")->capture_default_str();
        app->add_option("--act", act, "relu, erf or exp")->capture_default_str();
        app->add_option("--depth", depth, "kernel depth (hidden layers + 1)")->capture_default_str();
        app->add_option("--sigw2", sigw2, "weight variance")->capture_default_str();
        app->add_option("--sigb2", sigb2, "bias variance")->capture_default_str();
        app->add_option("--exp-sigma", exp_sigma, "scale of the exp activation")->capture_default_str();
    }

    [[nodiscard]] KernelConfig config() const {
        KernelConfig k;
        k.kind = parse_kernel_kind(kind);
        const auto a = parse_activation(act);
        k.activation = a == ActivationKind::Relu  ? Activation::relu()
                       : a == ActivationKind::Erf ? Activation::erf()
                                                  : Activation::exp(exp_sigma);
        k.depth = depth;
        k.weight_var = sigw2;
        k.bias_var = sigb2;
        k.validate();
        return k;
    }
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        out.push_back(cur);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw InvalidInput("not an integer: '" + s + "'");
    }
    if (pos != s.size()) {
        throw InvalidInput("not an integer: '" + s + "'");
    }
    return v;
}

// "e;0;0,2" → {∅, {0}, {0,2}}
std::map<Subset, double> parse_target(const std::string& text, int d) {
    std::map<Subset, double> coeffs;
    for (const auto& part : split(text, ';')) {
        const std::string p = trim(part);
        Subset s;
        if (p != "e") {
            for (const auto& idx : split(p, ',')) {
                s.push_back(parse_int(trim(idx)));
            }
        }
        std::sort(s.begin(), s.end());
        for (int i : s) {
            if (i < 0 || i >= d) {
                throw InvalidInput("target index out of range");
            }
        }
        if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
            throw InvalidInput("target subset has a repeated index");
        }
        coeffs[s] += 1.0;
    }
    if (coeffs.empty()) {
        throw InvalidInput("empty target");
    }
    return coeffs;
}

std::vector<CubePoint> random_mask(int d, int count, std::uint64_t seed) {
    const std::size_t n = std::size_t{1} << d;
    if (count < 1 || static_cast<std::size_t>(count) > n) {
        throw InvalidInput("mask size must lie in [1, 2^d]");
    }
    std::vector<CubePoint> pts(n);
    std::iota(pts.begin(), pts.end(), CubePoint{0});
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        keys[i] = hash_key(seed, {i});
    }
    std::sort(pts.begin(), pts.end(), [&](CubePoint a, CubePoint b) { return keys[a] < keys[b]; });
    pts.resize(static_cast<std::size_t>(count));
    std::sort(pts.begin(), pts.end());
    return pts;
}

std::vector<int> parse_int_list(const json& j, const char* key) {
    std::vector<int> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number_integer()) {
                throw InvalidInput(std::string(key) + ": expected integers");
            }
            out.push_back(v.get<int>());
        }
    } else if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            if (k != "min" && k != "max" && k != "step") {
                throw InvalidInput(std::string(key) + ": unknown range key '" + k + "'");
            }
            if (!v.is_number_integer()) {
                throw InvalidInput(std::string(key) + ": range bounds must be integers");
            }
        }
        if (!j.contains("min") || !j.contains("max")) {
            throw InvalidInput(std::string(key) + ": range needs min and max");
        }
        const int lo = j["min"].get<int>();
        const int hi = j["max"].get<int>();
        const int step = j.value("step", 1);
        if (step < 1 || hi < lo) {
            throw InvalidInput(std::string(key) + ": bad range");
        }
        for (int v = lo; v <= hi; v += step) {
            out.push_back(v);
        }
    } else if (j.is_number_integer()) {
        out.push_back(j.get<int>());
    } else {
        throw InvalidInput(std::string(key) + ": expected an integer, a list or a {min,max} range");
    }
    if (out.empty()) {
        throw InvalidInput(std::string(key) + ": empty grid");
    }
    return out;
}

std::vector<double> parse_real_list(const json& j, const char* key) {
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) {
                throw InvalidInput(std::string(key) + ": expected numbers");
            }
            out.push_back(v.get<double>());
        }
    } else if (j.is_number()) {
        out.push_back(j.get<double>());
    } else {
        throw InvalidInput(std::string(key) + ": expected a number or a list");
    }
    if (out.empty()) {
        throw InvalidInput(std::string(key) + ": empty grid");
    }
    return out;
}

std::vector<std::string> parse_string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_string()) {
                throw InvalidInput(std::string(key) + ": expected strings");
            }
            out.push_back(v.get<std::string>());
        }
    } else if (j.is_string()) {
        out.push_back(j.get<std::string>());
    } else {
        throw InvalidInput(std::string(key) + ": expected a string or a list");
    }
    if (out.empty()) {
        throw InvalidInput(std::string(key) + ": empty grid");
    }
    return out;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalInconsistency*>(&e) != nullptr) {
        return kNumericalError;
    }
    if (dynamic_cast<const ResourceLimit*>(&e) != nullptr) {
        return kResourceError;
    }
    if (dynamic_cast<const InvalidInput*>(&e) != nullptr || dynamic_cast<const DomainError*>(&e) != nullptr ||
        dynamic_cast<const UnsupportedOperation*>(&e) != nullptr ||
        dynamic_cast<const json::exception*>(&e) != nullptr) {
        return kUsageError;
    }
    return 1;
}

}  // namespace

std::string spectrum_rows(const SpectrumRequest& req) {
    req.kernel.validate();
    if (req.d < 1) {
        throw InvalidInput("d must be positive");
    }
    if (req.kmax < 0) {
        throw InvalidInput("kmax must be nonnegative");
    }
    std::vector<double> eig;
    std::vector<double> fv;
    switch (req.dist) {
        case Distribution::Cube: {
            const auto s = cube_spectrum(req.kernel, req.d);
            fv = fractional_variance(s);
            eig = s.mu;
            const auto n = static_cast<std::size_t>(std::min(req.kmax, req.d)) + 1;
            eig.resize(n);
            fv.resize(n);
            break;
        }
        case Distribution::Sphere: {
            if (req.d < 3) {
                throw InvalidInput("sphere spectra need d >= 3");
            }
            const auto s = sphere_spectrum(req.kernel, req.d, req.kmax);
            fv = sphere_fractional_variance(s, phi_eval(req.kernel, 1.0));
            eig = s.a;
            break;
        }
        case Distribution::Gaussian: {
            if (req.d < 3) {
                throw InvalidInput("gaussian spectra need d >= 3");
            }
            const auto s = gaussian_spectrum(req.kernel, req.d, req.kmax);
            fv = sphere_fractional_variance(s, hat_phi(req.kernel, req.d, 1.0));
            eig = s.a;
            break;
        }
    }
    const std::string prefix = to_string(req.dist) + ',' + kernel_columns(req.kernel) + ',' + std::to_string(req.d) + ',';
    std::string rows;
    for (std::size_t k = 0; k < eig.size(); ++k) {
        rows += prefix + std::to_string(k) + ',' + fmt(eig[k]) + ',' + fmt(fv[k]) + '\n';
    }
    return rows;
}

SweepConfig parse_sweep_config(const json& j) {
    if (!j.is_object()) {
        throw InvalidInput("sweep config must be a JSON object");
    }
    static const std::vector<std::string> kKnown = {"distributions", "kinds", "activations", "exp_sigma",
                                                    "depths",        "sigw2", "sigb2",       "d",
                                                    "kmax",          "output", "workers",    "seed"};
    for (const auto& [k, v] : j.items()) {
        if (std::find(kKnown.begin(), kKnown.end(), k) == kKnown.end()) {
            throw InvalidInput("sweep config: unknown key '" + k + "'");
        }
    }
    for (const char* req : {"depths", "d", "kmax"}) {
        if (!j.contains(req)) {
            throw InvalidInput(std::string("sweep config: missing required key '") + req + "'");
        }
    }
    SweepConfig c;
    for (const auto& s : parse_string_list(j.value("distributions", json("cube")), "distributions")) {
        c.distributions.push_back(parse_distribution(s));
    }
    for (const auto& s : parse_string_list(j.value("kinds", json("ck")), "kinds")) {
        c.kinds.push_back(parse_kernel_kind(s));
    }
    for (const auto& s : parse_string_list(j.value("activations", json("relu")), "activations")) {
        c.activations.push_back(parse_activation(s));
    }
    if (j.contains("exp_sigma")) {
        if (!j["exp_sigma"].is_number()) {
            throw InvalidInput("exp_sigma must be a number");
        }
        c.exp_sigma = j["exp_sigma"].get<double>();
    }
    c.depths = parse_int_list(j["depths"], "depths");
    c.sigw2 = parse_real_list(j.value("sigw2", json(1.0)), "sigw2");
    c.sigb2 = parse_real_list(j.value("sigb2", json(0.0)), "sigb2");
    c.dims = parse_int_list(j["d"], "d");
    if (!j["kmax"].is_number_integer() || j["kmax"].get<int>() < 0) {
        throw InvalidInput("kmax must be a nonnegative integer");
    }
    c.kmax = j["kmax"].get<int>();
    if (j.contains("output")) {
        if (!j["output"].is_string()) {
            throw InvalidInput("output must be a string");
        }
        c.output = j["output"].get<std::string>();
    }
    if (j.contains("workers")) {
        if (!j["workers"].is_number_integer() || j["workers"].get<int>() < 0) {
            throw InvalidInput("workers must be a nonnegative integer");
        }
        c.workers = j["workers"].get<int>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) {
            throw InvalidInput("seed must be a nonnegative integer");
        }
        c.seed = j["seed"].get<std::uint64_t>();
    }
    for (auto dist : c.distributions) {
        for (int d : c.dims) {
            if (d < 1 || (dist != Distribution::Cube && d < 3)) {
                throw InvalidInput("sweep config: d must be >= 3 for sphere and gaussian, >= 1 for cube");
            }
        }
    }
    for (int depth : c.depths) {
        if (depth < 1) {
            throw InvalidInput("sweep config: depths must be >= 1");
        }
    }
    // Reject unsupported kernels up front rather than mid-sweep.
    for (auto kind : c.kinds) {
        for (auto act : c.activations) {
            KernelConfig k;
            k.kind = kind;
            k.activation = {act, c.exp_sigma};
            for (double w : c.sigw2) {
                for (double b : c.sigb2) {
                    k.weight_var = w;
                    k.bias_var = b;
                    k.validate();
                }
            }
        }
    }
    return c;
}

std::string config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::vector<fs::path> run_sweep(const SweepConfig& cfg, const json& raw, int workers) {
    if (cfg.output.empty()) {
        throw InvalidInput("sweep: no output directory");
    }
    // Grid cells in canonical order; output order follows this order exactly.
    std::vector<SpectrumRequest> cells;
    for (auto dist : cfg.distributions) {
        for (auto kind : cfg.kinds) {
            for (auto act : cfg.activations) {
                for (int depth : cfg.depths) {
                    for (double w : cfg.sigw2) {
                        for (double b : cfg.sigb2) {
                            for (int d : cfg.dims) {
                                SpectrumRequest r;
                                r.dist = dist;
                                r.kernel.kind = kind;
                                r.kernel.activation = {act, cfg.exp_sigma};
                                r.kernel.depth = depth;
                                r.kernel.weight_var = w;
                                r.kernel.bias_var = b;
                                r.d = d;
                                r.kmax = cfg.kmax;
                                cells.push_back(r);
                            }
                        }
                    }
                }
            }
        }
    }
    std::vector<std::string> rows(cells.size());
    parallel_for(cells.size(), workers, [&](int, std::size_t i) { rows[i] = spectrum_rows(cells[i]); });

    const fs::path dir(cfg.output);
    const bool created_dir = !fs::exists(dir);
    std::vector<fs::path> written;
    try {
        fs::create_directories(dir);
        json files = json::object();
        for (auto dist : cfg.distributions) {
            std::string text = std::string(kSpectrumHeader) + '\n';
            long count = 0;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i].dist == dist) {
                    text += rows[i];
                    count += static_cast<long>(std::count(rows[i].begin(), rows[i].end(), '\n'));
                }
            }
            const fs::path p = dir / (to_string(dist) + ".csv");
            written.push_back(p);
            std::ostringstream sink;
            write_text(p.string(), text, sink);
            files[to_string(dist)] = {{"file", p.filename().string()}, {"rows", count}};
        }
        json manifest = {
            {"library", "nkspec"},
            {"version", kVersion},
            {"config", raw},
            {"config_hash", config_hash(raw)},
            {"files", files},
        };
        const fs::path mp = dir / "manifest.json";
        written.push_back(mp);
        std::ostringstream sink;
        write_text(mp.string(), manifest.dump(2) + '\n', sink);
        written.pop_back();
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) {
            fs::remove(p, ec);
        }
        fs::remove(dir / "manifest.json", ec);
        if (created_dir) {
            fs::remove_all(dir, ec);
        }
        throw;
    }
    return written;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neural kernel spectra, dynamics and simplicity-bias census"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and fractional variances per degree");
    KernelArgs sp_kernel;
    sp_kernel.attach(spectrum);
    std::string sp_dist = "cube";
    int sp_d = 0;
    int sp_kmax = 0;
    std::string sp_out = "-";
    spectrum->add_option("--dist", sp_dist, "cube, sphere or gaussian")->capture_default_str();
    spectrum->add_option("--d", sp_d, "input dimension")->required();
    spectrum->add_option("--kmax", sp_kmax, "largest degree")->required();
    spectrum->add_option("--out", sp_out, "output CSV ('-' for stdout)")->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "grid sweep driven by a JSON config");
    std::string sw_config;
    std::string sw_out;
    int sw_workers = 0;
    sweep->add_option("config", sw_config, "JSON config file")->required();
    sweep->add_option("--out", sw_out, "output directory (overrides config)");
    sweep->add_option("--workers", sw_workers, "worker threads (overrides config and NKSPEC_WORKERS)");

    // maxlr
    auto* maxlr = app.add_subcommand("maxlr", "theoretical and empirical max learning rate on the cube");
    KernelArgs ml_kernel;
    ml_kernel.attach(maxlr);
    int ml_d = 0;
    int ml_n = 1;
    int ml_steps = 1000;
    std::string ml_out = "-";
    maxlr->add_option("--d", ml_d, "input dimension")->required();
    maxlr->add_option("--n-outputs", ml_n, "number of outputs")->capture_default_str();
    maxlr->add_option("--steps", ml_steps, "GD steps per bisection probe")->capture_default_str();
    maxlr->add_option("--out", ml_out, "output CSV ('-' for stdout)")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "kernel gradient descent loss trajectory on the cube");
    KernelArgs si_kernel;
    si_kernel.attach(simulate);
    int si_d = 0;
    double si_alpha = 0.0;
    double si_alpha_factor = 0.0;
    int si_steps = 100;
    std::string si_mode = "eigen";
    std::string si_target = "e;0";
    int si_mask = 0;
    std::uint64_t si_seed = 0;
    std::string si_out = "-";
    simulate->add_option("--d", si_d, "input dimension (<= 14)")->required();
    auto* alpha_opt = simulate->add_option("--alpha", si_alpha, "learning rate");
    simulate->add_option("--alpha-factor", si_alpha_factor, "learning rate as a multiple of 1/max(mu0, mu1)")
        ->excludes(alpha_opt);
    simulate->add_option("--steps", si_steps, "GD steps")->capture_default_str();
    simulate->add_option("--mode", si_mode, "eigen or matrix")->capture_default_str();
    simulate->add_option("--target", si_target, "sum of characters: ';'-separated subsets, 'e' = empty set")
        ->capture_default_str();
    simulate->add_option("--mask", si_mask, "train on this many random cube points (matrix dynamics)");
    simulate->add_option("--seed", si_seed, "seed for the random mask")->capture_default_str();
    simulate->add_option("--out", si_out, "output CSV ('-' for stdout)")->capture_default_str();

    // census
    auto* census = app.add_subcommand("census", "Monte-Carlo census of thresholded random networks");
    std::string ce_act = "relu";
    double ce_exp_sigma = 1.0;
    int ce_d = 7;
    std::vector<int> ce_widths{40, 40};
    double ce_sigw2 = 2.0;
    double ce_sigb2 = 2.0;
    long ce_samples = 10000;
    std::uint64_t ce_seed = 0;
    int ce_workers = 0;
    std::string ce_out = "-";
    census->add_option("--act", ce_act, "relu, erf or exp")->capture_default_str();
    census->add_option("--exp-sigma", ce_exp_sigma, "scale of the exp activation")->capture_default_str();
    census->add_option("--d", ce_d, "input dimension (<= 16)")->capture_default_str();
    census->add_option("--widths", ce_widths, "hidden widths")->delimiter(',')->capture_default_str();
    census->add_option("--sigw2", ce_sigw2, "weight variance")->capture_default_str();
    census->add_option("--sigb2", ce_sigb2, "bias variance")->capture_default_str();
    census->add_option("--samples", ce_samples, "number of sampled networks")->capture_default_str();
    census->add_option("--seed", ce_seed, "base seed")->capture_default_str();
    census->add_option("--workers", ce_workers, "worker threads");
    census->add_option("--out", ce_out, "output CSV ('-' for stdout)")->capture_default_str();

    // reconstruct
    auto* reconstruct = app.add_subcommand("reconstruct", "rebuild the cube profile from its eigenvalues");
    KernelArgs re_kernel;
    re_kernel.attach(reconstruct);
    int re_d = 0;
    std::string re_out = "-";
    reconstruct->add_option("--d", re_d, "input dimension")->required();
    reconstruct->add_option("--out", re_out, "output CSV ('-' for stdout)")->capture_default_str();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        for (auto* sub : app.get_subcommands()) {
            out << sub->help();
        }
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }

    try {
        if (*spectrum) {
            SpectrumRequest req;
            req.dist = parse_distribution(sp_dist);
            req.kernel = sp_kernel.config();
            req.d = sp_d;
            req.kmax = sp_kmax;
            write_text(sp_out, std::string(kSpectrumHeader) + '\n' + spectrum_rows(req), out);
        } else if (*sweep) {
            std::ifstream f(sw_config);
            if (!f) {
                throw InvalidInput("cannot read config '" + sw_config + "'");
            }
            json raw;
            try {
                raw = json::parse(f);
            } catch (const json::parse_error& e) {
                throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
            }
            SweepConfig cfg = parse_sweep_config(raw);
            if (!sw_out.empty()) {
                cfg.output = sw_out;
            }
            int workers = sw_workers > 0 ? sw_workers : (cfg.workers > 0 ? cfg.workers : default_workers());
            if (sw_workers == 0 && std::getenv("NKSPEC_WORKERS") != nullptr) {
                workers = default_workers();
            }
            for (const auto& p : run_sweep(cfg, raw, workers)) {
                err << "wrote " << p.string() << '\n';
            }
        } else if (*maxlr) {
            const KernelConfig k = ml_kernel.config();
            if (ml_n < 1) {
                throw InvalidInput("n-outputs must be positive");
            }
            const auto s = cube_spectrum(k, ml_d);
            const double exact = max_lr(s, ml_n, MaxLrMode::Exact);
            const double phi0 = max_lr(s, ml_n, MaxLrMode::PhiZero, phi_eval(k, 0.0));
            const auto target = CubeFunction::from_fourier(ml_d, {{Subset{}, 1.0}, {Subset{0}, 1.0}});
            const double empirical = ml_n * empirical_max_lr(s, target, ml_steps);
            std::string text = "kind,activation,depth,sigw2,sigb2,d,n_outputs,theory_exact,theory_phi0,empirical\n";
            text += kernel_columns(k) + ',' + std::to_string(ml_d) + ',' + std::to_string(ml_n) + ',' + fmt(exact) +
                    ',' + fmt(phi0) + ',' + fmt(empirical) + '\n';
            write_text(ml_out, text, out);
        } else if (*simulate) {
            const KernelConfig k = si_kernel.config();
            if (si_d > 14) {
                throw ResourceLimit("simulate is limited to d <= 14");
            }
            GdOptions o;
            o.steps = si_steps;
            if (si_mode == "eigen") {
                o.mode = GdMode::Eigen;
            } else if (si_mode == "matrix") {
                o.mode = GdMode::Matrix;
            } else {
                throw InvalidInput("mode must be eigen or matrix");
            }
            const auto s = cube_spectrum(k, si_d);
            if (si_alpha_factor > 0.0) {
                o.alpha = si_alpha_factor * max_lr(s, 1, MaxLrMode::Exact);
            } else {
                o.alpha = si_alpha;
            }
            const auto target = CubeFunction::from_fourier(si_d, parse_target(si_target, si_d));
            std::vector<TrajectoryRecord> traj;
            const bool masked = si_mask > 0;
            if (masked) {
                const auto gram = GramByDistance::from_grid(make_phi_grid(k, si_d));
                traj = masked_gd_trajectory(gram, random_mask(si_d, si_mask, si_seed), target, o);
            } else if (o.mode == GdMode::Matrix) {
                traj = gd_trajectory(GramByDistance::from_grid(make_phi_grid(k, si_d)), target, o);
            } else {
                traj = gd_trajectory(s, target, o);
            }
            std::string text = masked ? "step,loss,train_loss,diverged\n" : "step,loss,diverged\n";
            for (const auto& r : traj) {
                text += std::to_string(r.step) + ',' + fmt(r.loss) + ',';
                if (masked) {
                    text += fmt(*r.train_loss) + ',';
                }
                text += std::string(r.diverged ? "true" : "false") + '\n';
            }
            write_text(si_out, text, out);
        } else if (*census) {
            ArchConfig a;
            a.input_dim = ce_d;
            a.hidden_widths = ce_widths;
            const auto act = parse_activation(ce_act);
            a.activation = {act, ce_exp_sigma};
            a.weight_var = ce_sigw2;
            a.bias_var = ce_sigb2;
            const int workers = ce_workers > 0 ? ce_workers : default_workers();
            const auto h = boolean_census(a, ce_samples, ce_seed, workers);
            const auto ranked = ranked_counts(h);
            const auto curve = rank_curve(h);
            std::string text = "rank,count,probability\n";
            for (std::size_t i = 0; i < curve.size(); ++i) {
                text += std::to_string(curve[i].first) + ',' + std::to_string(ranked[i].second) + ',' +
                        fmt(curve[i].second) + '\n';
            }
            write_text(ce_out, text, out);
            if (h.ties > 0) {
                err << "note: " << h.ties << " outputs were exactly zero and thresholded to +1\n";
            }
        } else if (*reconstruct) {
            const KernelConfig k = re_kernel.config();
            const auto grid = make_phi_grid(k, re_d);
            const auto s = cube_spectrum(k, re_d);
            std::string text = "r,t,phi,reconstructed,abs_error\n";
            for (int r = 0; r <= re_d; ++r) {
                const double phi = grid.values[static_cast<std::size_t>(r)];
                const double rec = reconstruct_phi(s, r);
                text += std::to_string(r) + ',' + fmt(grid.cosine(r)) + ',' + fmt(phi) + ',' + fmt(rec) + ',' +
                        fmt(std::abs(rec - phi)) + '\n';
            }
            write_text(re_out, text, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kOk;
}

}  // namespace nkspec::cli
