#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nkspec/boolcube.hpp"
#include "nkspec/cli.hpp"
#include "nkspec/errors.hpp"
#include "nkspec/gaussian.hpp"
#include "nkspec/sphere.hpp"
#include "test_support.hpp"

using namespace nkspec;
using nkspec::cli::run;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "nkspec");
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.code = run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

using Row = std::map<std::string, std::string>;

std::vector<Row> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) {
            header.push_back(cell);
        }
    }
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        std::istringstream l(line);
        std::string cell;
        Row r;
        std::size_t i = 0;
        while (std::getline(l, cell, ',')) {
            REQUIRE(i < header.size());
            r[header[i++]] = cell;
        }
        REQUIRE(i == header.size());
        rows.push_back(std::move(r));
    }
    return rows;
}

double num(const Row& r, const std::string& key) { return std::stod(r.at(key)); }

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("nkspec_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
    const fs::path p = dir / name;
    std::ofstream(p) << body;
    return p;
}

std::string range_list(int lo, int hi) {
    std::string s = "[";
    for (int i = lo; i <= hi; ++i) {
        s += std::to_string(i) + (i < hi ? "," : "]");
    }
    return s;
}

int tool(const std::string& args) {
    const char* exe = std::getenv("NKSPEC_TOOL");
    REQUIRE(exe != nullptr);
    const int status = std::system((std::string("\"") + exe + "\" " + args + " >/dev/null 2>&1").c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("spectrum examples") {
    const auto r = invoke({"spectrum", "--dist", "cube", "--kind", "ck", "--act", "relu", "--depth", "2", "--sigw2", "2",
                           "--sigb2", "0", "--d", "128", "--kmax", "8"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind(std::string(cli::kSpectrumHeader) + '\n', 0) == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 9);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CHECK(rows[k].at("degree") == std::to_string(k));
        CHECK(rows[k].at("distribution") == "cube");
        CHECK(rows[k].at("d") == "128");
    }

    TempDir tmp;
    const std::vector<std::string> base = {"spectrum", "--act", "relu", "--depth", "3", "--sigw2", "2", "--sigb2", "2",
                                          "--d",      "7",     "--kmax", "7"};
    auto a = base;
    a.insert(a.end(), {"--out", (tmp.path() / "a.csv").string()});
    auto b = base;
    b.insert(b.end(), {"--out", (tmp.path() / "b.csv").string()});
    REQUIRE(invoke(a).code == 0);
    REQUIRE(invoke(b).code == 0);
    const std::string text = slurp(tmp.path() / "a.csv");
    CHECK(text == slurp(tmp.path() / "b.csv"));
    CHECK(text == invoke(base).out);
    const auto fr = parse_csv(text);
    REQUIRE(fr.size() == 8);
    CHECK(num(fr[0], "fractional_variance") > 0.8);
}

TEST_CASE("emitted CSVs round-trip the fractional variance") {
    SUBCASE("cube") {
        for (int d : {7, 40}) {
            const auto r = invoke({"spectrum", "--kind", "ntk", "--act", "erf", "--depth", "3", "--sigw2", "2",
                                   "--sigb2", "0.5", "--d", std::to_string(d), "--kmax", std::to_string(d)});
            REQUIRE(r.code == 0);
            const auto rows = parse_csv(r.out);
            REQUIRE(rows.size() == static_cast<std::size_t>(d) + 1);
            double total = 0;
            for (const auto& row : rows) {
                total += binom_double(d, std::stoi(row.at("degree"))) * num(row, "eigenvalue");
            }
            for (const auto& row : rows) {
                const double fv = binom_double(d, std::stoi(row.at("degree"))) * num(row, "eigenvalue") / total;
                CHECK_NEAR(fv, num(row, "fractional_variance"), 1e-12);
            }
        }
    }
    SUBCASE("sphere and gaussian") {
        KernelConfig k;
        k.activation = Activation::relu();
        k.depth = 3;
        k.weight_var = 2;
        k.bias_var = 0.5;
        const int d = 20;
        for (const std::string dist : {"sphere", "gaussian"}) {
            const auto r = invoke({"spectrum", "--dist", dist, "--depth", "3", "--sigw2", "2", "--sigb2", "0.5", "--d",
                                   std::to_string(d), "--kmax", "6"});
            REQUIRE(r.code == 0);
            const auto rows = parse_csv(r.out);
            REQUIRE(rows.size() == 7);
            const double trace = dist == "sphere" ? phi_eval(k, 1.0) : hat_phi(k, d, 1.0);
            for (const auto& row : rows) {
                const int l = std::stoi(row.at("degree"));
                const double fv = sphere_multiplicity(d, l) * num(row, "eigenvalue") / trace;
                CHECK_NEAR(fv, num(row, "fractional_variance"), 1e-12);
            }
        }
    }
}

TEST_CASE("usage and resource errors map to exit codes") {
    CHECK(invoke({}).code == cli::kUsageError);
    CHECK(invoke({"bogus"}).code == cli::kUsageError);
    CHECK(invoke({"spectrum", "--d", "7"}).code == cli::kUsageError);
    CHECK(invoke({"spectrum", "--d", "7", "--kmax", "3", "--kind", "xyz"}).code == cli::kUsageError);
    CHECK(invoke({"spectrum", "--d", "7", "--kmax", "3", "--dist", "torus"}).code == cli::kUsageError);
    CHECK(invoke({"spectrum", "--d", "2", "--kmax", "3", "--dist", "sphere"}).code == cli::kUsageError);
    CHECK(invoke({"spectrum", "--d", "7", "--kmax", "3", "--kind", "ntk", "--act", "exp"}).code ==
          cli::kUsageError);
    CHECK(invoke({"spectrum", "--d", "7", "--kmax", "3", "--sigw2", "-1"}).code == cli::kUsageError);
    const auto e = invoke({"census", "--d", "17", "--samples", "2"});
    CHECK(e.code == cli::kResourceError);
    CHECK(e.err.find("error:") != std::string::npos);
    CHECK(invoke({"simulate", "--d", "15", "--alpha", "0.1"}).code == cli::kResourceError);
    CHECK(invoke({"simulate", "--d", "15", "--alpha", "0.1", "--mode", "matrix"}).code == cli::kResourceError);
    CHECK(invoke({"simulate", "--d", "5", "--alpha", "0.1", "--mode", "sideways"}).code == cli::kUsageError);
    CHECK(invoke({"--version"}).out.empty() == false);
}

TEST_CASE("sweep: a 1x1 grid equals spectrum") {
    TempDir tmp;
    const auto cfg = write_config(tmp.path(), "one.json",
                                  R"({"distributions": "cube", "kinds": "ck", "activations": "relu",
                                      "depths": 3, "sigw2": 2, "sigb2": 2, "d": 7, "kmax": 7})");
    const fs::path out = tmp.path() / "out";
    const auto r = invoke({"sweep", cfg.string(), "--out", out.string(), "--workers", "1"});
    REQUIRE(r.code == 0);
    const auto s = invoke({"spectrum", "--act", "relu", "--depth", "3", "--sigw2", "2", "--sigb2", "2", "--d", "7",
                           "--kmax", "7"});
    CHECK(slurp(out / "cube.csv") == s.out);

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("library") == "nkspec");
    CHECK(manifest.at("version").is_string());
    CHECK(manifest.at("config_hash") == cli::config_hash(nlohmann::json::parse(slurp(cfg))));
    CHECK(manifest.at("config") == nlohmann::json::parse(slurp(cfg)));
    CHECK(manifest.at("files").at("cube").at("rows") == 8);
}

TEST_CASE("sweep: grid size and worker independence") {
    TempDir tmp;
    const auto cfg = write_config(tmp.path(), "grid.json",
                                  R"({"distributions": ["cube", "sphere"], "activations": ["relu", "erf"],
                                      "kinds": ["ck", "ntk"], "depths": )" +
                                      range_list(1, 128) + R"(, "sigw2": 2, "sigb2": 0.5, "d": 16, "kmax": 7})");
    const fs::path one = tmp.path() / "w1";
    const fs::path many = tmp.path() / "w4";
    REQUIRE(invoke({"sweep", cfg.string(), "--out", one.string(), "--workers", "1"}).code == 0);
    REQUIRE(invoke({"sweep", cfg.string(), "--out", many.string(), "--workers", "4"}).code == 0);
    for (const char* f : {"cube.csv", "sphere.csv", "manifest.json"}) {
        CHECK(slurp(one / f) == slurp(many / f));
    }
    const auto rows = parse_csv(slurp(one / "cube.csv"));
    CHECK(rows.size() == 2 * 2 * 1024);
    std::size_t relu_ck = 0;
    for (const auto& r : rows) {
        relu_ck += r.at("kind") == "ck" && r.at("activation") == "relu" ? 1 : 0;
    }
    CHECK(relu_ck == 1024);
    CHECK(parse_csv(slurp(one / "sphere.csv")).size() == 2 * 2 * 1024);
}

TEST_CASE("sweep: worker count from the environment") {
    TempDir tmp;
    const auto cfg = write_config(tmp.path(), "env.json",
                                  R"({"depths": [1, 2, 3, 4], "d": 9, "kmax": 4, "workers": 3})");
    ::setenv("NKSPEC_WORKERS", "2", 1);
    const auto a = invoke({"sweep", cfg.string(), "--out", (tmp.path() / "a").string()});
    ::unsetenv("NKSPEC_WORKERS");
    const auto b = invoke({"sweep", cfg.string(), "--out", (tmp.path() / "b").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp(tmp.path() / "a" / "cube.csv") == slurp(tmp.path() / "b" / "cube.csv"));
}

TEST_CASE("sweep: schema violations exit 2 and leave nothing behind") {
    TempDir tmp;
    const std::vector<std::string> bad = {
        R"({"depths": [2], "d": 7})",
        R"({"depths": [2], "d": 7, "kmax": 3, "colour": "red"})",
        R"({"depths": [], "d": 7, "kmax": 3})",
        R"({"depths": [0], "d": 7, "kmax": 3})",
        R"({"depths": [2], "d": 2, "kmax": 3, "distributions": "sphere"})",
        R"({"depths": [2], "d": 7, "kmax": -1})",
        R"({"depths": [2], "d": 7, "kmax": 3, "kinds": "ntk", "activations": "exp"})",
        R"({"depths": [2], "d": 7, "kmax": 3, "sigw2": "two"})",
        R"([1, 2, 3])",
        R"({"depths": [2], "d": 7, )",
    };
    int i = 0;
    for (const auto& body : bad) {
        INFO(body);
        const auto cfg = write_config(tmp.path(), "bad" + std::to_string(i) + ".json", body);
        const fs::path out = tmp.path() / ("out" + std::to_string(i++));
        CHECK(invoke({"sweep", cfg.string(), "--out", out.string()}).code == cli::kUsageError);
        CHECK_FALSE(fs::exists(out));
    }
    CHECK(invoke({"sweep", (tmp.path() / "missing.json").string(), "--out", (tmp.path() / "m").string()}).code ==
          cli::kUsageError);
    // No output directory anywhere.
    const auto cfg = write_config(tmp.path(), "noout.json", R"({"depths": [2], "d": 7, "kmax": 3})");
    CHECK(invoke({"sweep", cfg.string()}).code == cli::kUsageError);
}

TEST_CASE("sweep: a failed write leaves no partial files") {
    TempDir tmp;
    const fs::path out = tmp.path() / "partial";
    fs::create_directories(out / "sphere.csv");  // a directory where a file must go
    const auto cfg = write_config(tmp.path(), "two.json",
                                  R"({"distributions": ["cube", "sphere"], "depths": [2], "d": 7, "kmax": 3})");
    CHECK(invoke({"sweep", cfg.string(), "--out", out.string()}).code == cli::kResourceError);
    CHECK_FALSE(fs::exists(out / "cube.csv"));
    CHECK_FALSE(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out));
}

TEST_CASE("parse_sweep_config") {
    const auto c = cli::parse_sweep_config(nlohmann::json::parse(
        R"({"distributions": ["gaussian"], "kinds": ["ck", "ntk"], "activations": "erf", "depths": [1, 5],
            "sigw2": [1, 2.5], "sigb2": 0.1, "d": [8, 16], "kmax": 4, "output": "x", "workers": 2, "seed": 7})"));
    CHECK(c.distributions == std::vector<cli::Distribution>{cli::Distribution::Gaussian});
    CHECK(c.kinds.size() == 2);
    CHECK(c.activations == std::vector<ActivationKind>{ActivationKind::Erf});
    CHECK(c.depths == std::vector<int>{1, 5});
    CHECK(c.sigw2 == std::vector<double>{1, 2.5});
    CHECK(c.sigb2 == std::vector<double>{0.1});
    CHECK(c.dims == std::vector<int>{8, 16});
    CHECK(c.kmax == 4);
    CHECK(c.output == "x");
    CHECK(c.workers == 2);
    CHECK(c.seed == 7);
    const auto dflt = cli::parse_sweep_config(nlohmann::json::parse(R"({"depths": 2, "d": 3, "kmax": 0})"));
    CHECK(dflt.distributions == std::vector<cli::Distribution>{cli::Distribution::Cube});
    CHECK(dflt.kinds == std::vector<KernelKind>{KernelKind::CK});
    CHECK(dflt.activations == std::vector<ActivationKind>{ActivationKind::Relu});
    CHECK_THROWS_AS(cli::parse_sweep_config(nlohmann::json::parse(R"({"depths": 2, "d": 3})")), InvalidInput);
    CHECK_THROWS_AS(cli::parse_sweep_config(nlohmann::json::parse(R"({"depths": 2, "d": 3, "kmax": 1, "seed": -1})")),
                    InvalidInput);
    CHECK(cli::config_hash(nlohmann::json::parse(R"({"a": 1})")).size() == 16);
    CHECK(cli::config_hash(nlohmann::json::parse(R"({"a": 1})")) !=
          cli::config_hash(nlohmann::json::parse(R"({"a": 2})")));
}

TEST_CASE("sweep: erf NTK maximizing depth grows over odd degrees") {
    TempDir tmp;
    const auto cfg = write_config(tmp.path(), "base.json",
                                  R"({"kinds": "ntk", "activations": "erf", "depths": )" + range_list(1, 64) +
                                      R"(, "sigw2": 2, "sigb2": 0, "d": 128, "kmax": 7})");
    REQUIRE(invoke({"sweep", cfg.string(), "--out", (tmp.path() / "o").string()}).code == 0);
    const auto rows = parse_csv(slurp(tmp.path() / "o" / "cube.csv"));
    REQUIRE(rows.size() == 64 * 8);
    int prev = 0;
    for (int k : {1, 3, 5, 7}) {
        int best = 0;
        double best_fv = -1;
        for (const auto& r : rows) {
            if (std::stoi(r.at("degree")) == k && num(r, "fractional_variance") > best_fv) {
                best_fv = num(r, "fractional_variance");
                best = std::stoi(r.at("depth"));
            }
        }
        INFO("degree " << k << " depth " << best);
        CHECK(best >= prev);
        prev = best;
    }
    CHECK(prev > 1);
}

TEST_CASE("maxlr matches the linear-dynamics threshold") {
    const auto r = invoke({"maxlr", "--act", "relu", "--kind", "ck", "--depth", "3", "--sigw2", "2", "--sigb2", "0.5",
                           "--d", "10"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 1);
    const double exact = num(rows[0], "theory_exact");
    CHECK(std::abs(num(rows[0], "empirical") - exact) / exact < 0.02);
    KernelConfig k;
    k.activation = Activation::relu();
    k.depth = 3;
    k.weight_var = 2;
    k.bias_var = 0.5;
    const auto s = cube_spectrum(k, 10);
    CHECK_CLOSE(exact, 1.0 / std::max(s.mu[0], s.mu[1]), 1e-12);
    CHECK(invoke({"maxlr", "--d", "10", "--n-outputs", "0"}).code == cli::kUsageError);
}

TEST_CASE("simulate") {
    const auto r = invoke({"simulate", "--depth", "3", "--sigw2", "2", "--sigb2", "0.5", "--d", "6", "--alpha-factor",
                           "1.1", "--steps", "500"});
    REQUIRE(r.code == 0);
    auto rows = parse_csv(r.out);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.back().at("diverged") == "true");
    CHECK(rows.front().at("diverged") == "false");

    const auto ok = invoke({"simulate", "--depth", "3", "--sigw2", "2", "--sigb2", "0.5", "--d", "6", "--alpha-factor",
                            "0.9", "--steps", "50", "--mode", "matrix"});
    REQUIRE(ok.code == 0);
    rows = parse_csv(ok.out);
    REQUIRE(rows.size() == 51);
    CHECK(rows.back().at("diverged") == "false");
    CHECK(num(rows.back(), "loss") < num(rows.front(), "loss"));
    const auto eig = parse_csv(invoke({"simulate", "--depth", "3", "--sigw2", "2", "--sigb2", "0.5", "--d", "6",
                                       "--alpha-factor", "0.9", "--steps", "50"})
                                   .out);
    REQUIRE(eig.size() == rows.size());
    for (std::size_t i = 0; i < eig.size(); ++i) {
        CHECK_CLOSE(num(eig[i], "loss"), num(rows[i], "loss"), 1e-8);
    }

    const auto masked = invoke({"simulate", "--depth", "2", "--d", "6", "--alpha", "0.1", "--steps", "10", "--mask",
                                "20", "--mode", "matrix", "--seed", "3"});
    REQUIRE(masked.code == 0);
    CHECK(masked.out.rfind("step,loss,train_loss,diverged\n", 0) == 0);
    CHECK(parse_csv(masked.out).size() == 11);
}

TEST_CASE("census") {
    const auto r = invoke({"census", "--act", "relu", "--d", "7", "--widths", "40,40", "--sigw2", "2", "--sigb2", "2",
                           "--samples", "2000", "--seed", "1", "--workers", "2"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    REQUIRE_FALSE(rows.empty());
    long total = 0;
    double prob = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].at("rank") == std::to_string(i + 1));
        total += std::stol(rows[i].at("count"));
        prob += num(rows[i], "probability");
    }
    CHECK(total == 2000);
    CHECK(prob == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(num(rows[0], "probability") > 0.1);
}

TEST_CASE("census of a deep erf network is flat") {
    // 32 hidden layers of width 40, so the kernel depth is 33.
    std::string widths;
    for (int i = 0; i < 32; ++i) {
        widths += (i > 0 ? "," : "") + std::string("40");
    }
    const auto r = invoke({"census", "--act", "erf", "--d", "7", "--widths", widths, "--sigw2", "4", "--sigb2", "0",
                           "--samples", "10000", "--seed", "0"});
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(r.out);
    CHECK(rows.size() == 10000);
    CHECK(num(rows[0], "probability") <= 2.0 / 10000);
}

TEST_CASE("reconstruct") {
    for (int d : {7, 64}) {
        const auto r = invoke({"reconstruct", "--act", "erf", "--kind", "ntk", "--depth", "3", "--sigw2", "2",
                               "--sigb2", "0.5", "--d", std::to_string(d)});
        REQUIRE(r.code == 0);
        const auto rows = parse_csv(r.out);
        REQUIRE(rows.size() == static_cast<std::size_t>(d) + 1);
        for (const auto& row : rows) {
            CHECK(num(row, "abs_error") <= 1e-6 * std::abs(num(row, "phi")));
            CHECK(num(row, "t") == doctest::Approx((d - 2.0 * std::stoi(row.at("r"))) / d));
        }
    }
}

TEST_CASE("installed tool exit codes") {
    CHECK(tool("--version") == 0);
    CHECK(tool("--help") == 0);
    CHECK(tool("spectrum --d 7 --kmax 2") == 0);
    CHECK(tool("spectrum --d 7") == 2);
    CHECK(tool("nonsense") == 2);
    CHECK(tool("census --d 17 --samples 1") == 4);
    CHECK(tool("simulate --d 15 --alpha 0.1 --mode matrix") == 4);
}
