#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nkspec/boolcube.hpp"
#include "nkspec/dynamics.hpp"
#include "nkspec/errors.hpp"
#include "nkspec/gaussian.hpp"
#include "nkspec/kernel.hpp"
#include "nkspec/netsample.hpp"
#include "nkspec/sphere.hpp"
#include "nkspec/version.hpp"

namespace py = pybind11;
using namespace nkspec;

namespace {

KernelConfig make_config(const std::string& activation, int depth, double sigw2, double sigb2,
                         const std::string& kind, double exp_sigma) {
    KernelConfig k;
    k.kind = parse_kernel_kind(kind);
    k.activation = {parse_activation(activation), exp_sigma};
    k.depth = depth;
    k.weight_var = sigw2;
    k.bias_var = sigb2;
    k.validate();
    return k;
}

}  // namespace

PYBIND11_MODULE(_nkspec, m) {
    m.doc() = "Neural kernel spectra, dynamics and simplicity-bias census";
    m.attr("__version__") = kVersion;

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", PyExc_NotImplementedError);
    py::register_exception<NumericalInconsistency>(m, "NumericalInconsistency", PyExc_ArithmeticError);
    py::register_exception<ResourceLimit>(m, "ResourceLimit", PyExc_MemoryError);

    py::class_<KernelConfig>(m, "KernelConfig")
        .def(py::init(&make_config), py::arg("activation") = "relu", py::arg("depth") = 1,
             py::arg("sigw2") = 1.0, py::arg("sigb2") = 0.0, py::arg("kind") = "ck", py::arg("exp_sigma") = 1.0)
        .def_readwrite("depth", &KernelConfig::depth)
        .def_readwrite("weight_var", &KernelConfig::weight_var)
        .def_readwrite("bias_var", &KernelConfig::bias_var)
        .def_property_readonly("activation",
                               [](const KernelConfig& k) { return std::string(to_string(k.activation.kind)); })
        .def_property_readonly("kind", [](const KernelConfig& k) { return std::string(to_string(k.kind)); })
        .def("__repr__", [](const KernelConfig& k) {
            return "KernelConfig(" + std::string(to_string(k.activation.kind)) + ", depth=" + std::to_string(k.depth) +
                   ", sigw2=" + std::to_string(k.weight_var) + ", sigb2=" + std::to_string(k.bias_var) +
                   ", kind=" + std::string(to_string(k.kind)) + ")";
        });

    m.def("phi_eval", &phi_eval, py::arg("cfg"), py::arg("t"), py::arg("q") = 1.0, py::arg("q2") = 1.0);
    m.def(
        "phi_jet", [](const KernelConfig& k, std::size_t order, double q) {
            const Jet j = phi_jet(k, order, q);
            return std::vector<double>(j.coeffs().begin(), j.coeffs().end());
        },
        py::arg("cfg"), py::arg("order"), py::arg("q") = 1.0, "Taylor coefficients of Φ at t = 0.");

    py::class_<CubeSpectrum>(m, "CubeSpectrum")
        .def_readonly("d", &CubeSpectrum::d)
        .def_readonly("mu", &CubeSpectrum::mu)
        .def_readonly("phi_one", &CubeSpectrum::phi_one)
        .def("trace", &CubeSpectrum::trace);

    m.def("cube_spectrum", py::overload_cast<const KernelConfig&, int>(&cube_spectrum), py::arg("cfg"), py::arg("d"));
    m.def(
        "cube_spectrum_of", [](const std::function<double(double)>& phi, int d) { return cube_spectrum(phi, d); },
        py::arg("phi"), py::arg("d"), "Spectrum of an arbitrary profile t ↦ Φ(t).");
    m.def("fractional_variance", &fractional_variance, py::arg("spectrum"));
    m.def("reconstruct_phi", &reconstruct_phi, py::arg("spectrum"), py::arg("r"));
    m.def("mu_exp_closed", &mu_exp_closed, py::arg("sigma_sq"), py::arg("d"), py::arg("k"));
    m.def(
        "mu_reference", [](const KernelConfig& k, int d, int deg) { return mu_reference(make_phi_grid(k, d), deg); },
        py::arg("cfg"), py::arg("d"), py::arg("k"));

    py::class_<SphereSpectrum>(m, "SphereSpectrum")
        .def_readonly("d", &SphereSpectrum::d)
        .def_readonly("a", &SphereSpectrum::a)
        .def_readonly("truncated", &SphereSpectrum::truncated)
        .def_property_readonly("method", [](const SphereSpectrum& s) {
            return s.method == SphereMethod::Quadrature ? "quadrature" : "taylor";
        });

    m.def(
        "sphere_spectrum",
        [](const KernelConfig& k, int d, int lmax, const std::string& method, std::size_t jet_order) {
            SphereOptions o;
            if (method == "quadrature") {
                o.method = SphereMethod::Quadrature;
            } else if (method == "taylor") {
                o.method = SphereMethod::Taylor;
            } else if (method != "auto") {
                throw InvalidInput("method must be auto, quadrature or taylor");
            }
            o.jet_order = jet_order;
            return sphere_spectrum(k, d, lmax, o);
        },
        py::arg("cfg"), py::arg("d"), py::arg("lmax"), py::arg("method") = "auto",
        py::arg("jet_order") = kDefaultJetOrder);
    m.def(
        "gaussian_spectrum", [](const KernelConfig& k, int d, int lmax) { return gaussian_spectrum(k, d, lmax); },
        py::arg("cfg"), py::arg("d"), py::arg("lmax"));
    m.def(
        "hat_phi", [](const KernelConfig& k, int d, double t) { return hat_phi(k, d, t); }, py::arg("cfg"),
        py::arg("d"), py::arg("t"));
    m.def("sphere_multiplicity", &sphere_multiplicity, py::arg("d"), py::arg("l"));

    m.def(
        "max_lr",
        [](const CubeSpectrum& s, int n, const std::string& mode, double phi0) {
            if (mode == "exact") {
                return max_lr(s, n, MaxLrMode::Exact, phi0);
            }
            if (mode == "phi0") {
                return max_lr(s, n, MaxLrMode::PhiZero, phi0);
            }
            throw InvalidInput("mode must be exact or phi0");
        },
        py::arg("spectrum"), py::arg("n_outputs") = 1, py::arg("mode") = "exact", py::arg("phi_at_zero") = 0.0);
    m.def(
        "empirical_max_lr",
        [](const std::function<bool(double)>& diverges, double upper0, double tol) {
            return empirical_max_lr(diverges, upper0, tol);
        },
        py::arg("diverges"), py::arg("upper0"), py::arg("tol"), "Bisection on a divergence oracle.");
    m.def(
        "gd_losses",
        [](const CubeSpectrum& s, const std::map<Subset, double>& target, double alpha, int steps) {
            GdOptions o;
            o.alpha = alpha;
            o.steps = steps;
            std::vector<double> losses;
            for (const auto& r : gd_trajectory(s, CubeFunction::from_fourier(s.d, target), o)) {
                losses.push_back(r.loss);
            }
            return losses;
        },
        py::arg("spectrum"), py::arg("target"), py::arg("alpha"), py::arg("steps"),
        "Eigen-mode kernel GD losses; target maps index tuples to Fourier coefficients.");

    m.def(
        "boolean_census",
        [](int d, const std::vector<int>& widths, const std::string& activation, double sigw2, double sigb2,
           long n_samples, std::uint64_t seed, int workers) {
            ArchConfig a;
            a.input_dim = d;
            a.hidden_widths = widths;
            a.activation = {parse_activation(activation), 1.0};
            a.weight_var = sigw2;
            a.bias_var = sigb2;
            const auto h = boolean_census(a, n_samples, seed, workers);
            return py::make_tuple(h.counts, h.total, h.ties);
        },
        py::arg("d"), py::arg("widths"), py::arg("activation"), py::arg("sigw2"), py::arg("sigb2"),
        py::arg("n_samples"), py::arg("seed") = 0, py::arg("workers") = 1,
        "Returns (counts by function id, total, ties).");
}
