#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stepfit/errors.hpp"
#include "stepfit/experiments.hpp"
#include "stepfit/fitting.hpp"
#include "stepfit/learn.hpp"
#include "stepfit/stability.hpp"

namespace py = pybind11;
using namespace stepfit;

namespace {

SchemeId id_of(const std::string& token) { return parse_scheme_id(token); }

py::dict learned_dict(const LearnedEigen& r, SchemeId id) {
    const SignPrediction sp = predict_signs(id, r.lambda_true, r.h);
    py::dict d;
    d["scheme"] = r.scheme;
    d["lambda"] = r.lambda_true;
    d["h"] = r.h;
    d["lambda_hat"] = r.lambda_hat;
    d["lambda_hat_h"] = r.selected;
    d["candidates"] = r.candidates.roots;
    d["in_stability_region"] = r.in_stability_region;
    d["nyquist_ok"] = r.nyquist_ok;
    d["re_sign"] = std::string(to_string(sp.re_sign));
    d["im_sign_matches"] = std::string(to_string(sp.im_sign_matches_true));
    return d;
}

TrajectoryData make_data(const std::vector<Complex>& z, double H, int m) {
    if (z.size() < 2) throw DegenerateError("need Z0 and at least one sample");
    TrajectoryData d;
    d.Z0 = z.front();
    d.H = H;
    d.m = m;
    d.samples.assign(z.begin() + 1, z.end());
    return d;
}

py::dict map_dict(const RegionMap& m) {
    py::dict d;
    d["window"] = py::make_tuple(m.window.x0, m.window.x1, m.window.y0, m.window.y1);
    d["nx"] = m.nx;
    d["ny"] = m.ny;
    d["values"] = m.values;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
    static py::exception<Error> base(mod, "StepfitError");
    py::register_exception<LookupError>(mod, "LookupError", base.ptr());
    py::register_exception<PoleError>(mod, "PoleError", base.ptr());
    py::register_exception<UnsupportedError>(mod, "UnsupportedError", base.ptr());
    py::register_exception<DegenerateError>(mod, "DegenerateError", base.ptr());
    py::register_exception<MultiplicityError>(mod, "MultiplicityError", base.ptr());
    py::register_exception<SingularStepError>(mod, "SingularStepError", base.ptr());
    py::register_exception<NyquistError>(mod, "NyquistError", base.ptr());
    py::register_exception<IterationError>(mod, "IterationError", base.ptr());

    mod.def("schemes", [] {
        std::vector<std::string> out;
        for (SchemeId id : kAllSchemes) out.emplace_back(to_string(id));
        return out;
    });
    mod.def(
        "amplification", [](const std::string& s, Complex xi) { return amplification(one_step(id_of(s)), xi); },
        py::arg("scheme"), py::arg("xi"));
    mod.def(
        "learn",
        [](const std::string& s, Complex lambda, double h) {
            const SchemeId id = id_of(s);
            return learned_dict(learn(id, lambda, h), id);
        },
        py::arg("scheme"), py::arg("lam"), py::arg("h"));
    mod.def(
        "generate",
        [](Complex lambda, double H, int N, Complex Z0, double sigma, std::uint64_t seed, int m) {
            const TrajectoryData d = generate(lambda, H, m, N, Z0, sigma, seed);
            std::vector<Complex> z{d.Z0};
            z.insert(z.end(), d.samples.begin(), d.samples.end());
            return z;
        },
        py::arg("lam"), py::arg("H"), py::arg("N"), py::arg("Z0") = Complex{1.0}, py::arg("sigma") = 0.0,
        py::arg("seed") = 0, py::arg("m") = 1);
    mod.def(
        "objective",
        [](const std::string& s, Complex xi, const std::vector<Complex>& z, double H, int m) {
            return objective(id_of(s), xi, make_data(z, H, m));
        },
        py::arg("scheme"), py::arg("xi"), py::arg("z"), py::arg("H"), py::arg("m") = 1);
    mod.def(
        "fit",
        [](const std::string& s, const std::vector<Complex>& z, double H, int m, int starts) {
            FitOptions o;
            o.starts = starts;
            const FitResult r = minimize(id_of(s), make_data(z, H, m), o);
            py::dict d;
            d["xi_star"] = r.xi_star;
            d["lambda_star"] = r.xi_star / (H / m);
            d["objective"] = r.objective_value;
            d["iterations"] = r.iterations;
            d["converged"] = r.converged;
            return d;
        },
        py::arg("scheme"), py::arg("z"), py::arg("H"), py::arg("m") = 1, py::arg("starts") = 8);
    mod.def(
        "landscape",
        [](const std::string& s, const std::vector<Complex>& z, double H, std::tuple<double, double, double, double> w,
           int nx, int ny) {
            const auto [x0, x1, y0, y1] = w;
            return map_dict(landscape(id_of(s), make_data(z, H, 1), Window{x0, x1, y0, y1}, nx, ny));
        },
        py::arg("scheme"), py::arg("z"), py::arg("H"), py::arg("window"), py::arg("nx") = kDefaultGrid,
        py::arg("ny") = kDefaultGrid);
    mod.def(
        "characteristic_roots",
        [](const std::string& s, Complex xi) { return lmm_characteristic_roots(multistep(id_of(s)), xi).roots; },
        py::arg("scheme"), py::arg("xi"));
    mod.def(
        "boundary_locus",
        [](const std::string& s, int n) {
            const BoundaryLocus b = boundary_locus(id_of(s), n);
            return py::make_tuple(b.theta, b.points);
        },
        py::arg("scheme"), py::arg("n") = 512);
    mod.def(
        "repeated_root_locus", [](const std::string& s) { return repeated_root_locus(id_of(s)); },
        py::arg("scheme"));
    mod.def(
        "convdiff",
        [](const std::string& s, int k, double h, bool fit) {
            const ConvDiffResult r =
                convdiff_recover(id_of(s), k, h, fit ? ConvDiffMode::Fit : ConvDiffMode::ClosedForm);
            return py::make_tuple(r.a_hat, r.eps_hat);
        },
        py::arg("scheme"), py::arg("k"), py::arg("h"), py::arg("fit") = false);
    mod.def(
        "extrapolation_study",
        [](Complex lambda, const std::vector<double>& hs) {
            const ExtrapReport r = extrapolation_study(lambda, hs);
            py::dict d;
            d["h"] = r.sweep.xs;
            d["error"] = r.sweep.ys;
            d["slope"] = r.sweep.slope;
            d["lambda_exp"] = r.lambda_exp;
            d["in_window"] = r.in_window;
            return d;
        },
        py::arg("lam"), py::arg("h_list"));
    mod.def(
        "order_study",
        [](const std::string& s, Complex lambda, const std::vector<double>& hs, const std::string& measure) {
            const ErrorMeasure m = measure == "scaled" ? ErrorMeasure::Scaled : ErrorMeasure::Eigenvalue;
            return order_study(id_of(s), lambda, hs, m).slope;
        },
        py::arg("scheme"), py::arg("lam"), py::arg("h_list"), py::arg("measure") = "eigen");
}
