#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "stepfit/errors.hpp"
#include "stepfit/experiments.hpp"
#include "stepfit/fitting.hpp"
#include "stepfit/io.hpp"
#include "stepfit/learn.hpp"
#include "stepfit/stability.hpp"

namespace stepfit::cli {
namespace {

using json = nlohmann::ordered_json;

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + s + "'", kExitUsage);
    }
    if (used != s.size()) throw UsageError("not a number: '" + s + "'", kExitUsage);
    return v;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

json cjson(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

std::string infer_format(const RunConfig& c, const std::string& fallback) {
    if (!c.format.empty()) return c.format;
    auto ends = [&](const char* ext) {
        const std::string e(ext);
        return c.out.size() >= e.size() && c.out.compare(c.out.size() - e.size(), e.size(), e) == 0;
    };
    if (ends(".svg")) return "svg";
    if (ends(".json")) return "json";
    if (ends(".csv")) return "csv";
    return fallback;
}

void write_json(const std::string& path, const json& j) {
    io::Output o(path);
    o.stream() << j.dump(2) << '\n';
    o.close();
}

SchemeId scheme_of(const RunConfig& c) {
    if (c.schemes.empty()) throw UsageError("--scheme is required", kExitUsage);
    return parse_scheme_id(c.schemes.front());
}

MultistepScheme multistep_of(const RunConfig& c) {
    if (!c.custom.empty()) return multistep_from_json(io::read_text(c.custom));
    return multistep(scheme_of(c));
}

// Learned eigenvalue, sign prediction and phase class as one record.
json learn_record(const LearnedEigen& r, const SignPrediction& sp) {
    json cands = json::array();
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
        json c = cjson(r.candidates.roots[i]);
        c["residual"] = r.candidates.residuals[i];
        cands.push_back(std::move(c));
    }
    const Complex x = r.lambda_true * r.h;
    json j;
    j["scheme"] = r.scheme;
    j["lambda"] = cjson(r.lambda_true);
    j["h"] = r.h;
    j["lambda_hat"] = cjson(r.lambda_hat);
    j["lambda_hat_h"] = cjson(r.selected);
    j["candidates"] = std::move(cands);
    j["in_stability_region"] = r.in_stability_region;
    j["nyquist_ok"] = r.nyquist_ok;
    j["re_sign"] = std::string(to_string(sp.re_sign));
    j["im_sign_matches"] = std::string(to_string(sp.im_sign_matches_true));
    j["phase_class"] = std::string(to_string(classify_phase(r.selected.imag(), x.imag())));
    return j;
}

void cmd_learn(const RunConfig& c) {
    LearnedEigen r;
    SignPrediction sp;
    if (!c.custom.empty()) {
        r = learn_lmm(multistep_of(c), c.lambda, c.h);
        sp.condition_notes = "custom scheme";
    } else {
        const SchemeId id = scheme_of(c);
        r = learn(id, c.lambda, c.h);
        sp = predict_signs(id, c.lambda, c.h);
    }
    const json j = learn_record(r, sp);
    if (infer_format(c, "json") == "csv") {
        io::Output o(c.out);
        auto& os = o.stream();
        os << "scheme,lambda_re,lambda_im,h,lambda_hat_re,lambda_hat_im,lambda_hat_h_re,lambda_hat_h_im,"
              "in_stability_region,nyquist_ok,re_sign,im_sign_matches,phase_class\n";
        os << r.scheme << ',' << io::fmt_double(r.lambda_true.real()) << ',' << io::fmt_double(r.lambda_true.imag())
           << ',' << io::fmt_double(r.h) << ',' << io::fmt_double(r.lambda_hat.real()) << ','
           << io::fmt_double(r.lambda_hat.imag()) << ',' << io::fmt_double(r.selected.real()) << ','
           << io::fmt_double(r.selected.imag()) << ',' << (r.in_stability_region ? 1 : 0) << ','
           << (r.nyquist_ok ? 1 : 0) << ',' << j["re_sign"].get<std::string>() << ','
           << j["im_sign_matches"].get<std::string>() << ',' << j["phase_class"].get<std::string>() << '\n';
        o.close();
    } else {
        write_json(c.out, j);
    }
}

void cmd_gen(const RunConfig& c) {
    const TrajectoryData d = generate(c.lambda, c.H, c.m, c.N, c.Z0, c.sigma, c.seed);
    io::Output o(c.out);
    io::write_trajectory_csv(o.stream(), d);
    o.close();
}

TrajectoryData load_data(const RunConfig& c) {
    if (c.data.empty()) throw UsageError("--data is required", kExitUsage);
    return io::parse_trajectory_csv(io::read_text(c.data), c.m);
}

void cmd_fit(const RunConfig& c) {
    const SchemeId id = scheme_of(c);
    const TrajectoryData d = load_data(c);
    FitOptions opts;
    opts.starts = c.starts;
    const FitResult r = minimize(id, d, opts);
    json j;
    j["scheme"] = std::string(to_string(id));
    j["H"] = d.H;
    j["m"] = d.m;
    j["xi_star"] = cjson(r.xi_star);
    j["lambda_star"] = cjson(r.xi_star / d.h());
    j["objective"] = r.objective_value;
    j["iterations"] = r.iterations;
    j["starts_used"] = r.starts_used;
    j["converged"] = r.converged;
    if (infer_format(c, "json") == "csv") {
        io::Output o(c.out);
        o.stream() << "scheme,xi_re,xi_im,objective,iterations,starts_used,converged\n"
                   << to_string(id) << ',' << io::fmt_double(r.xi_star.real()) << ','
                   << io::fmt_double(r.xi_star.imag()) << ',' << io::fmt_double(r.objective_value) << ','
                   << r.iterations << ',' << r.starts_used << ',' << (r.converged ? 1 : 0) << '\n';
        o.close();
    } else {
        write_json(c.out, j);
    }
}

void cmd_landscape(const RunConfig& c) {
    const SchemeId id = scheme_of(c);
    const TrajectoryData d = load_data(c);
    const Window w = c.window.value_or(Window{-2.0, 0.5, -1.5, 1.5});
    const RegionMap map = landscape(id, d, w, c.nx, c.ny);

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    int arg_ix = -1, arg_iy = -1;
    for (int iy = 0; iy < map.ny; ++iy)
        for (int ix = 0; ix < map.nx; ++ix) {
            const double v = map.at(ix, iy);
            if (!std::isfinite(v)) continue;
            const double l = std::log10(std::max(v, 1e-300));
            if (l < lo) {
                lo = l;
                arg_ix = ix;
                arg_iy = iy;
            }
            hi = std::max(hi, l);
        }

    if (infer_format(c, "csv") == "svg") {
        io::SvgPlot plot(w, "log10 objective, " + std::string(to_string(id)), "Re(xi)", "Im(xi)");
        const double span = hi > lo ? hi - lo : 1.0;
        plot.cells(map, [&](int ix, int iy) {
            const double v = map.at(ix, iy);
            if (!std::isfinite(v)) return io::Rgb{200, 200, 200};
            const double l = std::log10(std::max(v, 1e-300));
            return io::ramp(std::round(32.0 * (l - lo) / span) / 32.0);
        });
        if (arg_ix >= 0) {
            const double level = std::floor(lo) + 1.0;
            plot.segments(io::contour(map, level, [](double v) { return std::log10(std::max(v, 1e-300)); }),
                          "white", 1.5);
            const Complex best{map.x_at(arg_ix), map.y_at(arg_iy)};
            plot.polyline({best - Complex{0.01 * (w.x1 - w.x0), 0.0}, best + Complex{0.01 * (w.x1 - w.x0), 0.0}},
                          "red", 2.5);
            plot.legend("min log10 objective " + io::fmt_double(lo).substr(0, 8) + " at (" +
                        io::fmt_double(best.real()).substr(0, 8) + ", " + io::fmt_double(best.imag()).substr(0, 8) +
                        ")");
            plot.legend("white contour: log10 objective = " + std::to_string(static_cast<int>(level)));
        }
        io::Output o(c.out);
        plot.write(o.stream());
        o.close();
        return;
    }
    io::Output o(c.out);
    auto& os = o.stream();
    os << "re,im,log10_objective\n";
    for (int iy = 0; iy < map.ny; ++iy)
        for (int ix = 0; ix < map.nx; ++ix) {
            const double v = map.at(ix, iy);
            os << io::fmt_double(map.x_at(ix)) << ',' << io::fmt_double(map.y_at(iy)) << ','
               << (std::isfinite(v) ? io::fmt_double(std::log10(std::max(v, 1e-300))) : std::string("inf")) << '\n';
        }
    o.close();
}

io::Rgb class_colour(int code) {
    switch (static_cast<RootClass>(code)) {
        case RootClass::AllInside: return {190, 190, 190};
        case RootClass::OnCircle: return {30, 30, 30};
        case RootClass::Coexist: return {90, 90, 90};
        case RootClass::AllOutside: return {255, 255, 255};
        case RootClass::Repeated: return {220, 40, 40};
    }
    return {255, 255, 255};
}

void class_legend(io::SvgPlot& plot) {
    plot.legend("light gray: all roots inside");
    plot.legend("dark gray: roots inside and outside");
    plot.legend("white: all roots outside");
}

void write_class_csv(const RunConfig& c, const RegionMap& map, bool with_member) {
    io::Output o(c.out);
    auto& os = o.stream();
    os << (with_member ? "re,im,code,class,member\n" : "re,im,code,class\n");
    for (int iy = 0; iy < map.ny; ++iy)
        for (int ix = 0; ix < map.nx; ++ix) {
            const bool bad = map.flagged[static_cast<std::size_t>(iy) * map.nx + ix];
            const int code = bad ? -1 : static_cast<int>(map.at(ix, iy));
            os << io::fmt_double(map.x_at(ix)) << ',' << io::fmt_double(map.y_at(iy)) << ',' << code << ','
               << (bad ? std::string_view("failed") : to_string(static_cast<RootClass>(code)));
            if (with_member) os << ',' << (code == static_cast<int>(RootClass::AllInside) ? 1 : 0);
            os << '\n';
        }
    o.close();
}

std::vector<Complex> locus_points(const MultistepScheme& s, int n) {
    auto locus = boundary_locus(s, n);
    if (!locus.points.empty()) locus.points.push_back(locus.points.front());
    return locus.points;
}

void cmd_region(const RunConfig& c) {
    const Window w = c.window.value_or(kDefaultOneStepWindow);
    const bool svg = infer_format(c, "csv") == "svg";
    if (c.custom.empty() && is_one_step(scheme_of(c))) {
        const OneStepScheme& s = one_step(scheme_of(c));
        const RegionMap map = one_step_region(s, w, c.nx, c.ny);
        if (svg) {
            io::SvgPlot plot(w, "stability region, " + s.name, "Re(xi)", "Im(xi)");
            plot.cells(map, [&](int ix, int iy) {
                return map.at(ix, iy) <= 1.0 ? io::Rgb{190, 190, 190} : io::Rgb{255, 255, 255};
            });
            plot.segments(io::contour(map, 1.0), "black", 1.5);
            plot.legend("gray: |p(xi)| <= 1");
            plot.legend("black: |p(xi)| = 1");
            io::Output o(c.out);
            plot.write(o.stream());
            o.close();
            return;
        }
        io::Output o(c.out);
        auto& os = o.stream();
        os << "re,im,modulus,member\n";
        for (int iy = 0; iy < map.ny; ++iy)
            for (int ix = 0; ix < map.nx; ++ix) {
                const double v = map.at(ix, iy);
                os << io::fmt_double(map.x_at(ix)) << ',' << io::fmt_double(map.y_at(iy)) << ','
                   << (std::isfinite(v) ? io::fmt_double(v) : std::string("inf")) << ',' << (v <= 1.0 ? 1 : 0)
                   << '\n';
            }
        o.close();
        return;
    }
    const MultistepScheme s = multistep_of(c);
    const RegionMap map = classification_map(s, w, c.nx, c.ny);
    if (svg) {
        io::SvgPlot plot(w, "absolute stability region, " + s.name, "Re(xi)", "Im(xi)");
        plot.cells(map, [&](int ix, int iy) { return class_colour(static_cast<int>(map.at(ix, iy))); });
        plot.polyline(locus_points(s, c.n_theta), "blue", 1.5);
        class_legend(plot);
        plot.legend("blue: boundary locus");
        io::Output o(c.out);
        plot.write(o.stream());
        o.close();
        return;
    }
    write_class_csv(c, map, true);
}

void cmd_rootsmap(const RunConfig& c) {
    const MultistepScheme s = multistep_of(c);
    const Window w = c.window.value_or(kDefaultOneStepWindow);
    const RegionMap map = classification_map(s, w, c.nx, c.ny);
    if (infer_format(c, "csv") == "svg") {
        io::SvgPlot plot(w, "characteristic roots, " + s.name, "Re(xi)", "Im(xi)");
        plot.cells(map, [&](int ix, int iy) { return class_colour(static_cast<int>(map.at(ix, iy))); });
        class_legend(plot);
        io::Output o(c.out);
        plot.write(o.stream());
        o.close();
        return;
    }
    write_class_csv(c, map, false);
}

void cmd_resign(const RunConfig& c) {
    const MultistepScheme s = multistep_of(c);
    const Window w = c.window.value_or(kDefaultLmmWindow);
    const RegionMap map = re_sign_map(s, w, c.nx, c.ny);
    if (infer_format(c, "csv") == "svg") {
        io::SvgPlot plot(w, "sign of Re(xi_hat), " + s.name, "a = Re(lambda h)", "theta = Im(lambda h)");
        plot.cells(map, [&](int ix, int iy) {
            if (map.flagged[static_cast<std::size_t>(iy) * map.nx + ix]) return io::Rgb{150, 150, 150};
            const double v = map.at(ix, iy);
            return v > 0 ? io::Rgb{215, 60, 50} : (v < 0 ? io::Rgb{60, 100, 200} : io::Rgb{255, 255, 255});
        });
        plot.legend("red: Re > 0");
        plot.legend("blue: Re < 0");
        io::Output o(c.out);
        plot.write(o.stream());
        o.close();
        return;
    }
    io::Output o(c.out);
    auto& os = o.stream();
    os << "a,theta,sign,pole\n";
    for (int iy = 0; iy < map.ny; ++iy)
        for (int ix = 0; ix < map.nx; ++ix) {
            const bool pole = map.flagged[static_cast<std::size_t>(iy) * map.nx + ix];
            os << io::fmt_double(map.x_at(ix)) << ',' << io::fmt_double(map.y_at(iy)) << ','
               << static_cast<int>(map.at(ix, iy)) << ',' << (pole ? 1 : 0) << '\n';
        }
    o.close();
}

void cmd_locus(const RunConfig& c) {
    const MultistepScheme s = multistep_of(c);
    const BoundaryLocus locus = boundary_locus(s, c.n_theta);
    if (infer_format(c, "csv") == "svg") {
        double r = 1.0;
        for (const auto& p : locus.points) r = std::max({r, std::abs(p.real()), std::abs(p.imag())});
        const Window w{-1.1 * r, 1.1 * r, -1.1 * r, 1.1 * r};
        io::SvgPlot plot(w, "boundary locus, " + s.name, "Re(xi)", "Im(xi)");
        plot.polyline(locus_points(s, c.n_theta), "blue", 1.5);
        plot.legend(std::to_string(locus.points.size()) + " points, " + std::to_string(locus.omitted.size()) +
                    " omitted");
        io::Output o(c.out);
        plot.write(o.stream());
        o.close();
        return;
    }
    io::Output o(c.out);
    auto& os = o.stream();
    os << "theta,re,im,omitted\n";
    std::size_t p = 0, q = 0;
    for (int j = 0; j < c.n_theta; ++j) {
        const double theta = 2.0 * std::numbers::pi * j / c.n_theta;
        if (q < locus.omitted.size() && locus.omitted[q] == j) {
            os << io::fmt_double(theta) << ",nan,nan,1\n";
            ++q;
        } else {
            os << io::fmt_double(theta) << ',' << io::fmt_double(locus.points[p].real()) << ','
               << io::fmt_double(locus.points[p].imag()) << ",0\n";
            ++p;
        }
    }
    o.close();
}

void cmd_repeated(const RunConfig& c) {
    const MultistepScheme s = multistep_of(c);
    const auto xs = repeated_root_locus(s);
    json loci = json::array();
    for (const auto& xi : xs) {
        const RootSet rs = lmm_characteristic_roots(s, xi);
        json roots = json::array();
        for (const auto& z : rs.roots) {
            json r = cjson(z);
            r["modulus"] = std::abs(z);
            roots.push_back(std::move(r));
        }
        json e;
        e["xi"] = cjson(xi);
        e["discriminant_residual"] = std::abs(two_step_discriminant(s, xi));
        e["root_separation"] = std::abs(rs.roots[0] - rs.roots[1]);
        e["multiplicity_flag"] = rs.has_repeated();
        e["roots"] = std::move(roots);
        loci.push_back(std::move(e));
    }
    if (infer_format(c, "json") == "csv") {
        io::Output o(c.out);
        auto& os = o.stream();
        os << "re,im,discriminant_residual,root_separation,multiplicity_flag\n";
        for (const auto& e : loci)
            os << io::fmt_double(e["xi"]["re"].get<double>()) << ',' << io::fmt_double(e["xi"]["im"].get<double>())
               << ',' << io::fmt_double(e["discriminant_residual"].get<double>()) << ','
               << io::fmt_double(e["root_separation"].get<double>()) << ','
               << (e["multiplicity_flag"].get<bool>() ? 1 : 0) << '\n';
        o.close();
        return;
    }
    write_json(c.out, json{{"scheme", s.name}, {"loci", std::move(loci)}});
}

void cmd_phase(const RunConfig& c) {
    const SchemeId id = scheme_of(c);
    if (c.theta) {
        const PhaseReport r = phase_error(id, c.a, *c.theta);
        json j{{"scheme", std::string(to_string(id))},
               {"a", r.a},
               {"theta", r.theta},
               {"im_hat", r.im_hat},
               {"classification", std::string(to_string(r.classification))}};
        write_json(c.out, j);
        return;
    }
    io::Output o(c.out);
    auto& os = o.stream();
    os << "theta,im_hat,classification\n";
    for (int j = 0; j < c.samples; ++j) {
        const double theta = -std::numbers::pi + 2.0 * std::numbers::pi * (j + 0.5) / c.samples;
        const PhaseReport r = phase_error(id, c.a, theta);
        os << io::fmt_double(theta) << ',' << io::fmt_double(r.im_hat) << ',' << to_string(r.classification) << '\n';
    }
    o.close();
}

json sweep_json(const SweepReport& r) {
    json j;
    j["xs"] = r.xs;
    j["ys"] = r.ys;
    j["slope"] = r.slope;
    j["intercept"] = r.intercept;
    if (!r.failures.empty()) j["failures"] = r.failures;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

void emit_summary(const RunConfig& c, const json& j, const std::function<void(std::ostream&)>& csv) {
    if (infer_format(c, "csv") == "json") {
        write_json(c.out, j);
    } else {
        io::Output o(c.out);
        csv(o.stream());
        o.close();
    }
    if (!c.summary.empty()) write_json(c.summary, j);
}

std::vector<double> default_extrap_steps() {
    std::vector<double> hs;
    for (int e = 3; e <= 8; ++e) hs.push_back(std::ldexp(1.0, -e));
    return hs;
}

void cmd_extrap(const RunConfig& c) {
    const std::vector<double> hs = c.h_list.empty() ? default_extrap_steps() : c.h_list;
    const ExtrapReport r = extrapolation_study(c.lambda, hs);
    double max_re = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i)
        if (r.in_window[i]) max_re = std::max(max_re, std::abs(r.lambda_exp[i].real()));
    json j = sweep_json(r.sweep);
    j["lambda"] = cjson(c.lambda);
    j["window"] = extrapolation_conservative_window();
    j["max_abs_re_in_window"] = max_re;
    emit_summary(c, j, [&](std::ostream& os) {
        os << "h,error,re_exp,im_exp,in_window,sign_preserved\n";
        for (std::size_t i = 0; i < hs.size(); ++i)
            os << io::fmt_double(hs[i]) << ',' << io::fmt_double(r.sweep.ys[i]) << ','
               << io::fmt_double(r.lambda_exp[i].real()) << ',' << io::fmt_double(r.lambda_exp[i].imag()) << ','
               << (r.in_window[i] ? 1 : 0) << ',' << (r.sign_preserved[i] ? 1 : 0) << '\n';
    });
}

int nominal_slope(SchemeId id, ErrorMeasure m) {
    const int p = std::visit([](const auto& s) { return s.order; }, lookup(id));
    // |lambda_hat h - lambda h| = O(h^{p+1}) and |lambda_hat - lambda| = O(h^p).
    return m == ErrorMeasure::Scaled ? p + 1 : p;
}

void cmd_order(const RunConfig& c) {
    std::vector<SchemeId> ids;
    for (const auto& t : c.schemes) {
        if (t == "all") {
            ids.assign(kAllSchemes.begin(), kAllSchemes.end());
            break;
        }
        ids.push_back(parse_scheme_id(t));
    }
    if (ids.empty()) throw UsageError("--scheme is required", kExitUsage);
    const std::vector<double> hs = c.h_list.empty() ? default_order_steps(c.lambda) : c.h_list;

    json results = json::array();
    std::vector<std::pair<SchemeId, SweepReport>> rows;
    for (SchemeId id : ids) {
        const ErrorMeasure m = c.measure.empty() ? default_measure(id)
                                                 : (c.measure == "scaled" ? ErrorMeasure::Scaled : ErrorMeasure::Eigenvalue);
        SweepReport r = order_study(id, c.lambda, hs, m);
        json e;
        e["scheme"] = std::string(to_string(id));
        e["measure"] = m == ErrorMeasure::Scaled ? "scaled" : "eigen";
        e["slope"] = r.slope;
        e["intercept"] = r.intercept;
        e["nominal_slope"] = nominal_slope(id, m);
        results.push_back(std::move(e));
        rows.emplace_back(id, std::move(r));
    }
    json j{{"lambda", cjson(c.lambda)}, {"h", hs}, {"results", results}};
    emit_summary(c, j, [&](std::ostream& os) {
        os << "scheme,measure,h,error\n";
        for (std::size_t k = 0; k < rows.size(); ++k)
            for (std::size_t i = 0; i < hs.size(); ++i)
                os << to_string(rows[k].first) << ',' << results[k]["measure"].get<std::string>() << ','
                   << io::fmt_double(hs[i]) << ',' << io::fmt_double(rows[k].second.ys[i]) << '\n';
    });
}

void cmd_convdiff(const RunConfig& c) {
    const SchemeId id = scheme_of(c);
    ConvDiffOptions opts;
    opts.a = c.conv_a;
    opts.eps = c.conv_eps;
    opts.N = c.N;
    opts.seed = c.seed;
    const ConvDiffMode mode = c.mode == "fit" ? ConvDiffMode::Fit : ConvDiffMode::ClosedForm;
    const ConvDiffResult r = convdiff_recover(id, c.k, c.h, mode, opts);
    json j{{"scheme", std::string(to_string(id))},
           {"k", r.k},
           {"h", r.h},
           {"mode", c.mode},
           {"a", opts.a},
           {"eps", opts.eps},
           {"lambda_true", cjson(r.lambda_true)},
           {"lambda_hat", cjson(r.lambda_hat)},
           {"a_hat", r.a_hat},
           {"eps_hat", r.eps_hat}};
    emit_summary(c, j, [&](std::ostream& os) {
        os << "scheme,k,h,mode,a_hat,eps_hat\n"
           << to_string(id) << ',' << r.k << ',' << io::fmt_double(r.h) << ',' << c.mode << ','
           << io::fmt_double(r.a_hat) << ',' << io::fmt_double(r.eps_hat) << '\n';
    });
}

void cmd_noise_sweep(const RunConfig& c) {
    const SchemeId id = scheme_of(c);
    const std::vector<double> sig = c.sigmas.empty() ? pow2_range(-10, -4) : c.sigmas;
    SweepReport r;
    if (c.kind == "scalar") {
        ScalarSweepOptions opts;
        if (c.lambda != Complex{0.0}) opts.lambda = c.lambda;
        r = scalar_noise_sweep(id, sig, c.trials, c.seed, opts);
    } else {
        NoiseSweepOptions opts;
        opts.rate = c.rate;
        r = noise_sweep(id, sig, c.trials, c.seed, opts);
    }
    json j = sweep_json(r);
    j["scheme"] = std::string(to_string(id));
    j["kind"] = c.kind;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    emit_summary(c, j, [&](std::ostream& os) {
        os << "sigma,trial,value\n";
        for (std::size_t i = 0; i < r.xs.size(); ++i)
            for (std::size_t t = 0; t < r.per_trial[i].size(); ++t)
                os << io::fmt_double(r.xs[i]) << ',' << t << ',' << io::fmt_double(r.per_trial[i][t]) << '\n';
    });
}

void cmd_matrix_fit(const RunConfig& c) {
    const SchemeId id = scheme_of(c);
    Vector2 x0(1.0, 0.0);
    std::vector<Vector2> data;
    double h = c.h;
    if (!c.data.empty()) {
        io::parse_vector_csv(io::read_text(c.data), x0, data, h);
    } else {
        data = matrix_trajectory(rotation_generator(c.rate), x0, h, c.N, c.sigma, c.seed);
    }
    const MatrixFitResult r = fit_matrix(id, data, x0, h);
    json j{{"scheme", std::string(to_string(id))},
           {"h", h},
           {"samples", data.size()},
           {"A_hat", {{r.A_hat(0, 0), r.A_hat(0, 1)}, {r.A_hat(1, 0), r.A_hat(1, 1)}}},
           {"objective", r.objective},
           {"iterations", r.iterations},
           {"converged", r.converged}};
    if (c.data.empty()) {
        j["rate"] = c.rate;
        j["sigma"] = c.sigma;
        j["seed"] = c.seed;
    }
    emit_summary(c, j, [&](std::ostream& os) {
        os << "a11,a12,a21,a22,objective\n"
           << io::fmt_double(r.A_hat(0, 0)) << ',' << io::fmt_double(r.A_hat(0, 1)) << ','
           << io::fmt_double(r.A_hat(1, 0)) << ',' << io::fmt_double(r.A_hat(1, 1)) << ','
           << io::fmt_double(r.objective) << '\n';
    });
}

std::vector<std::string> scheme_tokens() {
    std::vector<std::string> t;
    for (SchemeId id : kAllSchemes) t.emplace_back(to_string(id));
    return t;
}

}  // namespace

Complex parse_complex(const std::string& s) {
    const auto parts = split_commas(s);
    if (parts.size() != 2) throw UsageError("expected re,im but got '" + s + "'", kExitUsage);
    return {to_double(parts[0]), to_double(parts[1])};
}

std::vector<double> parse_number_list(const std::string& s) {
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
        auto exponent = [&](const std::string& p) {
            if (p.rfind("2^", 0) != 0) throw UsageError("range endpoints must look like 2^e: '" + s + "'", kExitUsage);
            const double e = to_double(p.substr(2));
            if (e != std::floor(e)) throw UsageError("range exponents must be integers: '" + s + "'", kExitUsage);
            return static_cast<int>(e);
        };
        const int lo = exponent(s.substr(0, dots)), hi = exponent(s.substr(dots + 2));
        std::vector<double> out;
        const int step = lo <= hi ? 1 : -1;
        for (int e = lo;; e += step) {
            out.push_back(std::ldexp(1.0, e));
            if (e == hi) break;
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& p : split_commas(s)) out.push_back(to_double(p));
    if (out.empty()) throw UsageError("empty number list", kExitUsage);
    return out;
}

Window parse_window(const std::string& s) {
    const auto parts = split_commas(s);
    if (parts.size() != 4) throw UsageError("expected x0,x1,y0,y1 but got '" + s + "'", kExitUsage);
    Window w{to_double(parts[0]), to_double(parts[1]), to_double(parts[2]), to_double(parts[3])};
    if (!(w.x1 > w.x0) || !(w.y1 > w.y0)) throw UsageError("window must satisfy x0 < x1 and y0 < y1", kExitUsage);
    return w;
}

RunConfig parse_args(int argc, const char* const* argv) {
    RunConfig cfg;
    CLI::App app{"Learned eigenvalues of time integrators fitted to dz/dt = lambda z", "stepfit"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string scheme, lambda, z0, window, hlist, sigmas, theta;
    const auto tokens = scheme_tokens();
    auto add_scheme = [&](CLI::App* sub, bool required = true) {
        auto* o = sub->add_option("--scheme", scheme, "Integrator: " + CLI::detail::join(tokens, ", "))
                      ->check(CLI::IsMember(tokens));
        if (required) o->required();
    };
    auto add_custom = [&](CLI::App* sub) {
        sub->add_option("--custom", cfg.custom, "JSON file {\"k\", \"alpha\", \"beta\"} for a custom multistep method")
            ->check(CLI::ExistingFile);
    };
    auto add_lambda = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--lambda", lambda, "Eigenvalue as re,im");
        if (required) o->required();
    };
    auto add_out = [&](CLI::App* sub, const std::string& formats) {
        sub->add_option("--out", cfg.out, "Output path, - for standard output")->capture_default_str();
        sub->add_option("--format", cfg.format, "Output format (" + formats + "); default from --out extension")
            ->check(CLI::IsMember(split_commas(formats)));
    };
    auto add_grid = [&](CLI::App* sub, const std::string& default_window) {
        sub->add_option("--window", window, "Window x0,x1,y0,y1 (default " + default_window + ")");
        sub->add_option("--nx", cfg.nx, "Grid cells along x")->capture_default_str()->check(CLI::PositiveNumber);
        sub->add_option("--ny", cfg.ny, "Grid cells along y")->capture_default_str()->check(CLI::PositiveNumber);
    };
    auto add_summary = [&](CLI::App* sub) {
        sub->add_option("--summary", cfg.summary, "Also write the JSON summary to this path");
    };

    auto* learn_cmd = app.add_subcommand("learn", "Closed-form learned eigenvalue for one scheme");
    add_scheme(learn_cmd, false);
    add_custom(learn_cmd);
    add_lambda(learn_cmd, true);
    learn_cmd->add_option("--h", cfg.h, "Step size")->required();
    add_out(learn_cmd, "json,csv");

    auto* gen_cmd = app.add_subcommand("gen", "Sample Z_n = Z0 e^{lambda H n} + noise to CSV (t,re,im)");
    add_lambda(gen_cmd, true);
    gen_cmd->add_option("--H", cfg.H, "Sampling step")->capture_default_str();
    gen_cmd->add_option("--m", cfg.m, "Integrator substeps per sample")->capture_default_str();
    gen_cmd->add_option("--N", cfg.N, "Number of samples after Z0")->capture_default_str();
    gen_cmd->add_option("--sigma", cfg.sigma, "Noise scale, E|eps|^2 = sigma^2")->capture_default_str();
    gen_cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    gen_cmd->add_option("--Z0", z0, "Initial value re,im (default 1,0)");
    gen_cmd->add_option("--out", cfg.out, "Output CSV path, - for standard output")->capture_default_str();

    auto* fit_cmd = app.add_subcommand("fit", "Multi-start simplex fit of xi = lambda h to trajectory data");
    add_scheme(fit_cmd);
    fit_cmd->add_option("--data", cfg.data, "Trajectory CSV (t,re,im)")->required();
    fit_cmd->add_option("--m", cfg.m, "Integrator substeps per sample")->capture_default_str();
    fit_cmd->add_option("--starts", cfg.starts, "Number of simplex starts")->capture_default_str();
    add_out(fit_cmd, "json,csv");

    auto* land_cmd = app.add_subcommand("landscape", "Objective over a grid of xi; CSV re,im,log10_objective");
    add_scheme(land_cmd);
    land_cmd->add_option("--data", cfg.data, "Trajectory CSV (t,re,im)")->required();
    land_cmd->add_option("--m", cfg.m, "Integrator substeps per sample")->capture_default_str();
    double re_min = -2.0, re_max = 0.5, im_min = -1.5, im_max = 1.5;
    land_cmd->add_option("--re-min", re_min)->capture_default_str();
    land_cmd->add_option("--re-max", re_max)->capture_default_str();
    land_cmd->add_option("--im-min", im_min)->capture_default_str();
    land_cmd->add_option("--im-max", im_max)->capture_default_str();
    land_cmd->add_option("--nx", cfg.nx, "Grid cells along Re")->capture_default_str();
    land_cmd->add_option("--ny", cfg.ny, "Grid cells along Im")->capture_default_str();
    add_out(land_cmd, "csv,svg");

    auto* region_cmd = app.add_subcommand(
        "region", "Stability region: |p(xi)| for one-step schemes, root classes for multistep schemes");
    add_scheme(region_cmd, false);
    add_custom(region_cmd);
    add_grid(region_cmd, "-4,1,-3,3");
    region_cmd->add_option("--n", cfg.n_theta, "Boundary locus samples for SVG output")->capture_default_str();
    add_out(region_cmd, "csv,svg");

    auto* locus_cmd = app.add_subcommand("locus", "Boundary locus rho(e^{i theta}) / kappa(e^{i theta})");
    add_scheme(locus_cmd, false);
    add_custom(locus_cmd);
    locus_cmd->add_option("--n", cfg.n_theta, "Number of theta samples on [0, 2 pi)")->capture_default_str();
    add_out(locus_cmd, "csv,svg");

    auto* roots_cmd = app.add_subcommand("rootsmap", "Characteristic-root classification over a xi window");
    add_scheme(roots_cmd, false);
    add_custom(roots_cmd);
    add_grid(roots_cmd, "-4,1,-3,3");
    add_out(roots_cmd, "csv,svg");

    auto* resign_cmd = app.add_subcommand("resign-map", "Sign of Re(rho(e^x) / kappa(e^x)) over an (a, theta) window");
    add_scheme(resign_cmd, false);
    add_custom(resign_cmd);
    add_grid(resign_cmd, "-3,0,-pi,pi");
    add_out(resign_cmd, "csv,svg");

    auto* rep_cmd = app.add_subcommand("repeated", "Repeated-root locus of a two-step scheme");
    add_scheme(rep_cmd, false);
    add_custom(rep_cmd);
    add_out(rep_cmd, "json,csv");

    auto* phase_cmd = app.add_subcommand("phase", "Im(lambda_hat h) and phase class for data e^{a + i theta}");
    add_scheme(phase_cmd);
    phase_cmd->add_option("--a", cfg.a, "Re(lambda h)")->capture_default_str();
    phase_cmd->add_option("--theta", theta, "Im(lambda h); omit for a CSV sweep over (-pi, pi)");
    phase_cmd->add_option("--samples", cfg.samples, "Sweep samples")->capture_default_str();
    phase_cmd->add_option("--out", cfg.out, "Output path")->capture_default_str();

    auto* extrap_cmd = app.add_subcommand("extrap", "Richardson-extrapolated trapezoidal eigenvalues");
    add_lambda(extrap_cmd, true);
    extrap_cmd->add_option("--h-list", hlist, "Steps, e.g. 2^-3..2^-8 (default) or 0.1,0.05,...");
    add_out(extrap_cmd, "csv,json");
    add_summary(extrap_cmd);

    auto* order_cmd = app.add_subcommand("order", "Convergence order of the learned eigenvalue");
    order_cmd->add_option("--scheme", scheme, "Scheme token, comma-separated list, or all")->required();
    add_lambda(order_cmd, true);
    order_cmd->add_option("--h-list", hlist, "Steps (default 2^-4..2^-9 divided by |lambda|)");
    order_cmd->add_option("--measure", cfg.measure,
                          "eigen: |lambda_hat - lambda|, scaled: |lambda_hat h - lambda h| "
                          "(default: eigen for one-step, scaled for multistep)")
        ->check(CLI::IsMember({"eigen", "scaled"}));
    add_out(order_cmd, "csv,json");
    add_summary(order_cmd);

    auto* conv_cmd = app.add_subcommand("convdiff", "Coefficient recovery for u_t = a u_x + eps u_xx, Fourier mode k");
    add_scheme(conv_cmd);
    conv_cmd->add_option("--k", cfg.k, "Mode index")->capture_default_str();
    conv_cmd->add_option("--h", cfg.h, "Sampling step")->capture_default_str();
    conv_cmd->add_option("--mode", cfg.mode, "closed or fit")->capture_default_str()->check(
        CLI::IsMember({"closed", "fit"}));
    conv_cmd->add_option("--a", cfg.conv_a, "Convection speed")->capture_default_str();
    conv_cmd->add_option("--eps", cfg.conv_eps, "Diffusion coefficient")->capture_default_str();
    conv_cmd->add_option("--N", cfg.N, "Samples in fit mode");
    conv_cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    add_out(conv_cmd, "json,csv");
    add_summary(conv_cmd);

    auto* noise_cmd = app.add_subcommand("noise-sweep", "Fit error against noise level");
    add_scheme(noise_cmd);
    noise_cmd->add_option("--sigmas", sigmas, "Noise levels (default 2^-10..2^-4)");
    noise_cmd->add_option("--trials", cfg.trials, "Trials per level")->capture_default_str();
    noise_cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    noise_cmd->add_option("--kind", cfg.kind,
                          "matrix: harmonic oscillator, h = 1/128, 256 samples; "
                          "scalar: lambda = -0.2+2i, h = 0.1, 64 samples")
        ->capture_default_str()
        ->check(CLI::IsMember({"matrix", "scalar"}));
    noise_cmd->add_option("--rate", cfg.rate, "Oscillator rate (matrix kind)")->capture_default_str();
    add_lambda(noise_cmd, false);
    add_out(noise_cmd, "csv,json");
    add_summary(noise_cmd);

    auto* mfit_cmd = app.add_subcommand("matrix-fit", "Fit the 2x2 matrix of x' = A x from samples");
    add_scheme(mfit_cmd);
    mfit_cmd->add_option("--data", cfg.data, "CSV t,x,y; row 0 is x0 (default: generate oscillator data)");
    mfit_cmd->add_option("--rate", cfg.rate, "Oscillator rate for generated data")->capture_default_str();
    mfit_cmd->add_option("--h", cfg.h, "Sampling step for generated data (default 1/128)");
    mfit_cmd->add_option("--N", cfg.N, "Samples for generated data (default 256)");
    mfit_cmd->add_option("--sigma", cfg.sigma, "Per-component noise std for generated data")->capture_default_str();
    mfit_cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    add_out(mfit_cmd, "json,csv");
    add_summary(mfit_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, err;
        const int code = app.exit(e, out, err);
        if (code == 0) throw UsageError(out.str(), kExitOk);
        throw UsageError(err.str().empty() ? e.what() : err.str(), kExitUsage);
    }

    const auto subs = app.get_subcommands();
    CLI::App* sub = subs.front();
    cfg.command = sub->get_name();

    if (cfg.command == "matrix-fit") {
        if (sub->count("--h") == 0) cfg.h = 1.0 / 128.0;
        if (sub->count("--N") == 0) cfg.N = 256;
    }
    if (cfg.command == "convdiff" && sub->count("--N") == 0) cfg.N = 500;

    if (!scheme.empty()) {
        for (const auto& t : split_commas(scheme)) {
            if (t != "all" && std::find(tokens.begin(), tokens.end(), t) == tokens.end())
                throw UsageError("--scheme: unknown scheme '" + t + "'", kExitUsage);
            cfg.schemes.push_back(t);
        }
    }
    const bool scheme_optional = cfg.command == "learn" || cfg.command == "region" || cfg.command == "locus" ||
                                 cfg.command == "rootsmap" || cfg.command == "resign-map" || cfg.command == "repeated";
    if (scheme_optional && cfg.schemes.empty() && cfg.custom.empty())
        throw UsageError(cfg.command + ": --scheme or --custom is required", kExitUsage);
    if (!cfg.schemes.empty() && !cfg.custom.empty())
        throw UsageError(cfg.command + ": give either --scheme or --custom", kExitUsage);

    if (!lambda.empty()) cfg.lambda = parse_complex(lambda);
    if (!z0.empty()) cfg.Z0 = parse_complex(z0);
    if (!window.empty()) cfg.window = parse_window(window);
    if (cfg.command == "landscape") {
        if (!(re_max > re_min) || !(im_max > im_min))
            throw UsageError("landscape: need re-min < re-max and im-min < im-max", kExitUsage);
        cfg.window = Window{re_min, re_max, im_min, im_max};
    }
    if (!hlist.empty()) cfg.h_list = parse_number_list(hlist);
    if (!sigmas.empty()) cfg.sigmas = parse_number_list(sigmas);
    if (!theta.empty()) cfg.theta = to_double(theta);
    return cfg;
}

void run(const RunConfig& c) {
    if (c.command == "learn") cmd_learn(c);
    else if (c.command == "gen") cmd_gen(c);
    else if (c.command == "fit") cmd_fit(c);
    else if (c.command == "landscape") cmd_landscape(c);
    else if (c.command == "region") cmd_region(c);
    else if (c.command == "locus") cmd_locus(c);
    else if (c.command == "rootsmap") cmd_rootsmap(c);
    else if (c.command == "resign-map") cmd_resign(c);
    else if (c.command == "repeated") cmd_repeated(c);
    else if (c.command == "phase") cmd_phase(c);
    else if (c.command == "extrap") cmd_extrap(c);
    else if (c.command == "order") cmd_order(c);
    else if (c.command == "convdiff") cmd_convdiff(c);
    else if (c.command == "noise-sweep") cmd_noise_sweep(c);
    else if (c.command == "matrix-fit") cmd_matrix_fit(c);
    else throw UsageError("unknown subcommand '" + c.command + "'", kExitUsage);
}

int main_entry(int argc, const char* const* argv, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_args(argc, argv);
    } catch (const UsageError& e) {
        if (e.code() == kExitOk) {
            std::cout << e.what();
            return kExitOk;
        }
        err << e.what();
        if (std::string_view(e.what()).empty() || std::string_view(e.what()).back() != '\n') err << '\n';
        return e.code();
    }
    try {
        run(cfg);
    } catch (const UsageError& e) {
        err << "stepfit: " << e.what() << '\n';
        return e.code();
    } catch (const IoError& e) {
        err << "stepfit: " << e.what() << '\n';
        return kExitIo;
    } catch (const Error& e) {
        err << "stepfit: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "stepfit: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitOk;
}

}  // namespace stepfit::cli
