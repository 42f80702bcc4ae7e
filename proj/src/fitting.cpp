#include "stepfit/fitting.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include "stepfit/errors.hpp"
#include "stepfit/learn.hpp"

namespace stepfit {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kPenalty = 1e300;

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

struct GslFree {
    void operator()(gsl_multimin_fminimizer* p) const { gsl_multimin_fminimizer_free(p); }
    void operator()(gsl_vector* p) const { gsl_vector_free(p); }
};

struct Trampoline {
    const std::function<double(std::span<const double>)>* f;
    std::vector<double> buf;
};

double call_objective(const gsl_vector* v, void* params) {
    auto* t = static_cast<Trampoline*>(params);
    for (std::size_t i = 0; i < t->buf.size(); ++i) t->buf[i] = gsl_vector_get(v, i);
    const double y = (*t->f)(t->buf);
    return std::isfinite(y) ? std::min(y, kPenalty) : kPenalty;
}

double safe_objective(const Scheme& s, Complex xi, const TrajectoryData& data) {
    try {
        return objective(s, xi, data);
    } catch (const PoleError&) {
        return std::numeric_limits<double>::infinity();
    } catch (const SingularStepError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream, double sigma)
    : rng_(seeded(seed, stream)), normal_(0.0, sigma / std::numbers::sqrt2) {}

Complex NoiseStream::next() {
    if (normal_.stddev() == 0.0) return Complex{0.0};
    const double re = normal_(rng_);
    const double im = normal_(rng_);
    return {re, im};
}

TrajectoryData generate(Complex lambda, double H, int m, int N, Complex Z0, double sigma, std::uint64_t seed,
                        std::uint64_t stream) {
    if (!(H > 0.0)) throw DegenerateError("generate: H must be positive");
    if (m < 1) throw DegenerateError("generate: m must be >= 1");
    if (N < 2) throw DegenerateError("generate: N must be >= 2");
    if (!(sigma >= 0.0)) throw DegenerateError("generate: sigma must be nonnegative");
    NoiseStream noise(seed, stream, sigma);
    TrajectoryData d;
    d.H = H;
    d.m = m;
    d.sigma = sigma;
    d.seed = seed;
    d.Z0 = Z0 + noise.next();
    d.samples.resize(N);
    for (int n = 1; n <= N; ++n) d.samples[n - 1] = Z0 * std::exp(lambda * (H * n)) + noise.next();
    return d;
}

double objective_one_step(const OneStepScheme& s, Complex xi, const TrajectoryData& data) {
    if (data.samples.empty()) throw DegenerateError("objective: no samples");
    const Complex p = s.amplification(xi);
    Complex q{1.0};
    for (int j = 0; j < data.m; ++j) q *= p;
    Complex z = data.Z0;
    double sum = 0.0;
    for (const auto& Z : data.samples) {
        z *= q;
        sum += std::norm(z - Z);
    }
    return finite_or_inf(sum / static_cast<double>(data.samples.size()));
}

std::vector<Complex> lmm_recurrence(const MultistepScheme& s, Complex xi, std::span<const Complex> seeds,
                                    std::size_t n_max) {
    const auto k = static_cast<std::size_t>(s.k);
    if (seeds.size() != k) throw DegenerateError("recurrence: need exactly k seed values");
    const Complex lead = s.alpha[k] - xi * s.beta[k];
    if (std::abs(lead) <= 4.0 * kEps * (std::abs(s.alpha[k]) + std::abs(xi) * std::abs(s.beta[k])))
        throw SingularStepError(s.name + ": alpha_k - xi beta_k vanishes");
    std::vector<Complex> c(k);
    for (std::size_t j = 0; j < k; ++j) c[j] = (s.alpha[j] - xi * s.beta[j]) / lead;

    std::vector<Complex> z(seeds.begin(), seeds.end());
    z.reserve(std::max(n_max + 1, k));
    for (std::size_t n = k; n <= n_max; ++n) {
        Complex acc{0.0};
        for (std::size_t j = 0; j < k; ++j) acc += c[j] * z[n - k + j];
        z.push_back(-acc);
    }
    z.resize(std::min(z.size(), n_max + 1));
    return z;
}

double objective_lmm(const MultistepScheme& s, Complex xi, const TrajectoryData& data) {
    if (data.m != 1) throw UnsupportedError("objective: multistep fitting requires m == 1");
    const std::size_t N = data.size();
    const auto k = static_cast<std::size_t>(s.k);
    if (N < k) throw DegenerateError("objective: need at least k samples beyond Z_0");
    std::vector<Complex> seeds(k);
    for (std::size_t j = 0; j < k; ++j) seeds[j] = data.at(j);
    const auto z = lmm_recurrence(s, xi, seeds, N);
    double sum = 0.0;
    for (std::size_t n = k; n <= N; ++n) sum += std::norm(z[n] - data.at(n));
    return finite_or_inf(sum / static_cast<double>(N - k + 1));
}

double objective(const Scheme& s, Complex xi, const TrajectoryData& data) {
    return std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, OneStepScheme>)
                return objective_one_step(d, xi, data);
            else
                return objective_lmm(d, xi, data);
        },
        s);
}

double objective(SchemeId id, Complex xi, const TrajectoryData& data) { return objective(lookup(id), xi, data); }

RegionMap landscape(const Scheme& s, const TrajectoryData& data, Window w, int nx, int ny) {
    if (nx < 1 || ny < 1) throw DegenerateError("landscape: grid sizes must be positive");
    RegionMap map(w, nx, ny);
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const Complex xi{map.x_at(ix), map.y_at(iy)};
            const double v = safe_objective(s, xi, data);
            map.at(ix, iy) = v;
            if (!std::isfinite(v)) map.flagged[static_cast<std::size_t>(iy) * nx + ix] = true;
        }
    return map;
}

RegionMap landscape(SchemeId id, const TrajectoryData& data, Window w, int nx, int ny) {
    return landscape(lookup(id), data, w, nx, ny);
}

SimplexResult simplex_minimize(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                               std::vector<double> step, const SimplexOptions& opts) {
    static std::once_flag quiet;
    std::call_once(quiet, [] { gsl_set_error_handler_off(); });

    const std::size_t n = x0.size();
    if (n == 0 || step.size() != n) throw DegenerateError("simplex: start and step sizes differ");
    Trampoline t{&f, std::vector<double>(n)};
    gsl_multimin_function fn{&call_objective, n, &t};

    std::unique_ptr<gsl_vector, GslFree> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, GslFree> ss(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x.get(), i, x0[i]);
        gsl_vector_set(ss.get(), i, step[i]);
    }
    std::unique_ptr<gsl_multimin_fminimizer, GslFree> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    SimplexResult out;
    if (gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), ss.get()) != GSL_SUCCESS) {
        out.x = std::move(x0);
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    for (int it = 0; it < opts.max_iter; ++it) {
        ++out.iterations;
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_fminimizer_size(m.get()) < opts.tol) {
            out.converged = true;
            break;
        }
    }
    const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(best, i);
    out.value = gsl_multimin_fminimizer_minimum(m.get());
    if (out.value >= kPenalty) out.value = std::numeric_limits<double>::infinity();
    return out;
}

std::vector<Complex> fit_starts(const Scheme& s, const TrajectoryData& data, const FitOptions& opts) {
    std::vector<Complex> starts;
    if (data.Z0 != Complex{0.0} && !data.samples.empty() && data.samples[0] != Complex{0.0}) {
        const Complex x = std::log(data.samples[0] / data.Z0) / static_cast<double>(data.m);
        try {
            if (const auto* one = std::get_if<OneStepScheme>(&s)) {
                const LearnedEigen r = learn_one_step(*one, x, 1.0);
                starts.push_back(r.selected);
                for (const auto& z : r.candidates.roots)
                    if (z != r.selected) starts.push_back(z);
            } else {
                starts.push_back(lmm_learned_xi(std::get<MultistepScheme>(s), x));
            }
        } catch (const Error&) {
        }
    }
    if (starts.empty()) starts.emplace_back(0.0);
    const auto total = static_cast<std::size_t>(std::max(opts.starts, 1));
    if (starts.size() > total) starts.resize(total);

    const Complex centre = starts.front();
    const double radius = opts.ring_radius > 0.0 ? opts.ring_radius : std::max(0.1 * std::abs(centre), 1e-2);
    const std::size_t ring = total - starts.size();
    for (std::size_t j = 0; j < ring; ++j) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(ring) + 0.1;
        starts.push_back(centre + std::polar(radius, phi));
    }
    return starts;
}

FitResult minimize(const Scheme& s, const TrajectoryData& data, const FitOptions& opts) {
    const std::vector<Complex> starts = fit_starts(s, data, opts);
    const double radius = opts.ring_radius > 0.0 ? opts.ring_radius : std::max(0.1 * std::abs(starts.front()), 1e-2);
    auto f = [&](std::span<const double> v) { return safe_objective(s, Complex{v[0], v[1]}, data); };

    SimplexOptions so{opts.max_iter, opts.tol};
    FitResult best;
    best.objective_value = std::numeric_limits<double>::infinity();
    for (const auto& z0 : starts) {
        const SimplexResult r = simplex_minimize(f, {z0.real(), z0.imag()}, {0.5 * radius, 0.5 * radius}, so);
        ++best.starts_used;
        if (r.value < best.objective_value) {
            best.xi_star = {r.x[0], r.x[1]};
            best.objective_value = r.value;
            best.iterations = r.iterations;
            best.converged = r.converged;
        }
    }
    if (!std::isfinite(best.objective_value))
        throw IterationError("minimize: no start reached a finite objective", starts.front());
    best.objective_value = objective(s, best.xi_star, data);
    return best;
}

FitResult minimize(SchemeId id, const TrajectoryData& data, const FitOptions& opts) {
    return minimize(lookup(id), data, opts);
}

ModeCoefficients mode_coefficients(const MultistepScheme& s, Complex xi, const TrajectoryData& data,
                                   CoefficientFit fit, double coeff_tol) {
    const RootSet rs = lmm_characteristic_roots(s, xi);
    if (rs.has_repeated())
        throw MultiplicityError(s.name + ": repeated characteristic roots; modes n^v zeta^n are not fitted");
    ModeCoefficients mc;
    mc.zeta = rs.roots;
    std::stable_sort(mc.zeta.begin(), mc.zeta.end(),
                     [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });

    const auto k = static_cast<Eigen::Index>(mc.zeta.size());
    const auto rows = fit == CoefficientFit::LeastSquares ? static_cast<Eigen::Index>(data.size() + 1) : k;
    if (rows < k) throw DegenerateError("mode coefficients: fewer samples than modes");
    Eigen::MatrixXcd V(rows, k);
    Eigen::VectorXcd b(rows);
    for (Eigen::Index j = 0; j < k; ++j) {
        Complex p{1.0};
        for (Eigen::Index n = 0; n < rows; ++n) {
            V(n, j) = p;
            p *= mc.zeta[j];
        }
    }
    for (Eigen::Index n = 0; n < rows; ++n) b(n) = data.at(static_cast<std::size_t>(n));

    const Eigen::VectorXcd c =
        fit == CoefficientFit::LeastSquares ? Eigen::VectorXcd(V.colPivHouseholderQr().solve(b))
                                            : Eigen::VectorXcd(V.partialPivLu().solve(b));
    mc.c.assign(c.data(), c.data() + k);
    for (Eigen::Index j = 0; j < k; ++j)
        if (std::abs(mc.zeta[j]) > 1.0 + kUnitCircleBand && std::abs(mc.c[j]) > coeff_tol) mc.growth_flag = true;
    return mc;
}

ModeCoefficients mode_coefficients(SchemeId id, Complex xi, const TrajectoryData& data, CoefficientFit fit,
                                   double coeff_tol) {
    return mode_coefficients(multistep(id), xi, data, fit, coeff_tol);
}

std::vector<Complex> replay(const ModeCoefficients& mc, std::size_t n_max) {
    std::vector<Complex> z(n_max + 1, Complex{0.0});
    for (std::size_t j = 0; j < mc.c.size(); ++j) {
        Complex p = mc.c[j];
        for (std::size_t n = 0; n <= n_max; ++n) {
            z[n] += p;
            p *= mc.zeta[j];
        }
    }
    return z;
}

}  // namespace stepfit
