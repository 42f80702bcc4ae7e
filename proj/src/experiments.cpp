#include "stepfit/experiments.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stepfit/errors.hpp"
#include "stepfit/fitting.hpp"
#include "stepfit/numerics.hpp"

namespace stepfit {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Matrix2 solve_checked(const Matrix2& M, const Matrix2& rhs, const char* what) {
    if (std::abs(M.determinant()) <= 4.0 * kEps * M.squaredNorm())
        throw SingularStepError(std::string(what) + ": implicit step matrix is singular");
    return M.inverse() * rhs;
}

Matrix2 truncated_exp(const Matrix2& X, int p) {
    Matrix2 term = Matrix2::Identity();
    Matrix2 sum = Matrix2::Identity();
    for (int j = 1; j <= p; ++j) {
        term = term * X / static_cast<double>(j);
        sum += term;
    }
    return sum;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::uint64_t stream_id(std::size_t level, int trial) {
    return (static_cast<std::uint64_t>(level) << 32) | static_cast<std::uint32_t>(trial);
}

void fit_slope(SweepReport& r) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < r.xs.size(); ++i)
        if (std::isfinite(r.ys[i]) && r.ys[i] > 0.0) {
            xs.push_back(r.xs[i]);
            ys.push_back(r.ys[i]);
        }
    if (xs.size() < 2) {
        r.slope = r.intercept = std::numeric_limits<double>::quiet_NaN();
        r.notes.emplace_back("slope undefined: fewer than two positive values");
        return;
    }
    const LineFit f = loglog_fit(xs, ys);
    r.slope = f.slope;
    r.intercept = f.intercept;
}

}  // namespace

Matrix2 step_matrix(SchemeId id, const Matrix2& A, double h) {
    const Matrix2 I = Matrix2::Identity();
    const Matrix2 X = h * A;
    switch (id) {
        case SchemeId::FE: return I + X;
        case SchemeId::RK2: return truncated_exp(X, 2);
        case SchemeId::RK3: return truncated_exp(X, 3);
        case SchemeId::RK4: return truncated_exp(X, 4);
        case SchemeId::BE: return solve_checked(I - X, I, "BE");
        case SchemeId::ITRAP:
        case SchemeId::IMID: return solve_checked(I - 0.5 * X, I + 0.5 * X, "ITRAP");
        default:
            throw UnsupportedError(std::string("step_matrix: unsupported scheme ") + std::string(to_string(id)));
    }
}

double spectral_norm(const Matrix2& M) {
    const double t = M.squaredNorm();
    const double d = M.determinant();
    const double disc = std::max(t * t - 4.0 * d * d, 0.0);
    return std::sqrt(0.5 * (t + std::sqrt(disc)));
}

Matrix2 matrix_exponential(const Matrix2& A, double t) { return (t * A).exp(); }

Matrix2 rotation_generator(double w) {
    Matrix2 A;
    A << 0.0, w, -w, 0.0;
    return A;
}

std::vector<Vector2> matrix_trajectory(const Matrix2& A, const Vector2& x0, double h, int N, double sigma,
                                       std::uint64_t seed, std::uint64_t stream) {
    if (N < 1) throw DegenerateError("trajectory: N must be positive");
    // A complex sample with E|eps|^2 = 2 sigma^2 carries two independent
    // components of standard deviation sigma.
    NoiseStream noise(seed, stream, sigma * std::numbers::sqrt2);
    std::vector<Vector2> out(N);
    for (int n = 1; n <= N; ++n) {
        const Complex e = noise.next();
        out[n - 1] = matrix_exponential(A, n * h) * x0 + Vector2(e.real(), e.imag());
    }
    return out;
}

double matrix_objective(SchemeId id, const Matrix2& A_hat, std::span<const Vector2> data, const Vector2& x0,
                        double h) {
    const Matrix2 S = step_matrix(id, A_hat, h);
    Vector2 x = x0;
    double sum = 0.0;
    for (const auto& d : data) {
        x = S * x;
        sum += (x - d).squaredNorm();
    }
    return std::isfinite(sum) ? sum : std::numeric_limits<double>::infinity();
}

Matrix2 matrix_seed(SchemeId id, std::span<const Vector2> data, const Vector2& x0, double h) {
    if (data.empty()) throw DegenerateError("matrix fit: no samples");
    // M = Y X^T (X X^T)^{-1} over consecutive pairs (x_n, x_{n+1}).
    Matrix2 XX = Matrix2::Zero();
    Matrix2 YX = Matrix2::Zero();
    Vector2 prev = x0;
    for (const auto& d : data) {
        XX += prev * prev.transpose();
        YX += d * prev.transpose();
        prev = d;
    }
    const Matrix2 I = Matrix2::Identity();
    Matrix2 M;
    if (std::abs(XX.determinant()) > 4.0 * kEps * XX.squaredNorm())
        M = YX * XX.inverse();
    else
        M = I + (data[0] - x0) * x0.transpose() / std::max(x0.squaredNorm(), kEps);

    Matrix2 seed = (M - I) / h;
    try {
        switch (id) {
            case SchemeId::BE: seed = (I - M.inverse()) / h; break;
            case SchemeId::ITRAP:
            case SchemeId::IMID: seed = (2.0 / h) * (M - I) * (M + I).inverse(); break;
            case SchemeId::RK2:
            case SchemeId::RK3:
            case SchemeId::RK4: {
                const Matrix2 L = M.log() / h;
                if (L.allFinite()) seed = L;
                break;
            }
            default: break;
        }
    } catch (...) {
    }
    if (!seed.allFinite()) seed = (M - I) / h;
    return seed;
}

MatrixFitResult fit_matrix(SchemeId id, std::span<const Vector2> data, const Vector2& x0, double h,
                           const MatrixFitOptions& opts) {
    if (data.size() < 3) throw DegenerateError("matrix fit: need at least 3 samples");
    step_matrix(id, Matrix2::Zero(), h);  // rejects unsupported schemes early

    auto f = [&](std::span<const double> v) {
        Matrix2 A;
        A << v[0], v[1], v[2], v[3];
        try {
            return matrix_objective(id, A, data, x0, h);
        } catch (const SingularStepError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    MatrixFitResult out;
    out.seed = matrix_seed(id, data, x0, h);
    std::vector<double> x{out.seed(0, 0), out.seed(0, 1), out.seed(1, 0), out.seed(1, 1)};
    double step = 1e-2 * std::max(1.0, out.seed.cwiseAbs().maxCoeff());
    SimplexResult r;
    for (int pass = 0; pass < std::max(opts.restarts, 1); ++pass) {
        r = simplex_minimize(f, x, std::vector<double>(4, step), SimplexOptions{opts.max_iter, opts.tol});
        out.iterations += r.iterations;
        if (!std::isfinite(r.value)) break;
        x = r.x;
        step *= 1e-2;
    }
    if (!std::isfinite(r.value)) throw IterationError("matrix fit: no finite objective", Complex{x[0], x[1]});
    out.A_hat << x[0], x[1], x[2], x[3];
    out.objective = r.value;
    out.converged = r.converged;
    return out;
}

std::vector<double> pow2_range(int lo, int hi) {
    std::vector<double> out;
    for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
    return out;
}

SweepReport noise_sweep(SchemeId id, std::span<const double> sigmas, int trials, std::uint64_t seed,
                        const NoiseSweepOptions& opts) {
    if (trials < 1) throw DegenerateError("noise sweep: trials must be positive");
    const Matrix2 A = rotation_generator(opts.rate);
    const Vector2 x0(1.0, 0.0);
    const auto clean = matrix_trajectory(A, x0, opts.h, opts.N, 0.0, seed);
    const Matrix2 A_star = fit_matrix(id, clean, x0, opts.h, opts.fit).A_hat;

    SweepReport r;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        std::vector<double> vals;
        int failed = 0;
        for (int t = 0; t < trials; ++t) {
            try {
                const auto noisy = matrix_trajectory(A, x0, opts.h, opts.N, sigmas[i], seed, stream_id(i + 1, t));
                vals.push_back(spectral_norm(A_star - fit_matrix(id, noisy, x0, opts.h, opts.fit).A_hat));
            } catch (const Error&) {
                ++failed;
            }
        }
        r.xs.push_back(sigmas[i]);
        r.ys.push_back(mean(vals));
        r.per_trial.push_back(std::move(vals));
        r.failures.push_back(failed);
    }
    fit_slope(r);
    return r;
}

SweepReport scalar_noise_sweep(SchemeId id, std::span<const double> sigmas, int trials, std::uint64_t seed,
                               const ScalarSweepOptions& opts) {
    if (trials < 1) throw DegenerateError("noise sweep: trials must be positive");
    const Complex clean = learn(id, opts.lambda, opts.h).selected;
    SweepReport r;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        std::vector<double> vals;
        int failed = 0;
        for (int t = 0; t < trials; ++t) {
            try {
                const TrajectoryData d =
                    generate(opts.lambda, opts.h, 1, opts.N, Complex{1.0}, sigmas[i], seed, stream_id(i + 1, t));
                vals.push_back(std::abs(minimize(id, d).xi_star - clean) / sigmas[i]);
            } catch (const Error&) {
                ++failed;
            }
        }
        r.xs.push_back(sigmas[i]);
        r.ys.push_back(median(vals));
        r.per_trial.push_back(std::move(vals));
        r.failures.push_back(failed);
    }
    fit_slope(r);
    return r;
}

Complex convdiff_eigenvalue(int k, double a, double eps) {
    const double w = 2.0 * std::numbers::pi * k;
    return {-w * w * eps, w * a};
}

ConvDiffResult convdiff_recover(SchemeId id, int k, double h, ConvDiffMode mode, const ConvDiffOptions& opts) {
    if (k < 1) throw DegenerateError("convdiff: k must be >= 1");
    if (!(h > 0.0)) throw DegenerateError("convdiff: h must be positive");
    ConvDiffResult r;
    r.scheme = id;
    r.k = k;
    r.h = h;
    r.lambda_true = convdiff_eigenvalue(k, opts.a, opts.eps);
    if (!nyquist_ok(r.lambda_true, h))
        throw NyquistError("convdiff: Im(lambda_k h) = " + std::to_string((r.lambda_true * h).imag()) +
                           " violates -pi < Im(lambda h) < pi");
    if (mode == ConvDiffMode::ClosedForm) {
        r.lambda_hat = learn(id, r.lambda_true, h).lambda_hat;
    } else {
        const TrajectoryData d = generate(r.lambda_true, h, 1, opts.N, Complex{1.0}, 0.0, opts.seed);
        r.lambda_hat = minimize(id, d).xi_star / h;
    }
    const double w = 2.0 * std::numbers::pi * k;
    r.a_hat = r.lambda_hat.imag() / w;
    r.eps_hat = -r.lambda_hat.real() / (w * w);
    return r;
}

ExtrapReport extrapolation_study(Complex lambda, std::span<const double> h_list) {
    ExtrapReport out;
    const double window = extrapolation_conservative_window();
    for (double h : h_list) {
        if (!nyquist_ok(lambda, 2.0 * h))
            throw NyquistError("extrap: step 2h violates -pi < Im(lambda 2h) < pi");
        const Complex fine = learn(SchemeId::ITRAP, lambda, h).lambda_hat;
        const Complex coarse = learn(SchemeId::ITRAP, lambda, 2.0 * h).lambda_hat;
        const Complex e = richardson(fine, coarse);
        const Complex x = lambda * h;
        bool in = false;
        bool kept = sign_of(e.imag()) == sign_of(lambda.imag());
        if (lambda.real() == 0.0) {
            in = std::abs(x.imag()) < window;
        } else if (lambda.real() < 0.0) {
            in = extrapolation_dissipative_admissible(x.real(), x.imag());
            kept = kept && e.real() < 0.0;
        }
        if (!in) out.sweep.notes.push_back("h = " + std::to_string(h) + " outside the sign-preservation window");
        out.sweep.xs.push_back(h);
        out.sweep.ys.push_back(std::abs(e - lambda));
        out.lambda_exp.push_back(e);
        out.in_window.push_back(in);
        out.sign_preserved.push_back(kept);
    }
    fit_slope(out.sweep);
    return out;
}

ErrorMeasure default_measure(SchemeId id) {
    return is_one_step(id) ? ErrorMeasure::Eigenvalue : ErrorMeasure::Scaled;
}

SweepReport order_study(SchemeId id, Complex lambda, std::span<const double> h_list, ErrorMeasure measure) {
    SweepReport r;
    r.xs.assign(h_list.begin(), h_list.end());
    r.ys = learning_errors(id, lambda, h_list, measure);
    fit_slope(r);
    return r;
}

}  // namespace stepfit
