#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stepfit/learn.hpp"
#include "stepfit/schemes.hpp"

namespace stepfit {

using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;

/// One-step propagator S_h for y' = A y (FE, BE, RK2-4, ITRAP, IMID).
/// Throws SingularStepError when the implicit solve matrix is singular.
Matrix2 step_matrix(SchemeId id, const Matrix2& A, double h);

/// Largest singular value, from the closed form for 2x2 matrices.
double spectral_norm(const Matrix2& M);

/// e^{tA}.
Matrix2 matrix_exponential(const Matrix2& A, double t);

/// [[0, w], [-w, 0]].
Matrix2 rotation_generator(double w);

/// x_n = e^{n h A} x0 + eps_n for n = 1..N, with per-component Gaussian
/// noise of standard deviation sigma.
std::vector<Vector2> matrix_trajectory(const Matrix2& A, const Vector2& x0, double h, int N, double sigma,
                                       std::uint64_t seed, std::uint64_t stream = 0);

/// sum_n |S_h(A_hat)^n x0 - x_n|^2.
double matrix_objective(SchemeId id, const Matrix2& A_hat, std::span<const Vector2> data, const Vector2& x0,
                        double h);

struct MatrixFitOptions {
    int restarts = 3;  // simplex restarts from the previous optimum
    int max_iter = 20000;
    double tol = 1e-12;
};

struct MatrixFitResult {
    Matrix2 A_hat = Matrix2::Zero();
    Matrix2 seed = Matrix2::Zero();
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Regression seed: the least-squares one-step map M (x_{n+1} ~ M x_n) mapped
/// back through the scheme's propagator.
Matrix2 matrix_seed(SchemeId id, std::span<const Vector2> data, const Vector2& x0, double h);

/// Minimises matrix_objective over the four entries of A_hat.
MatrixFitResult fit_matrix(SchemeId id, std::span<const Vector2> data, const Vector2& x0, double h,
                           const MatrixFitOptions& opts = {});

struct SweepReport {
    std::vector<double> xs;
    std::vector<double> ys;
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<std::vector<double>> per_trial;  // per x, one value per trial
    std::vector<int> failures;                   // per x, trials excluded after an error
    std::vector<std::string> notes;
};

struct NoiseSweepOptions {
    double rate = 1.0;  // rotation rate of the oscillator
    double h = 1.0 / 128.0;
    int N = 256;
    MatrixFitOptions fit;
};

/// sigma_j = 2^e for e in [lo, hi].
std::vector<double> pow2_range(int lo, int hi);

/// Mean ||A* - A_hat||_2 per sigma, A* from noise-free data.
SweepReport noise_sweep(SchemeId id, std::span<const double> sigmas, int trials, std::uint64_t seed,
                        const NoiseSweepOptions& opts = {});

struct ScalarSweepOptions {
    Complex lambda{-0.2, 2.0};
    double h = 0.1;
    int N = 64;
};

/// Median |xi* - lambda_hat h| / sigma per sigma from scalar trajectory fits.
SweepReport scalar_noise_sweep(SchemeId id, std::span<const double> sigmas, int trials, std::uint64_t seed,
                               const ScalarSweepOptions& opts = {});

enum class ConvDiffMode { ClosedForm, Fit };

struct ConvDiffOptions {
    double a = 2.0;
    double eps = 0.01;
    int N = 500;
    std::uint64_t seed = 0;
};

struct ConvDiffResult {
    SchemeId scheme = SchemeId::FE;
    int k = 1;
    double h = 0.0;
    Complex lambda_true;
    Complex lambda_hat;
    double a_hat = 0.0;
    double eps_hat = 0.0;
};

/// lambda_k = 2 pi i k a - (2 pi k)^2 eps.
Complex convdiff_eigenvalue(int k, double a, double eps);

ConvDiffResult convdiff_recover(SchemeId id, int k, double h, ConvDiffMode mode, const ConvDiffOptions& opts = {});

struct ExtrapReport {
    SweepReport sweep;                       // xs = h, ys = |lambda_exp - lambda|
    std::vector<Complex> lambda_exp;
    std::vector<bool> in_window;             // conservative window or dissipative set
    std::vector<bool> sign_preserved;
};

/// Richardson-extrapolated trapezoidal eigenvalues over h_list.
ExtrapReport extrapolation_study(Complex lambda, std::span<const double> h_list);

/// Slope of learning errors against h.
SweepReport order_study(SchemeId id, Complex lambda, std::span<const double> h_list, ErrorMeasure measure);

/// Scaled for multistep schemes, Eigenvalue for one-step schemes.
ErrorMeasure default_measure(SchemeId id);

}  // namespace stepfit
