#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "stepfit/polyroot.hpp"
#include "stepfit/schemes.hpp"
#include "stepfit/stability.hpp"

namespace stepfit {

/// Sampled trajectory Z_0, Z_1..Z_N at t_n = n H.
struct TrajectoryData {
    Complex Z0;                    // observed initial value (noisy when sigma > 0)
    double H = 1.0;                // sampling step
    int m = 1;                     // integrator substeps per sample, h = H / m
    std::vector<Complex> samples;  // Z_1..Z_N
    double sigma = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return samples.size(); }
    double h() const noexcept { return H / m; }
    /// Z_n for n = 0..N.
    Complex at(std::size_t n) const { return n == 0 ? Z0 : samples[n - 1]; }
};

/// Deterministic complex Gaussian noise stream: E|eps|^2 = sigma^2, real and
/// imaginary parts independent with standard deviation sigma / sqrt(2).
class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, std::uint64_t stream, double sigma);
    Complex next();

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

/// Z_n = Z0 e^{lambda H n} + eps_n for n = 0..N (Z0 is perturbed as well).
TrajectoryData generate(Complex lambda, double H, int m, int N, Complex Z0, double sigma, std::uint64_t seed,
                        std::uint64_t stream = 0);

/// (1/N) sum_k |p(xi)^{mk} Z0 - Z_k|^2.
double objective_one_step(const OneStepScheme& s, Complex xi, const TrajectoryData& data);

/// Seeds z_0..z_{k-1} with the data, runs the recurrence forward and returns
/// the mean squared deviation over n = k..N. Requires m == 1.
double objective_lmm(const MultistepScheme& s, Complex xi, const TrajectoryData& data);

double objective(const Scheme& s, Complex xi, const TrajectoryData& data);
double objective(SchemeId id, Complex xi, const TrajectoryData& data);

/// LMM recurrence z_0..z_n_max from the given seeds.
std::vector<Complex> lmm_recurrence(const MultistepScheme& s, Complex xi, std::span<const Complex> seeds,
                                    std::size_t n_max);

/// Objective on cell centres. Pole or singular cells are flagged and hold +inf.
RegionMap landscape(const Scheme& s, const TrajectoryData& data, Window w, int nx, int ny);
RegionMap landscape(SchemeId id, const TrajectoryData& data, Window w, int nx, int ny);

struct SimplexOptions {
    int max_iter = 5000;
    double tol = 1e-10;  // simplex size at convergence
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nelder-Mead simplex (GSL nmsimplex2). Non-finite objective values are
/// replaced by a huge finite penalty so that the simplex contracts away.
SimplexResult simplex_minimize(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                               std::vector<double> step, const SimplexOptions& opts = {});

struct FitOptions {
    int starts = 8;
    int max_iter = 5000;
    double tol = 1e-10;
    double ring_radius = 0.0;  // 0: 10% of the first start's modulus (at least 1e-2)
};

struct FitResult {
    Complex xi_star;
    double objective_value = 0.0;
    int iterations = 0;
    int starts_used = 0;
    bool converged = false;
};

/// Start points: closed-form learned values from an estimate of lambda h (log
/// of the first sample ratio), then ring perturbations around the first one.
std::vector<Complex> fit_starts(const Scheme& s, const TrajectoryData& data, const FitOptions& opts);

/// Best local minimum over the multi-start simplex search.
FitResult minimize(const Scheme& s, const TrajectoryData& data, const FitOptions& opts = {});
FitResult minimize(SchemeId id, const TrajectoryData& data, const FitOptions& opts = {});

enum class CoefficientFit {
    LeastSquares,   // overdetermined fit against Z_0..Z_N
    InitialValues,  // square Vandermonde solve on Z_0..Z_{k-1}
};

struct ModeCoefficients {
    std::vector<Complex> c;
    std::vector<Complex> zeta;  // sorted by decreasing modulus
    bool growth_flag = false;
};

inline constexpr double kCoeffTol = 1e-9;

/// z_n = sum_j c_j zeta_j^n with zeta the roots of rho - xi kappa. Throws
/// MultiplicityError when two characteristic roots coincide.
ModeCoefficients mode_coefficients(const MultistepScheme& s, Complex xi, const TrajectoryData& data,
                                   CoefficientFit fit = CoefficientFit::LeastSquares, double coeff_tol = kCoeffTol);
ModeCoefficients mode_coefficients(SchemeId id, Complex xi, const TrajectoryData& data,
                                   CoefficientFit fit = CoefficientFit::LeastSquares, double coeff_tol = kCoeffTol);

/// sum_j c_j zeta_j^n for n = 0..n_max.
std::vector<Complex> replay(const ModeCoefficients& mc, std::size_t n_max);

}  // namespace stepfit
