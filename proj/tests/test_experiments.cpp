#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "stepfit/errors.hpp"
#include "stepfit/experiments.hpp"

using namespace stepfit;
using std::numbers::pi;

TEST(Experiments, ForwardEulerZeroMatrix) {
    EXPECT_TRUE(step_matrix(SchemeId::FE, Matrix2::Zero(), 0.1).isApprox(Matrix2::Identity()));
}

TEST(Experiments, StepMatricesMatchScalarAmplification) {
    // On a rotation generator the propagators are functions of hA with
    // eigenvalues +-i w h, so S = Re p(i w h) I + Im p(i w h) J.
    const double w = 1.3, h = 0.2;
    const Matrix2 A = rotation_generator(w);
    const Matrix2 J = rotation_generator(1.0);
    for (SchemeId id : kOneStepSchemes) {
        const Complex p = amplification(one_step(id), Complex{0, w * h});
        const Matrix2 want = p.real() * Matrix2::Identity() + p.imag() * J;
        EXPECT_LE((step_matrix(id, A, h) - want).norm(), 1e-14) << to_string(id);
    }
    EXPECT_THROW(step_matrix(SchemeId::AB2, A, h), UnsupportedError);
}

TEST(Experiments, TrapezoidIsOrthogonalOnSkew) {
    const Matrix2 S = step_matrix(SchemeId::ITRAP, rotation_generator(1.0), 0.3);
    EXPECT_LE((S.transpose() * S - Matrix2::Identity()).norm(), 1e-14);
    EXPECT_NEAR(S.determinant(), 1.0, 1e-12);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    for (int i = 0; i < 100; ++i) {
        const Vector2 x(n(rng), n(rng));
        EXPECT_NEAR((S * x).norm(), x.norm(), 1e-12 * (1 + x.norm()));
    }
}

TEST(Experiments, ForwardEulerAmplifiesRotation) {
    const double h = 0.1;
    const Matrix2 S = step_matrix(SchemeId::FE, rotation_generator(1.0), h);
    EXPECT_NEAR(spectral_norm(S), std::sqrt(1 + h * h), 1e-15);
}

TEST(Experiments, SingularImplicitStep) {
    Matrix2 A = Matrix2::Identity();
    EXPECT_THROW(step_matrix(SchemeId::BE, A, 1.0), SingularStepError);
    EXPECT_THROW(step_matrix(SchemeId::ITRAP, A, 2.0), SingularStepError);
}

TEST(Experiments, SpectralNormAgainstSvd) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int i = 0; i < 200; ++i) {
        Matrix2 M;
        M << n(rng), n(rng), n(rng), n(rng);
        const double want = Eigen::JacobiSVD<Matrix2>(M).singularValues()(0);
        EXPECT_NEAR(spectral_norm(M), want, 1e-13 * (1 + want));
    }
}

TEST(Experiments, MatrixExponentialRotation) {
    EXPECT_LE((matrix_exponential(rotation_generator(1.7), 0.4) - oracle::rotation_exp(1.7, 0.4)).norm(), 1e-14);
}

TEST(Experiments, NoiseFreeForwardEulerFit) {
    const double h = 1.0 / 128;
    const Matrix2 A = rotation_generator(1.0);
    const Vector2 x0(1.0, 0.0);
    const auto data = matrix_trajectory(A, x0, h, 256, 0.0, 0);
    const MatrixFitResult r = fit_matrix(SchemeId::FE, data, x0, h);
    const Matrix2 want = (oracle::rotation_exp(1.0, h) - Matrix2::Identity()) / h;
    EXPECT_LE((r.A_hat - want).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Experiments, NoiseFreeTrapezoidFit) {
    const double h = 1.0 / 128;
    const Matrix2 A = rotation_generator(1.0);
    const Vector2 x0(1.0, 0.0);
    const auto data = matrix_trajectory(A, x0, h, 256, 0.0, 0);
    const MatrixFitResult r = fit_matrix(SchemeId::ITRAP, data, x0, h);
    const Matrix2 E = oracle::rotation_exp(1.0, h);
    const Matrix2 I = Matrix2::Identity();
    const Matrix2 want = (2.0 / h) * (E - I) * (E + I).inverse();
    EXPECT_LE((r.A_hat - want).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Experiments, ZeroGeneratorFit) {
    const Vector2 x0(0.3, -0.7);
    const auto data = matrix_trajectory(Matrix2::Zero(), x0, 0.1, 32, 0.0, 0);
    for (SchemeId id : {SchemeId::FE, SchemeId::BE, SchemeId::RK2, SchemeId::ITRAP}) {
        const MatrixFitResult r = fit_matrix(id, data, x0, 0.1);
        EXPECT_LE(r.A_hat.cwiseAbs().maxCoeff(), 1e-6) << to_string(id);
    }
}

TEST(Experiments, MatrixTrajectoryNoiseIsPerComponent) {
    const Vector2 x0(1.0, 0.0);
    const double sigma = 0.2;
    const auto clean = matrix_trajectory(Matrix2::Zero(), x0, 0.1, 20000, 0.0, 0);
    const auto noisy = matrix_trajectory(Matrix2::Zero(), x0, 0.1, 20000, sigma, 9);
    double s = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) s += (noisy[i] - clean[i]).squaredNorm();
    EXPECT_NEAR(s / (2.0 * noisy.size()), sigma * sigma, 0.02 * sigma * sigma);
}

TEST(Experiments, NoiseSweepDeterministicAndVanishing) {
    NoiseSweepOptions o;
    o.N = 64;
    const std::vector<double> sig{1e-4, 1e-3};
    const SweepReport a = noise_sweep(SchemeId::FE, sig, 2, 7, o);
    const SweepReport b = noise_sweep(SchemeId::FE, sig, 2, 7, o);
    EXPECT_EQ(a.ys, b.ys);
    EXPECT_EQ(a.per_trial, b.per_trial);
    EXPECT_EQ(a.slope, b.slope);
    EXPECT_LT(a.ys[0], a.ys[1]);
    const SweepReport z = noise_sweep(SchemeId::FE, std::vector<double>{1e-9}, 2, 7, o);
    EXPECT_LT(z.ys[0], 1e-6);
}

TEST(Experiments, NoiseSweepSlopes) {
    const auto sig = pow2_range(-10, -5);
    ASSERT_EQ(sig.size(), 6u);
    EXPECT_EQ(sig.front(), std::ldexp(1.0, -10));
    for (SchemeId id : {SchemeId::FE, SchemeId::ITRAP}) {
        const SweepReport r = noise_sweep(id, sig, 10, 7);
        EXPECT_NEAR(r.slope, 1.0, 0.15) << to_string(id);
    }
}

TEST(Experiments, ConvDiffEigenvalue) {
    const Complex l = convdiff_eigenvalue(1, 2.0, 0.01);
    EXPECT_NEAR(l.real(), -0.01 * 4 * pi * pi, 1e-15);
    EXPECT_NEAR(l.imag(), 4 * pi, 1e-15);
}

TEST(Experiments, ConvDiffClosedForm) {
    const auto fe = convdiff_recover(SchemeId::FE, 1, 1e-2, ConvDiffMode::ClosedForm);
    EXPECT_NEAR(fe.a_hat, 1.9869, 5e-4);
    EXPECT_NEAR(fe.eps_hat, 0.0299, 5e-4);
    const auto be = convdiff_recover(SchemeId::BE, 1, 1e-2, ConvDiffMode::ClosedForm);
    EXPECT_NEAR(be.a_hat, 2.0026, 5e-4);
    EXPECT_NEAR(be.eps_hat, -0.0100, 5e-4);
    const auto tr = convdiff_recover(SchemeId::ITRAP, 10, 1e-3, ConvDiffMode::ClosedForm);
    EXPECT_NEAR(tr.a_hat, 2.0018, 5e-4);
    EXPECT_NEAR(tr.eps_hat, 0.0100, 5e-4);
}

TEST(Experiments, ConvDiffSchemeConsistency) {
    for (SchemeId id : kOneStepSchemes)
        for (int k : {1, 3, 10}) {
            const auto r = convdiff_recover(id, k, 1e-3, ConvDiffMode::ClosedForm);
            const Complex p = amplification(one_step(id), r.lambda_hat * r.h);
            EXPECT_LE(std::abs(p - std::exp(r.lambda_true * r.h)), 1e-12) << to_string(id) << k;
        }
}

TEST(Experiments, ConvDiffFitAgreesWithClosedForm) {
    for (SchemeId id : {SchemeId::FE, SchemeId::BE, SchemeId::ITRAP}) {
        const auto c = convdiff_recover(id, 1, 1e-2, ConvDiffMode::ClosedForm);
        const auto f = convdiff_recover(id, 1, 1e-2, ConvDiffMode::Fit);
        EXPECT_NEAR(f.a_hat, c.a_hat, 1e-3) << to_string(id);
        EXPECT_NEAR(f.eps_hat, c.eps_hat, 1e-3) << to_string(id);
    }
}

TEST(Experiments, ConvDiffNyquistGate) {
    // k = 10, h = 0.05: Im(lambda h) = 2 pi 10 2 0.05 > pi.
    EXPECT_THROW(convdiff_recover(SchemeId::FE, 10, 0.05, ConvDiffMode::ClosedForm), NyquistError);
}

TEST(Experiments, ExtrapolationStudyConservative) {
    std::vector<double> hs;
    for (int e = 3; e <= 8; ++e) hs.push_back(std::ldexp(1.0, -e));
    const ExtrapReport r = extrapolation_study({0, 2}, hs);
    EXPECT_NEAR(r.sweep.slope, 4.0, 0.2);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        EXPECT_TRUE(r.in_window[i]);
        EXPECT_LE(std::abs(r.lambda_exp[i].real()), 1e-13);
        EXPECT_TRUE(r.sign_preserved[i]);
    }
}

TEST(Experiments, ExtrapolationStudyDissipative) {
    const std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
    const ExtrapReport r = extrapolation_study({-1, 2}, hs);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        ASSERT_TRUE(extrapolation_dissipative_admissible(-1 * hs[i], 2 * hs[i]));
        EXPECT_TRUE(r.in_window[i]);
        EXPECT_LT(r.lambda_exp[i].real(), 0.0);
        EXPECT_GT(r.lambda_exp[i].imag(), 0.0);
    }
}

TEST(Experiments, ExtrapolationWindowWarning) {
    // Im(lambda h) = 1.5 at the fine step lies outside the conservative window.
    const ExtrapReport r = extrapolation_study({0, 1.5}, std::vector<double>{1.0, 0.5, 0.25, 0.125});
    EXPECT_TRUE(r.in_window[1]);
    EXPECT_FALSE(r.in_window[0]);
    EXPECT_FALSE(r.sweep.notes.empty());
}

TEST(Experiments, OrderStudy) {
    const Complex lambda{-1.0, 2.0};
    const auto hs = default_order_steps(lambda);
    EXPECT_NEAR(order_study(SchemeId::RK4, lambda, hs, ErrorMeasure::Eigenvalue).slope, 4.0, 0.2);
    EXPECT_NEAR(order_study(SchemeId::LEAPFROG, lambda, hs, ErrorMeasure::Scaled).slope, 3.0, 0.2);
    EXPECT_NEAR(order_study(SchemeId::BE, lambda, hs, ErrorMeasure::Eigenvalue).slope, 1.0, 0.1);
    EXPECT_EQ(default_measure(SchemeId::FE), ErrorMeasure::Eigenvalue);
    EXPECT_EQ(default_measure(SchemeId::AB2), ErrorMeasure::Scaled);
}
