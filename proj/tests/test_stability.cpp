#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "stepfit/errors.hpp"
#include "stepfit/learn.hpp"
#include "stepfit/stability.hpp"

using namespace stepfit;
using std::numbers::pi;

TEST(Stability, OneStepModulusSpotValues) {
    EXPECT_DOUBLE_EQ(one_step_modulus(SchemeId::FE, -1.0), 0.0);
    EXPECT_DOUBLE_EQ(one_step_modulus(SchemeId::FE, -2.0), 1.0);
    for (double y : {-5.0, -0.3, 0.0, 1.7, 40.0}) EXPECT_NEAR(one_step_modulus(SchemeId::ITRAP, {0, y}), 1.0, 1e-15);
    EXPECT_THROW(one_step_modulus(SchemeId::BE, 1.0), PoleError);
}

TEST(Stability, OneStepMembership) {
    EXPECT_TRUE(one_step_member(one_step(SchemeId::FE), -1.0));
    EXPECT_FALSE(one_step_member(one_step(SchemeId::FE), 0.5));
    // BE is stable outside the disk |1 - xi| < 1.
    EXPECT_TRUE(one_step_member(one_step(SchemeId::BE), 3.0));
    EXPECT_FALSE(one_step_member(one_step(SchemeId::BE), 0.5));
    EXPECT_FALSE(one_step_member(one_step(SchemeId::BE), 1.0));
}

TEST(Stability, LeapFrogRootsOnSegment) {
    const RootSet rs = lmm_characteristic_roots(multistep(SchemeId::LEAPFROG), Complex{0, 0.5});
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_LE(std::abs(rs.roots[0] * rs.roots[1] + 1.0), 1e-14);
    for (Complex z : rs.roots) EXPECT_NEAR(std::abs(z), 1.0, 1e-14);
    EXPECT_EQ(lmm_membership(SchemeId::LEAPFROG, Complex{0, 0.5}), RootClass::OnCircle);
}

TEST(Stability, LeapFrogOffSegmentCoexists) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const Complex xi{u(rng), u(rng)};
        if (std::abs(xi.real()) < 1e-6) continue;
        EXPECT_EQ(lmm_membership(SchemeId::LEAPFROG, xi), RootClass::Coexist) << xi;
    }
    EXPECT_EQ(lmm_membership(SchemeId::LEAPFROG, Complex{0, 1.5}), RootClass::Coexist);
}

TEST(Stability, LeapFrogProductIdentity) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    const auto& lf = multistep(SchemeId::LEAPFROG);
    for (int i = 0; i < 10000; ++i) {
        const Complex xi{u(rng), u(rng)};
        const RootSet rs = lmm_characteristic_roots(lf, xi);
        EXPECT_LE(std::abs(rs.roots[0] * rs.roots[1] + 1.0), 1e-12);
    }
}

TEST(Stability, RootsMatchQuadraticOracle) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const std::pair<SchemeId, oracle::Lmm> cases[] = {{SchemeId::AB2, oracle::ab2()},
                                                      {SchemeId::AM3, oracle::am3()},
                                                      {SchemeId::BDF2, oracle::bdf2()}};
    for (const auto& [id, m] : cases)
        for (int i = 0; i < 100; ++i) {
            const Complex xi{u(rng), u(rng)};
            const auto [z1, z2] = oracle::two_step_roots(m, xi);
            const RootSet rs = lmm_characteristic_roots(multistep(id), xi);
            ASSERT_EQ(rs.size(), 2u);
            const double d1 = std::abs(rs.roots[0] - z1) + std::abs(rs.roots[1] - z2);
            const double d2 = std::abs(rs.roots[0] - z2) + std::abs(rs.roots[1] - z1);
            EXPECT_LE(std::min(d1, d2), 1e-10 * (1 + std::abs(z1) + std::abs(z2))) << to_string(id) << xi;
        }
}

TEST(Stability, Ab2AtOrigin) {
    const RootSet rs = lmm_characteristic_roots(multistep(SchemeId::AB2), 0.0);
    ASSERT_EQ(rs.size(), 2u);
    EXPECT_EQ(lmm_membership(SchemeId::AB2, 0.0), RootClass::OnCircle);
    EXPECT_EQ(lmm_membership(SchemeId::AB2, -0.5), RootClass::AllInside);
    EXPECT_EQ(lmm_membership(SchemeId::AB2, 0.5), RootClass::Coexist);
}

TEST(Stability, SingularLeadingCoefficient) {
    // BDF2: alpha_2 - xi beta_2 = 1 - 2 xi / 3 vanishes at xi = 3/2.
    EXPECT_THROW(lmm_characteristic_roots(multistep(SchemeId::BDF2), 1.5), SingularStepError);
    EXPECT_EQ(lmm_membership(SchemeId::BDF2, 1.5), RootClass::Coexist);
}

TEST(Stability, ClassifyRootsPrecedence) {
    RootSet rs;
    rs.roots = {0.5, 0.5};
    rs.residuals = {0, 0};
    rs.multiplicity_flags = {true, true};
    EXPECT_EQ(classify_roots(rs), RootClass::Repeated);
    rs.multiplicity_flags = {false, false};
    rs.roots = {0.5, -0.2};
    EXPECT_EQ(classify_roots(rs), RootClass::AllInside);
    rs.roots = {2.0, -3.0};
    EXPECT_EQ(classify_roots(rs), RootClass::AllOutside);
    rs.roots = {2.0, 0.1};
    EXPECT_EQ(classify_roots(rs), RootClass::Coexist);
    rs.roots = {1.0, 0.1};
    EXPECT_EQ(classify_roots(rs), RootClass::OnCircle);
}

TEST(Stability, LeapFrogLocusIsSine) {
    const BoundaryLocus l = boundary_locus(SchemeId::LEAPFROG, 64);
    ASSERT_EQ(l.points.size(), 64u);
    for (std::size_t j = 0; j < l.points.size(); ++j)
        EXPECT_LE(std::abs(l.points[j] - Complex{0, std::sin(l.theta[j])}), 1e-15);
}

TEST(Stability, Ab2LocusAtPi) {
    // rho(-1) = 1 + 1 = 2, kappa(-1) = -1/2 - 3/2 = -2.
    const BoundaryLocus l = boundary_locus(SchemeId::AB2, 4);
    ASSERT_EQ(l.points.size(), 4u);
    EXPECT_NEAR(l.theta[2], pi, 1e-15);
    EXPECT_LE(std::abs(l.points[2] - Complex{-1.0, 0.0}), 1e-15);
}

TEST(Stability, LocusStartsAtOrigin) {
    for (SchemeId id : kMultistepSchemes) EXPECT_LE(std::abs(boundary_locus(id, 16).points[0]), 1e-15);
}

TEST(Stability, LocusOmitsKappaZeros) {
    // AM2 as a one-step LMM: kappa(z) = (1 + z)/2 vanishes at theta = pi.
    const BoundaryLocus l = boundary_locus(SchemeId::AM2, 8);
    ASSERT_EQ(l.omitted.size(), 1u);
    EXPECT_EQ(l.omitted[0], 4);
    EXPECT_EQ(l.points.size(), 7u);
}

TEST(Stability, LocusPointsHaveUnitRoot) {
    for (SchemeId id : kMultistepSchemes) {
        const auto& s = multistep(id);
        const BoundaryLocus l = boundary_locus(s, 256);
        for (std::size_t j = 0; j < l.points.size(); ++j) {
            RootSet rs;
            try {
                rs = lmm_characteristic_roots(s, l.points[j]);
            } catch (const SingularStepError&) {
                continue;
            }
            double best = 1e300;
            for (Complex z : rs.roots) best = std::min(best, std::abs(std::abs(z) - 1.0));
            EXPECT_LE(best, 1e-10) << to_string(id) << ' ' << l.theta[j];
        }
    }
}

TEST(Stability, LearnedConservativeLmmOnBoundary) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (SchemeId id : {SchemeId::AB2, SchemeId::AB3, SchemeId::AM3, SchemeId::LEAPFROG, SchemeId::BDF2})
        for (int i = 0; i < 100; ++i) {
            const double theta = u(rng);
            const Complex xi = learn(id, {0, theta}, 1.0).selected;
            const RootSet rs = lmm_characteristic_roots(multistep(id), xi);
            double mx = 0.0;
            for (Complex z : rs.roots) mx = std::max(mx, std::abs(z));
            EXPECT_NEAR(mx, 1.0, 1e-10) << to_string(id) << ' ' << theta;
        }
}

TEST(Stability, OneStepRegionMap) {
    const RegionMap m = one_step_region(one_step(SchemeId::FE), kDefaultOneStepWindow, 51, 61);
    EXPECT_EQ(m.values.size(), 51u * 61u);
    for (int iy = 0; iy < m.ny; ++iy)
        for (int ix = 0; ix < m.nx; ++ix) {
            const Complex xi{m.x_at(ix), m.y_at(iy)};
            EXPECT_NEAR(m.at(ix, iy), std::abs(oracle::fe(xi)), 1e-14);
        }
    // A pole inside the cell lattice is flagged.
    const RegionMap be = one_step_region(one_step(SchemeId::BE), Window{0.5, 1.5, -0.5, 0.5}, 3, 3);
    EXPECT_TRUE(be.flagged[4]);
    EXPECT_TRUE(std::isinf(be.at(1, 1)));
}

TEST(Stability, ClassificationMaps) {
    const RegionMap lf = classification_map(multistep(SchemeId::LEAPFROG), kDefaultOneStepWindow, 40, 40);
    for (double v : lf.values) EXPECT_EQ(static_cast<RootClass>(static_cast<int>(v)), RootClass::Coexist);

    // Small window around -0.3 lies in the AB2 region.
    const RegionMap ab2 = classification_map(multistep(SchemeId::AB2), Window{-0.4, -0.2, -0.1, 0.1}, 10, 10);
    for (double v : ab2.values) EXPECT_EQ(static_cast<RootClass>(static_cast<int>(v)), RootClass::AllInside);

    // BDF2: the left half plane is stable; a coexist region sits just right of the origin.
    const RegionMap bdf = classification_map(multistep(SchemeId::BDF2), kDefaultOneStepWindow, 50, 60);
    int inside = 0, coexist = 0;
    for (int iy = 0; iy < bdf.ny; ++iy)
        for (int ix = 0; ix < bdf.nx; ++ix) {
            const auto c = static_cast<RootClass>(static_cast<int>(bdf.at(ix, iy)));
            if (bdf.x_at(ix) < 0) EXPECT_EQ(c, RootClass::AllInside);
            inside += c == RootClass::AllInside;
            coexist += c == RootClass::Coexist;
        }
    EXPECT_GT(inside, 0);
    EXPECT_GT(coexist, 0);
}

TEST(Stability, ReSignMaps) {
    const Window w = kDefaultLmmWindow;
    const RegionMap lf = re_sign_map(multistep(SchemeId::LEAPFROG), w, 41, 41);
    for (int iy = 0; iy < lf.ny; ++iy)
        for (int ix = 0; ix < lf.nx; ++ix) {
            const double want = std::sinh(lf.x_at(ix)) * std::cos(lf.y_at(iy));
            EXPECT_EQ(lf.at(ix, iy), want > 0 ? 1.0 : (want < 0 ? -1.0 : 0.0));
        }

    // Row a = 0: AB2 negative, BDF2 nonnegative.
    const Window row{-1e-9, 1e-9, -pi, pi};
    const RegionMap ab2 = re_sign_map(multistep(SchemeId::AB2), row, 1, 60);
    for (int iy = 0; iy < ab2.ny; ++iy) EXPECT_EQ(ab2.at(0, iy), -1.0) << ab2.y_at(iy);
    const RegionMap bdf = re_sign_map(multistep(SchemeId::BDF2), row, 1, 60);
    for (int iy = 0; iy < bdf.ny; ++iy) EXPECT_GE(bdf.at(0, iy), 0.0);
}

TEST(Stability, RepeatedRootLoci) {
    auto lf = repeated_root_locus(SchemeId::LEAPFROG);
    ASSERT_EQ(lf.size(), 2u);
    EXPECT_LE(std::abs(lf[0] - Complex{0, -1}), 1e-15);
    EXPECT_LE(std::abs(lf[1] - Complex{0, 1}), 1e-15);
    for (Complex xi : lf) {
        const RootSet rs = lmm_characteristic_roots(multistep(SchemeId::LEAPFROG), xi);
        EXPECT_TRUE(rs.has_repeated());
        EXPECT_LE(std::abs(rs.roots[0] - rs.roots[1]), 1e-10);
    }

    // BDF2: the discriminant is linear in xi, 4/9 + 8 xi / 9 = 0.
    const auto bdf = repeated_root_locus(SchemeId::BDF2);
    ASSERT_EQ(bdf.size(), 1u);
    EXPECT_LE(std::abs(bdf[0] + 0.5), 1e-15);
    const auto [z1, z2] = oracle::two_step_roots(oracle::bdf2(), bdf[0]);
    EXPECT_LE(std::abs(z1 - z2), 1e-12);
    EXPECT_LT(std::abs(z1), 1.0);

    // AB2: (1 + 3 xi / 2)^2 - 2 xi = 0 gives xi = (-2 +- 4 sqrt(2) i) / 9.
    const auto ab2 = repeated_root_locus(SchemeId::AB2);
    ASSERT_EQ(ab2.size(), 2u);
    for (Complex xi : ab2) {
        EXPECT_LE(std::abs(std::pow(1.0 + 1.5 * xi, 2) - 2.0 * xi), 1e-12);
        EXPECT_LE(std::abs(two_step_discriminant(multistep(SchemeId::AB2), xi)), 1e-12);
        EXPECT_TRUE(lmm_characteristic_roots(multistep(SchemeId::AB2), xi).has_repeated());
    }
    EXPECT_NEAR(ab2[0].real(), -2.0 / 9, 1e-15);
    EXPECT_NEAR(std::abs(ab2[0].imag()), 4 * std::sqrt(2.0) / 9, 1e-15);

    EXPECT_THROW(repeated_root_locus(SchemeId::AB3), UnsupportedError);
}
