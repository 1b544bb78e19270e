#include <gtest/gtest.h>

#include <random>

#include "cascadecomp/cascade_fd.hpp"
#include "oracles.hpp"

using namespace cascadecomp;

namespace {

CascadePlant scalar_chain() {
    return CascadePlant(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}, Matrix{{1.0}});
}

CascadePlant random_plant(std::mt19937& gen) {
    return CascadePlant(Matrix(oracle::random_matrix(gen, 3, 3, 2.0)), Matrix(oracle::random_matrix(gen, 3, 1)),
                        Matrix(oracle::random_matrix(gen, 1, 2)), Matrix(oracle::random_matrix(gen, 2, 2, 2.0)),
                        Matrix(oracle::random_matrix(gen, 2, 1)));
}

const std::vector<Complex> kActuatorPoles{{-1.5, 0.0}, {-2.5, 0.0}};
const std::vector<Complex> kPlantPoles{{-1.0, 1.0}, {-1.0, -1.0}, {-3.0, 0.0}};

} // namespace

TEST(CascadePlant, ShapeValidation) {
    EXPECT_THROW(CascadePlant(Matrix{{1.0}}, Matrix::zeros(2, 1), Matrix{{1.0}}, Matrix{{0.0}}, Matrix{{1.0}}),
                 DimensionError);
    EXPECT_THROW(CascadePlant(Matrix{{1.0}}, Matrix{{1.0}}, Matrix::zeros(1, 2), Matrix{{0.0}}, Matrix{{1.0}}),
                 DimensionError);
}

TEST(Controllability, RankExamples) {
    EXPECT_EQ(controllability_rank(Matrix{{0, 1}, {0, 0}}, Matrix{{0}, {1}}), 2);
    EXPECT_EQ(controllability_rank(Matrix::diagonal({1.0, 1.0}), Matrix{{1}, {0}}), 1);
}

TEST(Controllability, BlockPairImpliesIndividualPairs) {
    std::mt19937 gen(31);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const CascadePlant p = random_plant(gen);
        const Matrix a2k = p.a2 + p.b2 * place_poles_siso(p.a2, p.b2, kActuatorPoles);
        const Matrix s = solve_direct(SylvesterProblem(p.a1, a2k, p.b1 * p.c2)).s;
        const Matrix big_a = block_diag(p.a1, a2k);
        const Matrix big_b = vstack(s * p.b2, p.b2);
        if (controllability_rank(big_a, big_b) == 5) {
            ++checked;
            EXPECT_TRUE(is_controllable(p.a1, s * p.b2));
            EXPECT_TRUE(is_controllable(a2k, p.b2));
        }
    }
    EXPECT_GT(checked, 30);
}

TEST(PlacePoles, Examples) {
    const Matrix k0 = place_poles_siso(Matrix{{0.0}}, Matrix{{1.0}}, {Complex{-1.0, 0.0}});
    EXPECT_NEAR(k0(0, 0), -1.0, 1e-14);
    const Matrix k = place_poles_siso(Matrix{{0, 1}, {0, 0}}, Matrix{{0}, {1}}, {Complex{-1, 0}, Complex{-2, 0}});
    EXPECT_NEAR(k(0, 0), -2.0, 1e-12);
    EXPECT_NEAR(k(0, 1), -3.0, 1e-12);
    EXPECT_THROW(place_poles_siso(Matrix::diagonal({1.0, 1.0}), Matrix{{1}, {0}}, {Complex{-1, 0}, Complex{-2, 0}}),
                 DesignError);
}

TEST(PlacePoles, InputErrors) {
    const Matrix a{{0, 1}, {0, 0}};
    const Matrix b{{0}, {1}};
    EXPECT_THROW(place_poles_siso(a, b, {Complex{-1, 1}, Complex{-2, 0}}), InputError);
    EXPECT_THROW(place_poles_siso(a, b, {Complex{-1, 0}}), InputError);
}

TEST(PlacePoles, RandomPairsHitTargets) {
    std::mt19937 gen(17);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 1 + trial % 5;
        const Matrix a(oracle::random_matrix(gen, n, n, 2.0));
        const Matrix b(oracle::random_matrix(gen, n, 1));
        std::vector<Complex> want;
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n && i % 2 == 0) {
                want.emplace_back(-1.0 - i, 0.5 * (i + 1));
                want.emplace_back(-1.0 - i, -0.5 * (i + 1));
                ++i;
            } else {
                want.emplace_back(-1.0 - i, 0.0);
            }
        }
        const Matrix k = place_poles_siso(a, b, want);
        EXPECT_LE(spectrum_distance(eig(a + b * k), Spectrum{want}), 1e-6) << "trial " << trial;
    }
}

TEST(DesignCompensator, ScalarChainByHand) {
    const CascadePlant p = scalar_chain();
    const CompensatorGains g = design_compensator(p, {Complex{-2, 0}}, {Complex{-1, 0}});
    // Stage (a): 0 + K2 = −2. Stage (b): s − s(−2) = 1. Stage (c): 1 + s K1 = −1.
    const double k2 = -2.0;
    const double s = 1.0 / (1.0 - k2);
    const double k1 = (-1.0 - 1.0) / s;
    EXPECT_NEAR(g.k2(0, 0), k2, 1e-12);
    EXPECT_NEAR(g.s(0, 0), s, 1e-12);
    EXPECT_NEAR(g.k1(0, 0), k1, 1e-12);
    EXPECT_NEAR(g.k1(0, 0), -6.0, 1e-12);
    EXPECT_TRUE(all_passed(verify_design(p, g)));
}

TEST(DesignCompensator, UncontrollableActuatorFailsAtStageA) {
    const CascadePlant p(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0, 0.0}}, Matrix::diagonal({-1.0, -1.0}),
                         Matrix{{1.0}, {0.0}});
    try {
        design_compensator(p, {Complex{-2, 0}, Complex{-3, 0}}, {Complex{-1, 0}});
        FAIL() << "expected a staged design error";
    } catch (const StagedDesignError& e) {
        EXPECT_EQ(e.stage(), DesignStage::actuator_stabilization);
        EXPECT_NE(std::string(e.what()).find("stage (a)"), std::string::npos);
    }
}

TEST(DesignCompensator, OverlapFailsAtStageB) {
    // Actuator pole placed on top of the plant eigenvalue.
    const CascadePlant p(Matrix{{-2.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}, Matrix{{1.0}});
    try {
        design_compensator(p, {Complex{-2, 0}}, {Complex{-1, 0}});
        FAIL() << "expected a staged design error";
    } catch (const StagedDesignError& e) {
        EXPECT_EQ(e.stage(), DesignStage::sylvester_decoupling);
    }
}

TEST(DesignCompensator, UnstableActuatorWithoutPolesIsRejected) {
    EXPECT_THROW(design_compensator(scalar_chain(), std::span<const Complex>{}, std::vector<Complex>{{-1, 0}}),
                 StagedDesignError);
}

TEST(DesignCompensator, HurwitzActuatorKeepsZeroGain) {
    const CascadePlant p(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{-3.0}}, Matrix{{1.0}});
    const CompensatorGains g = design_compensator(p, std::span<const Complex>{}, std::vector<Complex>{{-1, 0}});
    EXPECT_EQ(g.k2(0, 0), 0.0);
    EXPECT_NEAR(g.s(0, 0), 0.25, 1e-14);
    EXPECT_TRUE(all_passed(verify_design(p, g)));
}

TEST(ClosedLoop, ScalarChainMatrixAndSpectrum) {
    const CascadePlant p = scalar_chain();
    const CompensatorGains g = design_compensator(p, {Complex{-2, 0}}, {Complex{-1, 0}});
    const Matrix a = closed_loop_matrix(p, g);
    EXPECT_NEAR(a(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(a(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(a(1, 0), -6.0, 1e-12);
    EXPECT_NEAR(a(1, 1), -4.0, 1e-12);
    EXPECT_LE(spectrum_distance(eig(a), Spectrum{{{-1, 0}, {-2, 0}}}), 1e-9);
}

TEST(ClosedLoop, ZeroGainsAndCouplingGiveBlockDiagonal) {
    const CascadePlant p(Matrix{{1.0, 2.0}, {3.0, 4.0}}, Matrix::zeros(2, 1), Matrix::zeros(1, 1), Matrix{{-5.0}},
                         Matrix{{1.0}});
    const CompensatorGains g{Matrix::zeros(1, 2), Matrix::zeros(1, 1), Matrix::zeros(2, 1)};
    EXPECT_EQ(closed_loop_matrix(p, g), block_diag(p.a1, p.a2));
}

TEST(ClosedLoop, RandomDesignsSatisfySimilarityAndUnion) {
    std::mt19937 gen(23);
    int designed = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const CascadePlant p = random_plant(gen);
        CompensatorGains g;
        try {
            g = design_compensator(p, kActuatorPoles, kPlantPoles);
        } catch (const DesignError&) {
            continue;
        }
        ++designed;
        const double scale = std::max(1.0, closed_loop_matrix(p, g).norm());
        EXPECT_LE(similarity_residual(p, g), 1e-9 * scale) << "trial " << trial;
        std::vector<Complex> targets = kPlantPoles;
        targets.insert(targets.end(), kActuatorPoles.begin(), kActuatorPoles.end());
        EXPECT_LE(spectrum_distance(eig(closed_loop_matrix(p, g)), Spectrum{targets}), 1e-6 * scale)
            << "trial " << trial;
        EXPECT_TRUE(all_passed(verify_design(p, g))) << "trial " << trial;
    }
    EXPECT_GT(designed, 30);
}

TEST(SimulateCascade, ZeroInitialStateStaysZero) {
    const CascadePlant p = scalar_chain();
    const CompensatorGains g = design_compensator(p, {Complex{-2, 0}}, {Complex{-1, 0}});
    const SimResult r = simulate_cascade(p, g, Vector::Zero(2), 1.0, 1e-2);
    for (std::size_t k = 0; k < r.samples(); ++k) {
        EXPECT_EQ(r.energy[k], 0.0);
        EXPECT_EQ(r.u[k], 0.0);
    }
}

TEST(SimulateCascade, ScalarChainDecays) {
    const CascadePlant p = scalar_chain();
    const CompensatorGains g = design_compensator(p, {Complex{-2, 0}}, {Complex{-1, 0}});
    const Vector x0 = Vector::Ones(2);
    const SimResult r = simulate_cascade(p, g, x0, 10.0, 1e-2);
    ASSERT_FALSE(r.empty());
    EXPECT_NEAR(r.times.back(), 10.0, 1e-12);
    const double terminal = std::sqrt(r.energy.back());
    EXPECT_LE(terminal, 1e-3);
    // Non-normal closed loop: the growth bound carries the eigenvector condition number.
    const EigenPairs ep = eig_pairs(closed_loop_matrix(p, g));
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(ep.vectors);
    const double kappa = svd.singularValues()(0) / svd.singularValues()(1);
    EXPECT_LE(terminal, kappa * x0.norm() * std::exp(ep.spectrum.max_real() * 10.0) * (1.0 + 1e-6));
    // u = K2 x2 + K1 x1 + K1 S x2 at t = 0
    EXPECT_NEAR(r.u.front(), -2.0 - 6.0 - 6.0 / 3.0, 1e-12);
}

TEST(SimulateCascade, UnstableActuatorNegativeControl) {
    const CascadePlant p = scalar_chain();
    const CompensatorGains g{Matrix{{-6.0}}, Matrix{{+2.0}}, Matrix{{1.0 / 3.0}}};
    EXPECT_GT(eig(closed_loop_matrix(p, g)).max_real(), 0.0);
    EXPECT_FALSE(all_passed(verify_design(p, g)));
    const SimResult r = simulate_cascade(p, g, Vector::Ones(2), 5.0, 1e-2);
    EXPECT_GT(r.energy.back(), r.energy.front());
}

TEST(SimulateCascade, RungeKuttaFourthOrder) {
    std::mt19937 gen(41);
    const CascadePlant p = random_plant(gen);
    const CompensatorGains g = design_compensator(p, kActuatorPoles, kPlantPoles);
    const Vector x0 = Vector::Ones(5);
    const double horizon = 2.0;
    const Vector exact = expm(closed_loop_matrix(p, g), horizon).eigen() * x0;
    auto error_at = [&](double dt) {
        const SimResult r = simulate_cascade(p, g, x0, horizon, dt);
        Vector x(5);
        x << r.x1.back(), r.x2.back();
        return (x - exact).norm();
    };
    const double ratio = error_at(0.02) / error_at(0.01);
    EXPECT_GT(ratio, 13.0);
    EXPECT_LT(ratio, 19.0);
}

TEST(SimulateCascade, RejectsBadArguments) {
    const CascadePlant p = scalar_chain();
    const CompensatorGains g = design_compensator(p, {Complex{-2, 0}}, {Complex{-1, 0}});
    EXPECT_THROW(simulate_cascade(p, g, Vector::Ones(2), 1.0, 0.0), ConfigurationError);
    EXPECT_THROW(simulate_cascade(p, g, Vector::Ones(3), 1.0, 0.1), DimensionError);
}

TEST(SimulateCascade, OverflowIsReportedAsDivergence) {
    const CascadePlant p = scalar_chain();
    const CompensatorGains g{Matrix{{0.0}}, Matrix{{400.0}}, Matrix{{0.0}}};
    try {
        simulate_cascade(p, g, Vector::Ones(2), 10.0, 1e-3);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.step(), 0);
    }
}
