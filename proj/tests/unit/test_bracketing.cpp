#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "msgm/bounds.hpp"
#include "msgm/bracketing.hpp"

using namespace msgm;
using namespace msgm::bracketing;
using bounds::Strategy;

TEST(SnapDown, Examples) {
    EXPECT_DOUBLE_EQ(snap_down(0.30, 0.25, 1.0), 0.25);
    EXPECT_DOUBLE_EQ(snap_down(0.50, 0.25, 1.0), 0.50);
    EXPECT_DOUBLE_EQ(snap_down(-0.30, 0.25, 1.0), -0.50);
    EXPECT_DOUBLE_EQ(snap_down(1.0, 0.25, 1.0), 1.0);
    // -B off the grid: clamp to the lowest in-box grid point.
    EXPECT_DOUBLE_EQ(snap_down(-1.0, 0.3, 1.0), -0.9);
}

TEST(SnapDown, IdempotentOnGrid) {
    for (int j = -8; j <= 8; ++j) {
        const double v = j * 0.125;
        EXPECT_DOUBLE_EQ(snap_down(v, 0.125, 1.0), v);
        EXPECT_DOUBLE_EQ(snap_down(snap_down(v + 0.06, 0.125, 1.0), 0.125, 1.0), snap_down(v + 0.06, 0.125, 1.0));
    }
}

TEST(GaussianBracketElement, ConstantsForUnitEpsilonInOneDimension) {
    const GaussianBracketElement e(1, 1.0, 1.0, Strategy::multi, {{0.0}}, {{}});
    EXPECT_DOUBLE_EQ(e.eta(), 0.5);
    EXPECT_DOUBLE_EQ(e.c1(), 0.5);
    EXPECT_DOUBLE_EQ(e.c2(), 0.125);
    EXPECT_NEAR(e.exact_l1_gap(), std::sqrt(2.0) * std::exp(0.125) - 1.0, 1e-15);
    EXPECT_NEAR(e.exact_l1_gap(), 0.602513910509198, 1e-14);
}

TEST(GaussianBracketElement, GapIsMassIdentity) {
    const GaussianBracketElement e(6, 2.0, 0.1, Strategy::single, {{0, 0}}, {{0, 0, 0, 0}});
    const double mass = std::pow(e.c1(), -3.0) * std::exp(e.c2());
    EXPECT_NEAR(e.exact_l1_gap(), mass - 1.0, 1e-14);
    EXPECT_LT(e.exact_l1_gap(), 0.1);
}

TEST(GaussianBracketCover, SnapsWithinEtaBelow) {
    RngStream rng(1);
    const auto target = random_target(4, 5, 2, 3.0, gaussian::Mode::multi_estimate, rng);
    const auto elem = gaussian_bracket_cover(target, 3.0, 0.5);
    for (int k = 1; k <= 4; ++k) {
        const auto mu = target.mean_of(SourceLabel(k));
        const auto mb = elem.mean_of(SourceLabel(k));
        for (std::size_t j = 0; j < mu.size(); ++j) {
            EXPECT_LE(mb[j], mu[j] + 1e-12);
            EXPECT_GT(mb[j], mu[j] - elem.eta());
        }
    }
}

TEST(GaussianBracketCover, RejectsOutOfBox) {
    const auto t = gaussian::GaussianFamily::truth(1, {{2.5}}, {});
    EXPECT_THROW(gaussian_bracket_cover(t, 2.0, 0.5), std::invalid_argument);
    EXPECT_THROW(gaussian_bracket_cover(t, 3.0, 0.0), std::invalid_argument);
    EXPECT_THROW(gaussian_bracket_cover(t, 3.0, 1.5), std::invalid_argument);
}

TEST(GaussianBracketVerify, DominanceHoldsAtSmallEpsilon) {
    RngStream rng(3);
    for (int t = 0; t < 10; ++t) {
        const auto target = random_target(1 + t, 1 + t % 10, t % 2, 2.0, gaussian::Mode::single_estimate, rng);
        const auto elem = gaussian_bracket_cover(target, 2.0, 0.1);
        const auto rep = gaussian_bracket_verify(elem, target, 2000, rng.fork(t));
        EXPECT_EQ(rep.dominance_violations, 0u);
        EXPECT_GE(rep.probes, 2000u);
        EXPECT_TRUE(rep.sound());
        EXPECT_EQ(rep.epsilon, 0.1);
    }
}

TEST(GaussianBracketVerify, DetectsABrokenElement) {
    // Same element constants but means shifted far from the target: dominance must fail somewhere.
    const auto target = gaussian::GaussianFamily::truth(2, {{0.0, 0.0}}, {});
    const GaussianBracketElement wrong(2, 5.0, 0.5, Strategy::multi, {{4.0, 4.0}}, {{}});
    const auto rep = gaussian_bracket_verify(wrong, target, 500, RngStream(1));
    EXPECT_GT(rep.dominance_violations, 0u);
}

TEST(GaussianBracketCount, EightyOne) {
    const auto c = gaussian_bracket_count(2, 1, 1, 1.0, 0.5, Strategy::multi);
    EXPECT_FALSE(c.estimated);
    EXPECT_NEAR(std::exp(c.log_count), 81.0, 1e-9);
    EXPECT_NEAR(c.log_count, 4.39444915467244, 1e-12);
    EXPECT_EQ(grid_points_per_coordinate(1.0, 0.25), 9u);
}

TEST(GaussianBracketCount, OneSourceStrategiesAgree) {
    EXPECT_EQ(gaussian_bracket_count(1, 3, 1, 1.0, 0.5, Strategy::multi).log_count,
              gaussian_bracket_count(1, 3, 1, 1.0, 0.5, Strategy::single).log_count);
}

TEST(GaussianBracketCount, NeverAboveFormula) {
    RngStream rng(4);
    for (int t = 0; t < 200; ++t) {
        const std::size_t K = 1 + rng.below(3), d = 1 + rng.below(3), d1 = rng.below(d + 1);
        const double B = 0.2 + 2.0 * rng.uniform(), eps = 0.05 + 0.95 * rng.uniform();
        const auto st = rng.uniform() < 0.5 ? Strategy::multi : Strategy::single;
        const auto c = gaussian_bracket_count(K, d, d1, B, eps, st);
        const bounds::GaussianBoundParams p{.n = 1, .K = K, .d = d, .d1 = d1, .B = B, .delta = 0.1, .epsilon = eps};
        EXPECT_LE(c.log_count, bounds::gaussian_log_bracketing(p, st) + 1e-12);
    }
}

TEST(GaussianBracketCount, LargeGridsAreEstimated) {
    const auto c = gaussian_bracket_count(15, 10, 5, 5.0, 1.0 / 500.0, Strategy::single);
    EXPECT_TRUE(c.estimated);
    const bounds::GaussianBoundParams p{.n = 500, .K = 15, .d = 10, .d1 = 5, .B = 5.0, .delta = 0.1, .epsilon = {}};
    EXPECT_NEAR(c.log_count, bounds::gaussian_log_bracketing(p, Strategy::single), 1e-9);
}

TEST(ConstantFunctionBracket, Examples) {
    EXPECT_EQ(constant_function_bracket(0.25), (std::vector<double>{0.25, 0.5, 0.75, 1.0}));
    EXPECT_EQ(constant_function_bracket(1.0), (std::vector<double>{1.0}));
    EXPECT_EQ(constant_function_bracket(0.3).size(), 4u);
    EXPECT_THROW(constant_function_bracket(0.0), std::invalid_argument);
}

TEST(ConstantFunctionBracket, CoversEveryConstant) {
    RngStream rng(5);
    const double eps = 0.07;
    const auto levels = constant_function_bracket(eps);
    for (int i = 0; i < 1000; ++i) {
        const double c = rng.uniform();
        const auto it = std::lower_bound(levels.begin(), levels.end(), c);
        ASSERT_NE(it, levels.end());
        EXPECT_GE(*it - c, 0.0);
        EXPECT_LE(*it - c, eps);
    }
    EXPECT_TRUE(constant_bracket_verify(eps, 1000, RngStream(6)).sound());
}

TEST(EnergyGrid1D, Validation) {
    EXPECT_THROW(EnergyGrid1D({1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(EnergyGrid1D({1.0, NAN, 2.0}), std::invalid_argument);
    const EnergyGrid1D g({0.0, 1.0, 2.0});
    EXPECT_DOUBLE_EQ(g.step(), 0.5);
}

TEST(Trapezoid, IntegratesLinearExactly) {
    std::vector<double> f(101);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 2.0 * static_cast<double>(i) / 100.0 + 1.0;
    EXPECT_NEAR(trapezoid(f, 0.01), 2.0, 1e-14);
}

TEST(EbmGapBound, Example) {
    EXPECT_NEAR(ebm_gap_bound(0.1), 0.558064501099946, 1e-14);
    EXPECT_EQ(ebm_gap_bound(0.0), 0.0);
}

TEST(EbmBracket, IdenticalEnergiesGiveZeroGap) {
    const auto u = EnergyGrid1D::piecewise_linear(kMinEnergyNodes, 5, -3.0, 3.0, RngStream(1));
    const auto rep = ebm_bracket_from_energies(u, u.values(), 0.0);
    EXPECT_EQ(rep.dominance_violations, 0u);
    EXPECT_NEAR(rep.exact_l1_gap, 0.0, 1e-14);
}

TEST(EbmBracket, RandomEnergiesAreSound) {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const double eps_u = (i % 3 == 0) ? 0.01 : (i % 3 == 1 ? 0.1 : 0.25);
        const auto u = EnergyGrid1D::piecewise_linear(kMinEnergyNodes, 2 + i % 12, -3.0, 3.0, RngStream(2, {i}));
        const auto rep = ebm_bracket_verify_1d(u, eps_u, RngStream(3, {i}));
        EXPECT_EQ(rep.dominance_violations, 0u);
        EXPECT_EQ(rep.probes, kMinEnergyNodes);
        EXPECT_LE(rep.exact_l1_gap, ebm_gap_bound(eps_u));
        EXPECT_EQ(rep.epsilon, ebm_gap_bound(eps_u));
    }
}

TEST(EbmBracket, DetectsEnergyOutsideTolerance) {
    const auto u = EnergyGrid1D::piecewise_linear(kMinEnergyNodes, 4, -1.0, 1.0, RngStream(1));
    std::vector<double> up(u.values().begin(), u.values().end());
    for (std::size_t i = 0; i < up.size() / 2; ++i) up[i] -= 0.5;  // far beyond eps_u
    EXPECT_THROW(ebm_bracket_from_energies(u, up, 0.01), std::invalid_argument);
}

TEST(MlpLemma, OneLayerRatioAgainstWeightMagnitude) {
    // f(x) = a x + b with |a| = B: the input bound B^1 W^1 |dx| is attained.
    Mlp f = make_mlp(std::vector<std::size_t>{1, 1});
    f.layers[0].weight[0] = -2.0;
    f.layers[0].bias[0] = 0.3;
    const std::vector<double> x{0.2}, xp{0.7};
    EXPECT_NEAR(input_lipschitz_ratio(f, x, xp, 2.0, 1), 1.0, 1e-15);
}

TEST(MlpLemma, IdenticalNetworksHaveZeroParameterGap) {
    RngStream rng(1);
    const auto f = random_mlp(3, 8, 2.0, rng);
    const std::vector<double> x(f.input_width(), 0.5);
    EXPECT_EQ(param_lipschitz_ratio(f, f, x, 0.1, 2.0, 8), 0.0);
}

TEST(MlpLemma, RandomisedChecksStayBelowOne) {
    for (const auto kind : {LemmaKind::input_lipschitz, LemmaKind::param_lipschitz, LemmaKind::output_supnorm}) {
        const double r = mlp_lemma_check(kind, 3, 8, 2.0, 2000, RngStream(7, {static_cast<std::uint64_t>(kind)}));
        EXPECT_LE(r, 1.0 + 1e-9);
        EXPECT_GT(r, 0.0);
    }
}

TEST(MlpLemma, RandomMlpRespectsBox) {
    RngStream rng(9);
    const auto f = random_mlp(4, 16, 1.5, rng);
    EXPECT_LE(f.max_width(), 16u);
    for (const auto& l : f.layers) {
        for (double w : l.weight) EXPECT_LE(std::abs(w), 1.5);
        for (double b : l.bias) EXPECT_LE(std::abs(b), 1.5);
    }
    const auto g = perturb_mlp(f, 0.5, 1.5, rng);
    for (std::size_t i = 0; i < f.layers.size(); ++i)
        for (std::size_t j = 0; j < f.layers[i].weight.size(); ++j) {
            EXPECT_LE(std::abs(g.layers[i].weight[j]), 1.5);
            EXPECT_LE(std::abs(g.layers[i].weight[j] - f.layers[i].weight[j]), 0.5);
        }
}
