#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "msgm/arm.hpp"
#include "msgm/checks.hpp"

using namespace msgm;
using namespace msgm::arm;

namespace {

ArmParams zero_mlp(const ArmConfig& cfg) {
    ArmParams p = init_params(cfg, RngStream(1));
    for (auto& l : p.mlp.layers) {
        std::fill(l.weight.begin(), l.weight.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return p;
}

TokenDataset random_batch(const ArmConfig& cfg, std::size_t n, RngStream rng) {
    TokenDataset ds(cfg.K, cfg.D);
    std::vector<int> x(cfg.D);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& t : x) t = static_cast<int>(rng.below(cfg.M));
        ds.push_back(x, SourceLabel(static_cast<int>(1 + rng.below(cfg.K))));
    }
    return ds;
}

}  // namespace

TEST(ArmConfig, Validation) {
    EXPECT_THROW((ArmConfig{.M = 1, .D = 2, .K = 1, .de = 1, .L = 1, .W = 1}.validate()), std::invalid_argument);
    EXPECT_THROW((ArmConfig{.M = 2, .D = 0, .K = 1, .de = 1, .L = 1, .W = 1}.validate()), std::invalid_argument);
    EXPECT_THROW((void)(ArmConfig{.M = 2, .D = 22, .K = 1, .de = 1, .L = 1, .W = 1}.support_size()), std::length_error);
    const ArmConfig ok{.M = 2, .D = 8, .K = 3, .de = 16, .L = 3, .W = 16};
    EXPECT_NO_THROW(ok.validate());
    EXPECT_EQ(ok.support_size(), 256u);
    EXPECT_EQ(ok.mlp_parameter_count(), 8u * 16 + 16 + 16 * 16 + 16 + 16 * 2 + 2);
    EXPECT_EQ(ok.parameter_count(), ok.mlp_parameter_count() + 3 * 16 + 2 * 16 + 8 * 16 + 8);
}

TEST(ArmParams, ShapesAndInitDomains) {
    const ArmConfig cfg{.M = 3, .D = 4, .K = 2, .de = 5, .L = 2, .W = 6};
    const auto p = init_params(cfg, RngStream(2));
    EXPECT_EQ(p.VY.size(), 10u);
    EXPECT_EQ(p.VX.size(), 15u);
    EXPECT_EQ(p.A0.size(), 20u);
    EXPECT_EQ(p.b0.size(), 4u);
    EXPECT_EQ(p.mlp.input_width(), 4u);
    EXPECT_EQ(p.mlp.output_width(), 3u);
    EXPECT_EQ(p.size(), cfg.parameter_count());
    for (double v : p.VY) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_TRUE(p.all_finite());
    EXPECT_EQ(init_params(cfg, RngStream(2)), p);
}

TEST(Softmax, StableAndNormalised) {
    const auto s = softmax(std::vector<double>{1000.0, 1000.0});
    EXPECT_DOUBLE_EQ(s[0], 0.5);
    const auto t = softmax(std::vector<double>{-1e4, 0.0, 3.0});
    EXPECT_NEAR(t[0] + t[1] + t[2], 1.0, 1e-15);
    EXPECT_EQ(t[0], 0.0);
}

TEST(ForwardPosition, ZeroMlpGivesUniform) {
    const ArmConfig cfg{.M = 4, .D = 3, .K = 2, .de = 3, .L = 2, .W = 5};
    const auto p = zero_mlp(cfg);
    const std::vector<int> x{0, 3, 1};
    for (std::size_t pos = 1; pos <= 3; ++pos)
        for (double v : forward_position(p, x, SourceLabel(2), pos)) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(ForwardPosition, TwoTokensSumToOne) {
    const ArmConfig cfg{.M = 2, .D = 5, .K = 3, .de = 4, .L = 3, .W = 6};
    const auto p = init_params(cfg, RngStream(3));
    const std::vector<int> x{1, 0, 1, 1, 0};
    for (std::size_t pos = 1; pos <= 5; ++pos) {
        const auto pr = forward_position(p, x, SourceLabel(1), pos);
        EXPECT_NEAR(pr[0] + pr[1], 1.0, 1e-12);
    }
}

TEST(ForwardPosition, FutureTokensAreMasked) {
    const ArmConfig cfg{.M = 3, .D = 6, .K = 2, .de = 4, .L = 2, .W = 5};
    const auto p = init_params(cfg, RngStream(4));
    std::vector<int> x{0, 1, 2, 0, 1, 2};
    for (std::size_t pos = 1; pos <= 6; ++pos) {
        const auto ref = forward_position(p, x, SourceLabel(2), pos);
        auto xp = x;
        xp[5] = (xp[5] + 1) % 3;
        for (std::size_t j = pos - 1; j < 6; ++j) xp[j] = (xp[j] + 2) % 3;
        EXPECT_EQ(forward_position(p, xp, SourceLabel(2), pos), ref) << "pos " << pos;
    }
}

TEST(ForwardPosition, PastTokensMatter) {
    const ArmConfig cfg{.M = 3, .D = 3, .K = 1, .de = 4, .L = 2, .W = 5};
    const auto p = init_params(cfg, RngStream(5));
    const std::vector<int> a{0, 0, 0}, b{2, 0, 0};
    EXPECT_NE(forward_position(p, a, SourceLabel(1), 2), forward_position(p, b, SourceLabel(1), 2));
}

TEST(ForwardPosition, RangeErrors) {
    const ArmConfig cfg{.M = 2, .D = 3, .K = 2, .de = 2, .L = 1, .W = 2};
    const auto p = init_params(cfg, RngStream(6));
    EXPECT_THROW(forward_position(p, std::vector<int>{0, 2, 0}, SourceLabel(1), 1), std::out_of_range);
    EXPECT_THROW(forward_position(p, std::vector<int>{0, 1, 0}, SourceLabel(3), 1), std::out_of_range);
    EXPECT_THROW(forward_position(p, std::vector<int>{0, 1, 0}, SourceLabel(1), 0), std::out_of_range);
    EXPECT_THROW(forward_position(p, std::vector<int>{0, 1, 0}, SourceLabel(1), 4), std::out_of_range);
    EXPECT_THROW(forward_position(p, std::vector<int>{0, 1}, SourceLabel(1), 1), std::invalid_argument);
}

TEST(LogProb, ZeroMlpIsUniform) {
    const ArmConfig cfg{.M = 2, .D = 10, .K = 1, .de = 3, .L = 2, .W = 4};
    const auto p = zero_mlp(cfg);
    const std::vector<int> x(10, 1);
    EXPECT_NEAR(log_prob(p, x, SourceLabel(1)), 10.0 * std::log(0.5), 1e-12);
}

TEST(LogProb, ChainRuleNormalisation) {
    const ArmConfig cfg{.M = 2, .D = 10, .K = 2, .de = 4, .L = 2, .W = 8};
    const auto p = init_params(cfg, RngStream(7));
    double s = 0.0;
    for (std::size_t i = 0; i < cfg.support_size(); ++i) s += std::exp(log_prob(p, sequence_at(i, 2, 10), SourceLabel(2)));
    EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(LogProb, OtherSourceRowsAreIgnored) {
    const ArmConfig cfg{.M = 3, .D = 4, .K = 3, .de = 3, .L = 2, .W = 4};
    auto p = init_params(cfg, RngStream(8));
    const std::vector<int> x{2, 0, 1, 1};
    const double before = log_prob(p, x, SourceLabel(2));
    for (std::size_t j = 0; j < cfg.de; ++j) std::swap(p.VY[0 * cfg.de + j], p.VY[2 * cfg.de + j]);
    EXPECT_EQ(log_prob(p, x, SourceLabel(2)), before);
}

TEST(GradNll, FiniteDifferenceOnReferenceInstance) {
    const ArmConfig cfg{.M = 2, .D = 4, .K = 2, .de = 3, .L = 2, .W = 4};
    EXPECT_LT(checks::arm_gradient_error(cfg, 12, RngStream(9)), 1e-4);
}

TEST(GradNll, FiniteDifferenceOnRandomInstances) {
    RngStream rng(10);
    for (std::uint64_t i = 0; i < 5; ++i) {
        RngStream r = rng.fork(i);
        const ArmConfig cfg{.M = 2 + r.below(3), .D = 1 + r.below(5), .K = 1 + r.below(3), .de = 1 + r.below(4),
                            .L = 1 + r.below(3), .W = 1 + r.below(6)};
        EXPECT_LT(checks::arm_gradient_error(cfg, 10, r.fork(1)), 1e-4) << "instance " << i;
    }
}

TEST(GradNll, UnusedSourceRowHasZeroGradient) {
    const ArmConfig cfg{.M = 2, .D = 3, .K = 3, .de = 4, .L = 2, .W = 4};
    const auto p = init_params(cfg, RngStream(11));
    TokenDataset ds(3, 3);
    ds.push_back(std::vector<int>{0, 1, 1}, SourceLabel(1));
    ds.push_back(std::vector<int>{1, 1, 0}, SourceLabel(3));
    const auto g = grad_nll(p, ds);
    for (std::size_t j = 0; j < cfg.de; ++j) EXPECT_EQ(g.VY[1 * cfg.de + j], 0.0);
}

TEST(GradNll, DuplicatedBatchHasSameMeanGradient) {
    const ArmConfig cfg{.M = 3, .D = 3, .K = 2, .de = 3, .L = 2, .W = 4};
    const auto p = init_params(cfg, RngStream(12));
    const auto ds = random_batch(cfg, 7, RngStream(13));
    TokenDataset twice(cfg.K, cfg.D);
    for (int r = 0; r < 2; ++r)
        for (std::size_t i = 0; i < ds.size(); ++i) twice.push_back(ds.observation(i), ds.label(i));
    const auto ga = grad_nll(p, ds);
    const auto gb = grad_nll(p, twice);
    const auto a = ga.blocks();
    const auto b = gb.blocks();
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t i = 0; i < a[k].size(); ++i) EXPECT_NEAR(a[k][i], b[k][i], 1e-14);
    EXPECT_THROW(grad_nll(p, TokenDataset(cfg.K, cfg.D)), std::invalid_argument);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
    const ArmConfig cfg{.M = 2, .D = 3, .K = 2, .de = 2, .L = 2, .W = 3};
    const auto p = init_params(cfg, RngStream(14));
    const auto ds = random_batch(cfg, 30, RngStream(15));
    EXPECT_EQ(train(p, ds, {.lr = 0.0, .batch_size = 10, .iters = 20}, RngStream(16)).params, p);
}

TEST(Train, UniformTruthReachesEntropyFloor) {
    const ArmConfig cfg{.M = 2, .D = 6, .K = 1, .de = 4, .L = 2, .W = 8};
    const std::vector<CategoricalTable> truth{CategoricalTable(2, 6, std::vector<double>(64, 1.0 / 64.0))};
    const auto ds = sample_sequences(truth, SourceWeights::uniform(1), 4000, RngStream(17));
    const auto res = train(init_params(cfg, RngStream(18)), ds, {.lr = 0.2, .batch_size = 100, .iters = 1500}, RngStream(19));
    const double floor = 6.0 * std::log(2.0);
    EXPECT_LE(res.final_nll, res.initial_nll);
    EXPECT_NEAR(res.final_nll, floor, 0.02 * floor);
}

TEST(Train, Deterministic) {
    const ArmConfig cfg{.M = 2, .D = 4, .K = 2, .de = 3, .L = 2, .W = 4};
    const auto ds = random_batch(cfg, 50, RngStream(20));
    const TrainOptions opt{.lr = 0.1, .batch_size = 8, .iters = 30};
    EXPECT_EQ(train(init_params(cfg, RngStream(21)), ds, opt, RngStream(22)).params,
              train(init_params(cfg, RngStream(21)), ds, opt, RngStream(22)).params);
}

TEST(Train, DivergenceAborts) {
    const ArmConfig cfg{.M = 2, .D = 4, .K = 1, .de = 3, .L = 2, .W = 4};
    const auto ds = random_batch(cfg, 50, RngStream(23));
    EXPECT_THROW(train(init_params(cfg, RngStream(24)), ds, {.lr = 1e200, .batch_size = 10, .iters = 10}, RngStream(25)),
                 std::runtime_error);
    EXPECT_THROW(train(init_params(cfg, RngStream(24)), TokenDataset(1, 4), {}, RngStream(25)), std::invalid_argument);
}

TEST(SequenceIndex, RoundTrip) {
    for (std::size_t i = 0; i < 81; ++i) EXPECT_EQ(sequence_index(sequence_at(i, 3, 4), 3), i);
}

TEST(EnumerateDistribution, ZeroMlpIsUniform) {
    const ArmConfig cfg{.M = 3, .D = 4, .K = 1, .de = 2, .L = 2, .W = 3};
    for (double v : enumerate_distribution(zero_mlp(cfg), SourceLabel(1))) EXPECT_NEAR(v, 1.0 / 81.0, 1e-15);
}

TEST(EnumerateDistribution, MatchesLogProbAndSumsToOne) {
    const ArmConfig cfg{.M = 2, .D = 10, .K = 2, .de = 4, .L = 3, .W = 8};
    const auto p = init_params(cfg, RngStream(26));
    const auto probs = enumerate_distribution(p, SourceLabel(1));
    EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-9);
    for (std::size_t i : {0u, 17u, 511u, 1023u})
        EXPECT_NEAR(probs[i], std::exp(log_prob(p, sequence_at(i, 2, 10), SourceLabel(1))), 1e-14);
    const auto slow = enumerate_distribution(ForwardFn(&forward_position), p, SourceLabel(1));
    for (std::size_t i = 0; i < probs.size(); ++i) ASSERT_NEAR(probs[i], slow[i], 1e-14);
}

TEST(EnumerateDistribution, SingleStepCollapse) {
    const ArmConfig cfg{.M = 4, .D = 1, .K = 2, .de = 3, .L = 2, .W = 5};
    const auto p = init_params(cfg, RngStream(27));
    const auto probs = enumerate_distribution(p, SourceLabel(2));
    const auto f = forward_position(p, std::vector<int>{0}, SourceLabel(2), 1);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(probs[i], f[i], 1e-15);
}

TEST(CategoricalTable, Validation) {
    EXPECT_THROW(CategoricalTable(2, 2, {0.5, 0.5}), std::invalid_argument);
    EXPECT_THROW(CategoricalTable(2, 1, {0.7, 0.7}), std::invalid_argument);
    EXPECT_THROW(CategoricalTable(2, 1, {1.5, -0.5}), std::invalid_argument);
    EXPECT_NO_THROW(CategoricalTable(2, 1, {0.3, 0.7}));
}

TEST(MakeTruthTables, Properties) {
    const auto t = make_truth_tables(3, 2, 4, 1.0, RngStream(28));
    ASSERT_EQ(t.size(), 3u);
    for (const auto& tab : t) {
        const auto p = tab.probabilities();
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    }
    EXPECT_NE(std::vector<double>(t[0].probabilities().begin(), t[0].probabilities().end()),
              std::vector<double>(t[1].probabilities().begin(), t[1].probabilities().end()));
    const auto other = make_truth_tables(1, 2, 4, 1.0, RngStream(28, {1}));
    EXPECT_NE(std::vector<double>(other[0].probabilities().begin(), other[0].probabilities().end()),
              std::vector<double>(t[0].probabilities().begin(), t[0].probabilities().end()));
    const auto flat = make_truth_tables(1, 2, 4, 1e6, RngStream(29));
    for (double v : flat[0].probabilities()) EXPECT_NEAR(v, 1.0 / 16.0, 1e-2);
    EXPECT_THROW(make_truth_tables(1, 2, 22, 1.0, RngStream(1)), std::length_error);
}

TEST(ExactAvgTv, Examples) {
    const auto truths = make_truth_tables(2, 2, 3, 1.0, RngStream(30));
    const std::vector<CategoricalTable> half{CategoricalTable(2, 1, {0.5, 0.5})};
    const std::vector<CategoricalTable> point{CategoricalTable(2, 1, {1.0, 0.0})};
    EXPECT_NEAR(tv_distance(half[0].probabilities(), point[0].probabilities()), 0.5, 1e-15);
    // A model whose MLP is zero is uniform; compare to a point mass.
    const ArmConfig cfg{.M = 2, .D = 1, .K = 1, .de = 2, .L = 1, .W = 2};
    const std::vector<ArmParams> model{zero_mlp(cfg)};
    EXPECT_NEAR(exact_avg_tv(model, point, SourceWeights::uniform(1)), 0.5, 1e-15);
    EXPECT_NEAR(exact_avg_tv(model, half, SourceWeights::uniform(1)), 0.0, 1e-15);
    EXPECT_THROW(exact_avg_tv(model, truths, SourceWeights::uniform(2)), std::invalid_argument);
}

TEST(SampleSequences, EmpiricalFrequencies) {
    const std::vector<CategoricalTable> t{CategoricalTable(2, 1, {0.2, 0.8}), CategoricalTable(2, 1, {0.9, 0.1})};
    const auto ds = sample_sequences(t, SourceWeights::uniform(2), 100000, RngStream(31));
    std::vector<double> ones(2, 0.0), count(2, 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        ones[ds.label(i).index()] += ds.observation(i)[0];
        count[ds.label(i).index()] += 1.0;
    }
    EXPECT_NEAR(ones[0] / count[0], 0.8, 0.01);
    EXPECT_NEAR(ones[1] / count[1], 0.1, 0.01);
}

TEST(FaultInjection, FaultsAreDetected) {
    const ArmConfig cfg{.M = 2, .D = 10, .K = 3, .de = 8, .L = 2, .W = 8};
    const ForwardFn soft = [](const ArmParams& p, std::span<const int> x, SourceLabel y, std::size_t pos) {
        return arm::testing::forward_position_with_fault(p, x, y, pos, arm::testing::Fault::softmax_off_by_one);
    };
    const ForwardFn mask = [](const ArmParams& p, std::span<const int> x, SourceLabel y, std::size_t pos) {
        return arm::testing::forward_position_with_fault(p, x, y, pos, arm::testing::Fault::mask_off_by_one);
    };
    EXPECT_GT(checks::arm_normalization_error(soft, cfg, 3, RngStream(32)), 1e-9);
    ArmConfig random_cfg;
    random_cfg.D = 0;
    EXPECT_GT(checks::arm_masking_violations(mask, random_cfg, 20, RngStream(33)), 0u);
    EXPECT_EQ(checks::arm_masking_violations(ForwardFn(&forward_position), random_cfg, 20, RngStream(33)), 0u);
}
