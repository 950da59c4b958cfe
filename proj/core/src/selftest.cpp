#include "msgm/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include <fmt/format.h>

#include "msgm/bounds.hpp"
#include "msgm/bracketing.hpp"
#include "msgm/checks.hpp"
#include "msgm/experiments.hpp"
#include "msgm/gaussian.hpp"
#include "msgm/stats.hpp"
#include "msgm/types.hpp"

namespace msgm::selftest {

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
    bool passed;
    std::string detail;
};

using bounds::Strategy;

// ---- core

Outcome determinism() {
    const auto truth = gaussian::make_sim_family(4, 6, 0.5);
    const auto w = SourceWeights::uniform(4);
    const RngStream rng(kSeed, {1});
    const auto a = gaussian::sample_dataset(truth, w, 400, rng);
    const auto b = gaussian::sample_dataset(truth, w, 400, rng);
    const auto ta = gaussian::tv_monte_carlo(gaussian::fit_multi(a, truth.d1()), truth, w, 500, rng.fork(9));
    const auto tb = gaussian::tv_monte_carlo(gaussian::fit_multi(b, truth.d1()), truth, w, 500, rng.fork(9));

    arm::ArmConfig cfg{.M = 2, .D = 3, .K = 2, .de = 3, .L = 2, .W = 4};
    const auto tables = arm::make_truth_tables(2, 2, 3, 1.0, rng.fork(2));
    const auto ds = arm::sample_sequences(tables, SourceWeights::uniform(2), 64, rng.fork(3));
    const arm::TrainOptions opt{.lr = 0.1, .batch_size = 8, .iters = 20};
    const auto pa = arm::train(arm::init_params(cfg, rng.fork(4)), ds, opt, rng.fork(5)).params;
    const auto pb = arm::train(arm::init_params(cfg, rng.fork(4)), ds, opt, rng.fork(5)).params;

    RngStream r1 = rng.fork(6), r2 = rng.fork(6);
    bool draws = true;
    for (int i = 0; i < 1000; ++i) draws = draws && r1() == r2() && r1.normal() == r2.normal();
    const bool ok = a == b && ta == tb && pa == pb && draws;
    return {ok, ok ? "datasets, estimates, training and raw draws replay bit-identically" : "replay differed"};
}

Outcome stream_independence() {
    const auto w = SourceWeights::uniform(2);
    constexpr std::size_t n = 100000;
    double worst = 0.0;
    for (std::uint64_t p = 0; p < 4; ++p) {
        const auto a = sample_labels(w, n, RngStream(kSeed, {2, p}));
        const auto b = sample_labels(w, n, RngStream(kSeed, {2, p + 1}));
        std::vector<double> xa(n), xb(n);
        for (std::size_t i = 0; i < n; ++i) {
            xa[i] = a[i].value();
            xb[i] = b[i].value();
        }
        const auto ma = mean_and_std(xa), mb = mean_and_std(xb);
        double cov = 0.0;
        for (std::size_t i = 0; i < n; ++i) cov += (xa[i] - ma.mean) * (xb[i] - mb.mean);
        cov /= static_cast<double>(n - 1);
        worst = std::max(worst, std::abs(cov / (ma.std * mb.std)));
    }
    return {worst < 0.01, fmt::format("max |r| = {:.5f} over 4 stream pairs", worst)};
}

Outcome partition() {
    const auto truth = gaussian::make_sim_family(5, 3, 0.3);
    const auto ds = gaussian::sample_dataset(truth, SourceWeights({0.1, 0.2, 0.3, 0.25, 0.15}), 777,
                                             RngStream(kSeed, {3}));
    using Row = std::pair<int, std::vector<double>>;
    std::vector<Row> before, after;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto o = ds.observation(i);
        before.emplace_back(ds.label(i).value(), std::vector<double>(o.begin(), o.end()));
    }
    const auto groups = split_by_source(ds);
    for (std::size_t k = 0; k < groups.size(); ++k)
        for (const auto o : groups[k]) after.emplace_back(static_cast<int>(k + 1), std::vector<double>(o.begin(), o.end()));
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    const bool ok = before == after;
    return {ok, fmt::format("{} rows regrouped into {} sources", ds.size(), groups.size())};
}

// ---- gaussian

Outcome unbiasedness() {
    const auto truth = gaussian::make_sim_family(5, 10, 0.5);
    const auto w = SourceWeights::uniform(5);
    const RngStream rng(kSeed, {4});
    const auto est = gaussian::fit_single(gaussian::sample_dataset(truth, w, 500, rng.fork(0)), truth.d1());
    const double exact = gaussian::avg_tv_exact(est, truth, w);
    constexpr std::size_t streams = 200;
    std::vector<double> diff(streams);
    for (std::size_t s = 0; s < streams; ++s)
        diff[s] = gaussian::tv_monte_carlo(est, truth, w, 2000, rng.fork({1, s})) - exact;
    const auto ms = mean_and_std(diff);
    const double tol = 3.0 * ms.std / std::sqrt(static_cast<double>(streams));
    return {std::abs(ms.mean) <= tol, fmt::format("mean(MC - exact) = {:.2e}, tolerance {:.2e}", ms.mean, tol)};
}

Outcome mle_optimality() {
    std::size_t checked = 0, bad = 0;
    for (std::uint64_t t = 0; t < 6; ++t) {
        const std::size_t K = 1 + t % 4;
        const auto truth = gaussian::make_sim_family(K, 5, 0.2 * static_cast<double>(t % 5));
        const auto ds = gaussian::sample_dataset(truth, SourceWeights::uniform(K), 60 * K, RngStream(kSeed, {5, t}));
        for (const auto st : {Strategy::multi, Strategy::single}) {
            const auto fit = st == Strategy::multi ? gaussian::fit_multi(ds, truth.d1()) : gaussian::fit_single(ds, truth.d1());
            const double base = gaussian::log_likelihood(fit, ds);
            std::vector<std::vector<double>> phi, psi;
            for (std::size_t k = 1; k <= K; ++k) {
                const SourceLabel y(static_cast<int>(k));
                phi.push_back(fit.phi(y));
                if (st == Strategy::single || k == 1) psi.push_back(fit.psi(y));
            }
            auto rebuild = [&] {
                return st == Strategy::multi ? gaussian::GaussianFamily::multi_estimate(fit.d(), phi, psi[0])
                                             : gaussian::GaussianFamily::single_estimate(fit.d(), phi, psi);
            };
            for (auto* block : {&phi, &psi}) {
                for (auto& v : *block) {
                    for (auto& c : v) {
                        for (const double h : {1e-3, -1e-3}) {
                            const double saved = c;
                            c = saved + h;
                            ++checked;
                            if (gaussian::log_likelihood(rebuild(), ds) > base) ++bad;
                            c = saved;
                        }
                    }
                }
            }
        }
    }
    return {bad == 0, fmt::format("{} of {} perturbations increased the log-likelihood", bad, checked)};
}

bool same_means(const gaussian::GaussianFamily& a, const gaussian::GaussianFamily& b) {
    for (std::size_t k = 1; k <= a.K(); ++k) {
        const SourceLabel y(static_cast<int>(k));
        if (a.mean_of(y) != b.mean_of(y)) return false;
    }
    return true;
}

Outcome collapse() {
    std::size_t bad = 0;
    for (std::uint64_t t = 0; t < 5; ++t) {
        const auto one = gaussian::make_sim_family(1, 4, 0.5);
        const auto ds1 = gaussian::sample_dataset(one, SourceWeights::uniform(1), 50, RngStream(kSeed, {6, t}));
        if (!same_means(gaussian::fit_multi(ds1, one.d1()), gaussian::fit_single(ds1, one.d1()))) ++bad;
        const auto many = gaussian::make_sim_family(4, 4, 0.0);
        const auto ds4 = gaussian::sample_dataset(many, SourceWeights::uniform(4), 80, RngStream(kSeed, {7, t}));
        if (!same_means(gaussian::fit_multi(ds4, many.d1()), gaussian::fit_single(ds4, many.d1()))) ++bad;
    }
    return {bad == 0, fmt::format("{} of 10 datasets had differing estimates", bad)};
}

double mean_exact_error(std::size_t K, std::size_t n, double beta, std::size_t seeds, Strategy st, std::uint64_t tag) {
    const auto truth = gaussian::make_sim_family(K, 10, beta);
    const auto w = SourceWeights::uniform(K);
    double s = 0.0;
    for (std::size_t seed = 0; seed < seeds; ++seed) {
        const auto ds = gaussian::sample_dataset(truth, w, n, RngStream(kSeed, {tag, K, n, seed}));
        const auto est = st == Strategy::multi ? gaussian::fit_multi(ds, truth.d1()) : gaussian::fit_single(ds, truth.d1());
        s += gaussian::avg_tv_exact(est, truth, w);
    }
    return s / static_cast<double>(seeds);
}

Outcome error_ordering() {
    std::string detail;
    bool ok = true;
    for (const std::size_t K : {3, 5, 10, 15}) {
        const double m = mean_exact_error(K, 500, 0.5, 5, Strategy::multi, 8);
        const double s = mean_exact_error(K, 500, 0.5, 5, Strategy::single, 8);
        ok = ok && m < s;
        detail += fmt::format("{}K={}: {:.4f} < {:.4f}", detail.empty() ? "" : ", ", K, m, s);
    }
    return {ok, detail};
}

Outcome n_scaling() {
    const std::vector<double> ns{100, 300, 500, 1000, 5000};
    std::vector<double> lx;
    for (double n : ns) lx.push_back(std::log(n));
    bool ok = true;
    std::string detail;
    for (const auto st : {Strategy::multi, Strategy::single}) {
        std::vector<double> ly;
        for (double n : ns) ly.push_back(std::log(mean_exact_error(5, static_cast<std::size_t>(n), 0.5, 5, st, 9)));
        const double slope = ols_slope(lx, ly);
        ok = ok && slope >= -0.6 && slope <= -0.4;
        detail += fmt::format("{}{} slope {:.3f}", detail.empty() ? "" : ", ", bounds::to_string(st), slope);
    }
    return {ok, detail};
}

// ---- bounds

Outcome ordering(bounds::Instantiation inst) {
    const auto bad = checks::ordering_violations(inst, 1000, RngStream(kSeed, {10, static_cast<std::uint64_t>(inst)}));
    return {bad == 0, fmt::format("{} violations over 1000 tuples", bad)};
}

Outcome monotonicity() {
    std::size_t bad = 0, checked = 0;
    auto expect_ge = [&](double bigger, double smaller) {
        ++checked;
        if (!(bigger >= smaller)) ++bad;
    };
    RngStream rng(kSeed, {11});
    for (std::size_t t = 0; t < 300; ++t) {
        RngStream r = rng.fork(t);
        const double eps = std::exp(r.uniform(std::log(1e-6), 0.0));
        const double B = std::exp(r.uniform(std::log(0.1), std::log(10.0)));
        for (const auto st : {Strategy::multi, Strategy::single}) {
            bounds::GaussianBoundParams g{.n = 1000, .K = 1 + r.below(20), .d = 2 + r.below(50), .d1 = 0, .B = B,
                                          .delta = 0.1, .epsilon = eps};
            g.d1 = r.below(g.d);
            const double g0 = bounds::gaussian_log_bracketing(g, st);
            auto gv = [&](auto mutate) {
                auto q = g;
                mutate(q);
                return bounds::gaussian_log_bracketing(q, st);
            };
            expect_ge(g0, gv([&](auto& q) { q.epsilon = std::min(1.0, 2.0 * eps); }));
            expect_ge(gv([](auto& q) { ++q.K; }), g0);
            expect_ge(gv([](auto& q) { ++q.d; }), g0);
            expect_ge(gv([](auto& q) { ++q.d1; }), g0);
            expect_ge(gv([](auto& q) { q.B *= 1.5; }), g0);

            bounds::ArmBoundParams a{.n = 1000, .K = 1 + r.below(20), .D = 1 + r.below(32), .M = 2 + r.below(10),
                                     .de = 1 + r.below(64), .L = 1 + r.below(6), .W = 1 + r.below(128),
                                     .S = 1.0 + static_cast<double>(r.below(100000)), .B = B, .delta = 0.1,
                                     .epsilon = eps};
            const double a0 = bounds::arm_log_bracketing(a, st);
            auto av = [&](auto mutate) {
                auto q = a;
                mutate(q);
                return bounds::arm_log_bracketing(q, st);
            };
            expect_ge(a0, av([&](auto& q) { q.epsilon = std::min(1.0, 2.0 * eps); }));
            for (auto f : {+[](bounds::ArmBoundParams& q) { ++q.K; }, +[](bounds::ArmBoundParams& q) { ++q.D; },
                           +[](bounds::ArmBoundParams& q) { ++q.M; }, +[](bounds::ArmBoundParams& q) { ++q.de; },
                           +[](bounds::ArmBoundParams& q) { ++q.L; }, +[](bounds::ArmBoundParams& q) { ++q.W; },
                           +[](bounds::ArmBoundParams& q) { q.S += 1.0; },
                           +[](bounds::ArmBoundParams& q) { q.B *= 1.5; }})
                expect_ge(av(f), a0);

            bounds::EbmBoundParams e{.n = 1000, .K = a.K, .de = a.de, .L = a.L, .W = a.W, .S = a.S, .B = B,
                                     .delta = 0.1, .epsilon = eps};
            const double e0 = bounds::ebm_log_bracketing(e, st);
            auto ev = [&](auto mutate) {
                auto q = e;
                mutate(q);
                return bounds::ebm_log_bracketing(q, st);
            };
            expect_ge(e0, ev([&](auto& q) { q.epsilon = std::min(1.0, 2.0 * eps); }));
            for (auto f : {+[](bounds::EbmBoundParams& q) { ++q.K; }, +[](bounds::EbmBoundParams& q) { ++q.de; },
                           +[](bounds::EbmBoundParams& q) { ++q.L; }, +[](bounds::EbmBoundParams& q) { ++q.W; },
                           +[](bounds::EbmBoundParams& q) { q.S += 1.0; },
                           +[](bounds::EbmBoundParams& q) { q.B *= 1.5; }})
                expect_ge(ev(f), e0);
        }
    }
    return {bad == 0, fmt::format("{} of {} single-parameter moves went the wrong way", bad, checked)};
}

double gaussian_ratio_gap(std::uint64_t n) {
    const bounds::GaussianBoundParams p{.n = n, .K = 5, .d = 10, .d1 = 5, .B = 1.0, .delta = 0.1, .epsilon = {}};
    const double r = bounds::gaussian_bound(p, Strategy::multi).tv_bound / bounds::gaussian_bound(p, Strategy::single).tv_bound;
    return std::abs(r - bounds::advantage_ratio(5, 0.5));
}

Outcome ratio_at_1e9() {
    const double gap = gaussian_ratio_gap(1'000'000'000ULL);
    return {gap <= 1e-6, fmt::format("|ratio - advantage_ratio| = {:.3e} at n = 1e9 (K=5, d=10, d1=5)", gap)};
}

Outcome ratio_convergence() {
    std::vector<double> gaps;
    for (std::uint64_t n = 1000; n <= 1'000'000'000'000ULL; n *= 1000) gaps.push_back(gaussian_ratio_gap(n));
    const bool ok = std::is_sorted(gaps.rbegin(), gaps.rend()) && gaps.back() < gaps.front();
    return {ok, fmt::format("gap at n = 1e3..1e12: {:.3e} {:.3e} {:.3e} {:.3e}", gaps[0], gaps[1], gaps[2], gaps[3])};
}

Outcome no_overflow() {
    const std::uint64_t n = 1'000'000'000'000ULL;
    bool ok = true;
    for (const auto st : {Strategy::multi, Strategy::single}) {
        const bounds::ArmBoundParams a{.n = n, .K = 1000, .D = 4096, .M = 50000, .de = 4096, .L = 96, .W = 16384,
                                       .S = 1e9, .B = 100.0, .delta = 1e-6, .epsilon = {}};
        const bounds::EbmBoundParams e{.n = n, .K = 1000, .de = 4096, .L = 96, .W = 16384, .S = 1e9, .B = 100.0,
                                       .delta = 1e-6, .epsilon = {}};
        const bounds::GaussianBoundParams g{.n = n, .K = 1000, .d = 1000000, .d1 = 1000, .B = 1e6, .delta = 1e-6,
                                            .epsilon = {}};
        for (const auto v : {bounds::arm_bound(a, st), bounds::ebm_bound(e, st), bounds::gaussian_bound(g, st)})
            ok = ok && std::isfinite(v.log_bracketing) && std::isfinite(v.tv_bound) && v.tv_bound > 0.0;
        ok = ok && std::isfinite(bounds::mlp_log_covering(1e-12, 96, 16384, 1e9, 100.0));
    }
    return {ok, "S = 1e9, n = 1e12 bounds are finite"};
}

// ---- bracketing

Outcome gaussian_dominance(const checks::GaussianBracketSweep& s) {
    return {s.dominance_violations == 0,
            fmt::format("{} violations over {} probes in {} configurations", s.dominance_violations, s.probes, s.configs)};
}

Outcome gaussian_gap(const checks::GaussianBracketSweep& s) {
    return {s.gap_exceeded == 0, fmt::format("{} of {} configurations have gap > eps; worst gap/eps = {:.3f} ({})",
                                             s.gap_exceeded, s.configs, s.worst_gap_ratio, s.worst_case)};
}

Outcome ebm_soundness() {
    const auto s = checks::ebm_bracket_sweep(100, RngStream(kSeed, {13}));
    return {s.dominance_violations == 0 && s.gap_exceeded == 0,
            fmt::format("{} dominance violations, {} gaps over bound, worst gap/bound = {:.3f}", s.dominance_violations,
                        s.gap_exceeded, s.worst_gap_ratio)};
}

Outcome constant_bracket() {
    std::size_t unsound = 0;
    std::uint64_t i = 0;
    for (const double eps : checks::kGaussianBracketEps)
        if (!bracketing::constant_bracket_verify(eps, 10000, RngStream(kSeed, {14, i++})).sound()) ++unsound;
    return {unsound == 0, fmt::format("{} unsound brackets", unsound)};
}

Outcome count_soundness() {
    const auto c81 = bracketing::gaussian_bracket_count(2, 1, 1, 1.0, 0.5, Strategy::single);
    const double n81 = std::exp(c81.log_count);
    const auto s = checks::gaussian_count_sweep(50, RngStream(kSeed, {15}));
    const bool ok = std::abs(n81 - 81.0) < 1e-9 && !c81.estimated && s.above_bound == 0 && s.equality_failed == 0 &&
                    s.equality_checked > 0;
    return {ok, fmt::format("(K=2,d=1,B=1,eps=0.5) count {:.6g}; {} of {} above bound; {} of {} integer-grid equalities failed",
                            n81, s.above_bound, s.configs, s.equality_failed, s.equality_checked)};
}

Outcome lemma_universality() {
    double worst = 0.0;
    std::string detail;
    for (const auto kind : {bracketing::LemmaKind::input_lipschitz, bracketing::LemmaKind::param_lipschitz,
                            bracketing::LemmaKind::output_supnorm}) {
        const double r = checks::mlp_lemma_sweep(kind, 100, 100, RngStream(kSeed, {16, static_cast<std::uint64_t>(kind)}));
        worst = std::max(worst, r);
        detail += fmt::format("{}{:.4f}", detail.empty() ? "max ratios " : ", ", r);
    }
    return {worst <= 1.0 + 1e-9, detail};
}

// ---- arm

Outcome masking(const arm::ForwardFn& fwd) {
    arm::ArmConfig random_cfg;
    random_cfg.D = 0;
    const auto bad = checks::arm_masking_violations(fwd, random_cfg, 200, RngStream(kSeed, {17}));
    return {bad == 0, fmt::format("{} (instance, position) pairs leaked future tokens", bad)};
}

Outcome normalization(const arm::ForwardFn& fwd) {
    const arm::ArmConfig cfg{.M = 2, .D = 10, .K = 3, .de = 8, .L = 2, .W = 8};
    const double err = checks::arm_normalization_error(fwd, cfg, 100, RngStream(kSeed, {18}));
    return {err <= 1e-9, fmt::format("max |sum - 1| = {:.3e} over 100 draws", err)};
}

Outcome gradient() {
    double worst = 0.0;
    RngStream rng(kSeed, {19});
    for (std::size_t i = 0; i < 10; ++i) {
        RngStream r = rng.fork(i);
        const arm::ArmConfig cfg{.M = 2 + r.below(3), .D = 2 + r.below(4), .K = 1 + r.below(3), .de = 1 + r.below(4),
                                 .L = 1 + r.below(3), .W = 1 + r.below(6)};
        worst = std::max(worst, checks::arm_gradient_error(cfg, 16, r.fork(1)));
    }
    return {worst < 1e-4, fmt::format("max relative error {:.3e} over 10 instances", worst)};
}

// ARM statistical properties (extended only).
struct ArmRun {
    double multi;
    double single;
};

ArmRun arm_mean_tv(std::uint64_t n) {
    experiments::SweepConfig cfg;
    cfg.experiment = experiments::Experiment::arm;
    cfg.estimators = {experiments::Estimator::exact};
    cfg.axis = experiments::Axis::n;
    cfg.axis_values = {static_cast<double>(n)};
    cfg.fixed.K = 3;
    cfg.fixed.M = 2;
    cfg.fixed.D = 10;
    cfg.fixed.de = 64;
    cfg.fixed.W = 64;
    cfg.fixed.L = 5;
    cfg.fixed.lr = 0.1;
    cfg.fixed.batch = 100;
    cfg.fixed.iters = 20000;
    cfg.seeds = 3;
    cfg.master_seed = kSeed;
    cfg.emit_theory = false;
    ArmRun out{0.0, 0.0};
    for (const auto& row : experiments::run_arm_sweep(cfg))
        (row.strategy == Strategy::multi ? out.multi : out.single) = row.mean_tv;
    return out;
}

// ---- experiments

experiments::SweepConfig small_gaussian_sweep() {
    experiments::SweepConfig cfg;
    cfg.experiment = experiments::Experiment::gaussian;
    cfg.axis = experiments::Axis::K;
    cfg.axis_values = {1, 3, 5};
    cfg.fixed.n = 300;
    cfg.fixed.d = 6;
    cfg.fixed.beta_sim = 0.5;
    cfg.fixed.n_test = 2000;
    cfg.seeds = 3;
    cfg.master_seed = kSeed;
    return cfg;
}

experiments::SweepConfig small_arm_sweep() {
    experiments::SweepConfig cfg;
    cfg.experiment = experiments::Experiment::arm;
    cfg.estimators = {experiments::Estimator::exact};
    cfg.axis = experiments::Axis::K;
    cfg.axis_values = {1, 2};
    cfg.fixed.n = 200;
    cfg.fixed.M = 2;
    cfg.fixed.D = 4;
    cfg.fixed.de = 4;
    cfg.fixed.W = 4;
    cfg.fixed.L = 2;
    cfg.fixed.iters = 50;
    cfg.fixed.batch = 16;
    cfg.fixed.lr = 0.1;
    cfg.seeds = 2;
    cfg.master_seed = kSeed;
    return cfg;
}

Outcome reproducibility() {
    const auto g = small_gaussian_sweep();
    const auto a = small_arm_sweep();
    const auto p = experiments::provenance_line(g);
    const bool gs = experiments::format_csv(experiments::run_gaussian_sweep(g), p) ==
                    experiments::format_csv(experiments::run_gaussian_sweep(g), p);
    const bool as = experiments::format_csv(experiments::run_arm_sweep(a)) ==
                    experiments::format_csv(experiments::run_arm_sweep(a));
    return {gs && as, fmt::format("gaussian {} / arm {}", gs ? "identical" : "DIFFERENT", as ? "identical" : "DIFFERENT")};
}

Outcome aggregation() {
    std::size_t bad = 0, rows = 0;
    const auto g = small_gaussian_sweep();
    const auto a = small_arm_sweep();
    for (const auto& [cfg, res] : {std::pair{g, experiments::run_gaussian_sweep_detailed(g)},
                                   std::pair{a, experiments::run_arm_sweep_detailed(a)}}) {
        for (const auto& row : res.rows) {
            ++rows;
            const auto axis_index = static_cast<std::size_t>(
                std::find(cfg.axis_values.begin(), cfg.axis_values.end(), row.axis_value) - cfg.axis_values.begin());
            std::vector<double> v;
            for (const auto& c : res.cells)
                if (c.axis_index == axis_index && c.strategy == row.strategy && c.estimator == row.estimator)
                    v.push_back(c.tv);
            const auto ms = mean_and_std(v);
            if (v.size() != row.n_runs || ms.mean != row.mean_tv || ms.std != row.std_tv) ++bad;
        }
    }
    return {bad == 0, fmt::format("{} of {} rows disagree with their cells", bad, rows)};
}

Outcome theory_attachment() {
    std::size_t bad = 0, rows = 0;
    const auto g = small_gaussian_sweep();
    for (const auto& row : experiments::run_gaussian_sweep(g)) {
        ++rows;
        const auto K = static_cast<std::size_t>(row.axis_value);
        const std::size_t d1 = *g.fixed.d - static_cast<std::size_t>(std::floor(*g.fixed.beta_sim * static_cast<double>(*g.fixed.d)));
        const bounds::GaussianBoundParams p{.n = *g.fixed.n, .K = K, .d = *g.fixed.d, .d1 = d1,
                                            .B = static_cast<double>(K), .delta = g.delta, .epsilon = {}};
        if (!row.theory_bound || *row.theory_bound != bounds::gaussian_bound(p, row.strategy).tv_bound) ++bad;
    }
    const auto a = small_arm_sweep();
    for (const auto& row : experiments::run_arm_sweep(a)) {
        ++rows;
        const auto K = static_cast<std::size_t>(row.axis_value);
        const arm::ArmConfig cfg{.M = *a.fixed.M, .D = *a.fixed.D, .K = K, .de = *a.fixed.de, .L = *a.fixed.L,
                                 .W = *a.fixed.W};
        const bounds::ArmBoundParams p{.n = *a.fixed.n, .K = K, .D = cfg.D, .M = cfg.M, .de = cfg.de, .L = cfg.L,
                                       .W = cfg.W, .S = static_cast<double>(cfg.mlp_parameter_count()), .B = 1.0,
                                       .delta = a.delta, .epsilon = {}};
        if (!row.theory_bound || *row.theory_bound != bounds::arm_bound(p, row.strategy).tv_bound) ++bad;
    }
    return {bad == 0, fmt::format("{} of {} theory values differ from the bounds module", bad, rows)};
}

}  // namespace

std::vector<PropertyResult> run(const Options& options) {
    std::vector<PropertyResult> out;
    auto record = [&](std::string module, std::string name, auto&& fn) {
        PropertyResult r{std::move(module), std::move(name), false, {}};
        try {
            const Outcome o = fn();
            r.passed = o.passed;
            r.detail = o.detail;
        } catch (const std::exception& e) {
            r.detail = std::string("threw: ") + e.what();
        }
        if (options.on_result) options.on_result(r);
        out.push_back(std::move(r));
    };

    record("core", "determinism", determinism);
    record("core", "stream independence", stream_independence);
    record("core", "partition", partition);

    record("gaussian", "MC unbiasedness", unbiasedness);
    record("gaussian", "MLE optimality", mle_optimality);
    record("gaussian", "collapse", collapse);
    record("gaussian", "error ordering", error_ordering);
    record("gaussian", "n scaling", n_scaling);

    record("bounds", "multi <= single ordering (gaussian)", [] { return ordering(bounds::Instantiation::gaussian); });
    record("bounds", "multi <= single ordering (arm)", [] { return ordering(bounds::Instantiation::arm); });
    record("bounds", "multi <= single ordering (ebm)", [] { return ordering(bounds::Instantiation::ebm); });
    record("bounds", "monotonicity", monotonicity);
    record("bounds", "ratio consistency at n = 1e9", ratio_at_1e9);
    record("bounds", "ratio convergence", ratio_convergence);
    record("bounds", "no overflow", no_overflow);

    checks::GaussianBracketSweep sweep;
    try {
        sweep = checks::gaussian_bracket_sweep(100, 10000, RngStream(kSeed, {12}));
    } catch (const std::exception& e) {
        sweep.dominance_violations = sweep.gap_exceeded = 1;
        sweep.worst_case = std::string("threw: ") + e.what();
    }
    record("bracketing", "gaussian dominance", [&] { return gaussian_dominance(sweep); });
    record("bracketing", "gaussian gap <= eps", [&] { return gaussian_gap(sweep); });
    record("bracketing", "ebm dominance and gap", ebm_soundness);
    record("bracketing", "constant bracket", constant_bracket);
    record("bracketing", "count soundness", count_soundness);
    record("bracketing", "MLP lemma universality", lemma_universality);

    record("arm", "masking", [&] { return masking(options.forward); });
    record("arm", "normalization", [&] { return normalization(options.forward); });
    record("arm", "gradient", gradient);
    if (options.extended) {
        record("arm", "multi <= single (n = 30000)", [&] {
            const auto r = arm_mean_tv(30000);
            return Outcome{r.multi <= r.single, fmt::format("multi {:.4f}, single {:.4f}", r.multi, r.single)};
        });
        record("arm", "sample-size trend", [&] {
            std::vector<ArmRun> v;
            for (const std::uint64_t n : {1000, 5000, 30000}) v.push_back(arm_mean_tv(n));
            bool ok = true;
            std::string detail;
            for (const bool multi : {true, false}) {
                int inversions = 0;
                for (std::size_t i = 1; i < v.size(); ++i) {
                    const double prev = multi ? v[i - 1].multi : v[i - 1].single;
                    const double cur = multi ? v[i].multi : v[i].single;
                    if (cur >= prev) ++inversions;
                }
                ok = ok && inversions <= 1;
                detail += fmt::format("{}{}: {:.4f} {:.4f} {:.4f}", detail.empty() ? "" : "; ", multi ? "multi" : "single",
                                      multi ? v[0].multi : v[0].single, multi ? v[1].multi : v[1].single,
                                      multi ? v[2].multi : v[2].single);
            }
            return Outcome{ok, detail};
        });
    }

    record("experiments", "byte-identical CSV", reproducibility);
    record("experiments", "aggregation", aggregation);
    record("experiments", "theory attachment", theory_attachment);
    return out;
}

}  // namespace msgm::selftest
