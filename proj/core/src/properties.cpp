#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "msgm/bracketing.hpp"
#include "msgm/checks.hpp"
#include "msgm/parallel.hpp"

namespace msgm::checks {

namespace {

arm::ArmParams scaled_params(const arm::ArmConfig& cfg, RngStream rng, double gain) {
    auto p = arm::init_params(cfg, rng.fork(0));
    RngStream r = rng.fork(1);
    // Larger weights than the training init so the ReLU pattern and softmax are far from trivial.
    for (auto& layer : p.mlp.layers) {
        for (auto& v : layer.weight) v *= gain;
        for (auto& v : layer.bias) v = gain * v + r.uniform(-0.1, 0.1);
    }
    return p;
}

arm::ArmConfig small_config(RngStream& rng) {
    arm::ArmConfig cfg;
    cfg.M = 2 + rng.below(3);
    cfg.D = 2 + rng.below(4);
    cfg.K = 1 + rng.below(3);
    cfg.de = 1 + rng.below(4);
    cfg.L = 1 + rng.below(3);
    cfg.W = 1 + rng.below(5);
    return cfg;
}

std::vector<int> random_tokens(std::size_t D, std::size_t M, RngStream& rng) {
    std::vector<int> x(D);
    for (auto& t : x) t = static_cast<int>(rng.below(M));
    return x;
}

}  // namespace

double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

double arm_gradient_error(const arm::ArmConfig& cfg, std::size_t batch, RngStream rng) {
    cfg.validate();
    auto p = scaled_params(cfg, rng.fork(0), 2.0);
    RngStream data = rng.fork(1);
    TokenDataset ds(cfg.K, cfg.D);
    for (std::size_t i = 0; i < batch; ++i) {
        const auto x = random_tokens(cfg.D, cfg.M, data);
        ds.push_back(x, SourceLabel(static_cast<int>(1 + data.below(cfg.K))));
    }
    const auto g = arm::grad_nll(p, ds);
    const auto gb = g.blocks();
    auto pb = p.blocks();
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (std::size_t b = 0; b < pb.size(); ++b) {
        for (std::size_t i = 0; i < pb[b].size(); ++i) {
            const double saved = pb[b][i];
            pb[b][i] = saved + h;
            const double up = arm::mean_nll(p, ds);
            pb[b][i] = saved - h;
            const double down = arm::mean_nll(p, ds);
            pb[b][i] = saved;
            worst = std::max(worst, relative_error(gb[b][i], (up - down) / (2.0 * h)));
        }
    }
    return worst;
}

std::size_t arm_masking_violations(const arm::ForwardFn& fwd, const arm::ArmConfig& base, std::size_t trials,
                                   RngStream rng) {
    std::size_t violations = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream r = rng.fork(t);
        arm::ArmConfig cfg = base;
        if (cfg.D == 0) cfg = small_config(r);
        const auto p = scaled_params(cfg, r.fork(0), 1.5);
        RngStream tok = r.fork(1);
        const auto x = random_tokens(cfg.D, cfg.M, tok);
        const SourceLabel y(static_cast<int>(1 + tok.below(cfg.K)));
        for (std::size_t pos = 1; pos <= cfg.D; ++pos) {
            const auto ref = fwd(p, x, y, pos);
            // Change every token at position >= pos, one at a time and all together.
            for (std::size_t j = pos - 1; j <= cfg.D; ++j) {
                auto xp = x;
                if (j < cfg.D) {
                    xp[j] = static_cast<int>((static_cast<std::size_t>(xp[j]) + 1 + tok.below(cfg.M - 1)) % cfg.M);
                } else {
                    for (std::size_t q = pos - 1; q < cfg.D; ++q)
                        xp[q] = static_cast<int>((static_cast<std::size_t>(xp[q]) + 1) % cfg.M);
                }
                if (fwd(p, xp, y, pos) != ref) {
                    ++violations;
                    break;
                }
            }
        }
    }
    return violations;
}

double arm_normalization_error(const arm::ForwardFn& fwd, const arm::ArmConfig& cfg, std::size_t draws,
                               RngStream rng) {
    cfg.validate();
    std::vector<double> err(draws, 0.0);
    parallel_for(draws, [&](std::size_t t) {
        RngStream r = rng.fork(t);
        const auto p = scaled_params(cfg, r.fork(0), 1.5);
        const SourceLabel y(static_cast<int>(1 + r.fork(1).below(cfg.K)));
        const auto probs = arm::enumerate_distribution(fwd, p, y);
        double s = 0.0;
        for (double v : probs) s += v;
        err[t] = std::isfinite(s) ? std::abs(s - 1.0) : INFINITY;
    });
    return draws == 0 ? 0.0 : *std::max_element(err.begin(), err.end());
}

GaussianBracketSweep gaussian_bracket_sweep(std::size_t configs, std::size_t probes, RngStream rng) {
    struct One {
        bracketing::BracketReport rep;
        std::string label;
    };
    std::vector<One> out(configs);
    parallel_for(configs, [&](std::size_t c) {
        RngStream r = rng.fork(c);
        const std::size_t K = 1 + r.below(15);
        const std::size_t d = 1 + r.below(10);
        const std::size_t d1 = r.below(d + 1);
        const double B = 1.0 + static_cast<double>(r.below(5));
        const double eps = kGaussianBracketEps[c % kGaussianBracketEps.size()];
        const auto mode = r.uniform() < 0.5 ? gaussian::Mode::multi_estimate : gaussian::Mode::single_estimate;
        const auto target = bracketing::random_target(K, d, d1, B, mode, r);
        const auto elem = bracketing::gaussian_bracket_cover(target, B, eps);
        out[c].rep = bracketing::gaussian_bracket_verify(elem, target, probes, r.fork(7));
        out[c].label = fmt::format("K={} d={} d1={} B={} eps={} {}", K, d, d1, B, eps,
                                   mode == gaussian::Mode::multi_estimate ? "multi" : "single");
    });
    GaussianBracketSweep s;
    for (const auto& o : out) {
        ++s.configs;
        s.probes += o.rep.probes;
        s.dominance_violations += o.rep.dominance_violations;
        const double ratio = o.rep.exact_l1_gap / o.rep.epsilon;
        if (o.rep.exact_l1_gap > o.rep.epsilon) ++s.gap_exceeded;
        if (ratio > s.worst_gap_ratio) {
            s.worst_gap_ratio = ratio;
            s.worst_case = o.label;
        }
    }
    return s;
}

CountSweep gaussian_count_sweep(std::size_t configs, RngStream rng) {
    static constexpr double kB[] = {0.5, 1.0, 1.5, 2.0, 0.7};
    static constexpr double kEps[] = {1.0, 0.5, 0.25, 0.3};
    CountSweep s;
    for (std::size_t c = 0; c < configs; ++c) {
        RngStream r = rng.fork(c);
        const std::size_t K = 1 + r.below(3);
        const std::size_t d = 1 + r.below(2);
        const std::size_t d1 = r.below(d + 1);
        const double B = kB[r.below(std::size(kB))];
        const double eps = kEps[r.below(std::size(kEps))];
        const auto strategy = r.uniform() < 0.5 ? bounds::Strategy::multi : bounds::Strategy::single;
        const auto count = bracketing::gaussian_bracket_count(K, d, d1, B, eps, strategy);
        bounds::GaussianBoundParams bp;
        bp.n = 1;
        bp.K = K;
        bp.d = d;
        bp.d1 = d1;
        bp.B = B;
        bp.epsilon = eps;
        const double bound = bounds::gaussian_log_bracketing(bp, strategy);
        ++s.configs;
        if (count.log_count > bound + 1e-12 * std::max(1.0, bound)) ++s.above_bound;
        const double eta = eps / (1.0 + static_cast<double>(d));
        const double ratio = B / eta;
        if (std::abs(ratio - std::round(ratio)) < 1e-9) {
            ++s.equality_checked;
            if (std::abs(count.log_count - bound) > 1e-12 * std::max(1.0, bound)) ++s.equality_failed;
        }
    }
    return s;
}

EbmSweep ebm_bracket_sweep(std::size_t energies, RngStream rng) {
    static constexpr double kEpsU[] = {0.01, 0.1, 0.25};
    std::vector<bracketing::BracketReport> reps(energies);
    parallel_for(energies, [&](std::size_t i) {
        RngStream r = rng.fork(i);
        const std::size_t knots = 2 + r.below(15);
        const auto u = bracketing::EnergyGrid1D::piecewise_linear(bracketing::kMinEnergyNodes, knots, -3.0, 3.0,
                                                                  r.fork(0));
        reps[i] = bracketing::ebm_bracket_verify_1d(u, kEpsU[i % std::size(kEpsU)], r.fork(1));
    });
    EbmSweep s;
    for (const auto& rep : reps) {
        ++s.energies;
        s.dominance_violations += rep.dominance_violations;
        if (rep.exact_l1_gap > rep.epsilon) ++s.gap_exceeded;
        s.worst_gap_ratio = std::max(s.worst_gap_ratio, rep.exact_l1_gap / rep.epsilon);
    }
    return s;
}

double mlp_lemma_sweep(bracketing::LemmaKind kind, std::size_t configs, std::size_t trials, RngStream rng) {
    std::vector<double> worst(configs, 0.0);
    parallel_for(configs, [&](std::size_t c) {
        RngStream r = rng.fork(c);
        const std::size_t L = 1 + r.below(4);
        const std::size_t W = 1 + r.below(16);
        const double B = r.uniform(0.05, 3.0);
        worst[c] = bracketing::mlp_lemma_check(kind, L, W, B, trials, r.fork(1));
    });
    return configs == 0 ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

std::size_t ordering_violations(bounds::Instantiation inst, std::size_t tuples, RngStream rng) {
    using bounds::Strategy;
    std::size_t bad = 0;
    auto judge = [&](double multi, double single, bool equal_expected) {
        if (equal_expected ? multi != single : !(multi < single)) ++bad;
    };
    for (std::size_t t = 0; t < tuples; ++t) {
        RngStream r = rng.fork(t);
        const auto n = static_cast<std::uint64_t>(std::exp(r.uniform(std::log(10.0), std::log(1e9))));
        const std::size_t K = r.uniform() < 0.1 ? 1 : 1 + r.below(30);
        const double B = std::exp(r.uniform(std::log(0.1), std::log(10.0)));
        const double delta = r.uniform(0.001, 0.5);
        switch (inst) {
            case bounds::Instantiation::gaussian: {
                bounds::GaussianBoundParams p;
                p.n = n;
                p.K = K;
                p.d = 1 + r.below(100);
                p.d1 = r.uniform() < 0.1 ? p.d : r.below(p.d + 1);
                p.B = B;
                p.delta = delta;
                judge(bounds::gaussian_log_bracketing(p, Strategy::multi),
                      bounds::gaussian_log_bracketing(p, Strategy::single), K == 1 || p.d1 == p.d);
                break;
            }
            case bounds::Instantiation::arm: {
                bounds::ArmBoundParams p;
                p.n = n;
                p.K = K;
                p.D = 1 + r.below(64);
                p.M = 2 + r.below(30);
                p.de = 1 + r.below(128);
                p.L = 1 + r.below(8);
                p.W = 1 + r.below(256);
                p.S = std::floor(std::exp(r.uniform(0.0, std::log(1e7))));
                p.B = B;
                p.delta = delta;
                judge(bounds::arm_log_bracketing(p, Strategy::multi), bounds::arm_log_bracketing(p, Strategy::single),
                      K == 1);
                break;
            }
            case bounds::Instantiation::ebm: {
                bounds::EbmBoundParams p;
                p.n = n;
                p.K = K;
                p.de = 1 + r.below(128);
                p.L = 1 + r.below(8);
                p.W = 1 + r.below(256);
                p.S = std::floor(std::exp(r.uniform(0.0, std::log(1e7))));
                p.B = B;
                p.delta = delta;
                judge(bounds::ebm_log_bracketing(p, Strategy::multi), bounds::ebm_log_bracketing(p, Strategy::single),
                      K == 1);
                break;
            }
        }
    }
    return bad;
}

}  // namespace msgm::checks
