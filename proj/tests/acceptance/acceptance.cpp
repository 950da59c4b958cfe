// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
#include <fmt/core.h>

#include <CLI11.hpp>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "msgm/arm.hpp"
#include "msgm/bounds.hpp"
#include "msgm/bracketing.hpp"
#include "msgm/checks.hpp"
#include "msgm/experiments.hpp"
#include "msgm/gaussian.hpp"
#include "msgm/rng.hpp"
#include "msgm/stats.hpp"

using namespace msgm;
using bounds::Strategy;
using experiments::Axis;
using experiments::Estimator;
using experiments::Experiment;
using experiments::SweepConfig;
using experiments::SweepRow;

namespace {

constexpr std::uint64_t kSeed = 31337;

struct Outcome {
    bool passed;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<Outcome()> run;
};

struct Paths {
    std::string msgm;
    std::filesystem::path work;
};

SweepConfig gaussian_panel(Axis axis, std::vector<double> values, std::size_t seeds, std::uint64_t master) {
    SweepConfig c;
    c.experiment = Experiment::gaussian;
    c.axis = axis;
    c.axis_values = std::move(values);
    c.fixed.d = 10;
    if (axis != Axis::n) c.fixed.n = 500;
    if (axis != Axis::K) c.fixed.K = 5;
    if (axis != Axis::beta_sim) c.fixed.beta_sim = 0.5;
    c.seeds = seeds;
    c.master_seed = master;
    c.estimators = {Estimator::exact};
    c.emit_theory = false;
    return c;
}

// Mean TV per (axis value, strategy); rows come out in axis order.
std::vector<double> means(const std::vector<SweepRow>& rows, Strategy s) {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.strategy == s) out.push_back(r.mean_tv);
    return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return ols_slope(lx, ly);
}

Outcome c1_n_scaling() {
    const std::vector<double> ns{100, 300, 500, 1000, 5000};
    const auto rows = experiments::run_gaussian_sweep(gaussian_panel(Axis::n, ns, 5, kSeed + 1));
    const double sm = log_log_slope(ns, means(rows, Strategy::multi));
    const double ss = log_log_slope(ns, means(rows, Strategy::single));
    const auto in = [](double s) { return s >= -0.6 && s <= -0.4; };
    return {in(sm) && in(ss), fmt::format("slope multi {:.4f}, single {:.4f}; required in [-0.6, -0.4]", sm, ss)};
}

Outcome c2_k_scaling() {
    const std::vector<double> ks{1, 3, 5, 10, 15};
    const auto rows = experiments::run_gaussian_sweep(gaussian_panel(Axis::K, ks, 5, kSeed + 2));
    const auto m = means(rows, Strategy::multi);
    const auto s = means(rows, Strategy::single);
    const double slope = log_log_slope(ks, s);
    bool ordered = true;
    std::string pairs;
    for (std::size_t i = 1; i < ks.size(); ++i) {
        ordered = ordered && m[i] < s[i];
        pairs += fmt::format(" K={}: {:.4f}<{:.4f}", ks[i], m[i], s[i]);
    }
    return {slope >= 0.35 && slope <= 0.65 && ordered,
            fmt::format("single slope {:.4f} (need [0.35, 0.65]);{}", slope, pairs)};
}

Outcome c3_ratio_law() {
    const std::vector<double> betas{0.3, 0.5, 0.7, 1.0};
    const auto rows = experiments::run_gaussian_sweep(gaussian_panel(Axis::beta_sim, betas, 20, kSeed + 3));
    const auto m = means(rows, Strategy::multi);
    const auto s = means(rows, Strategy::single);
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double want = std::sqrt(1.0 - 0.8 * betas[i]);
        const double got = m[i] / s[i];
        ok = ok && std::abs(got - want) <= 0.08;
        detail += fmt::format("{}beta={}: {:.4f} vs {:.4f}", i ? ", " : "", betas[i], got, want);
    }
    return {ok, detail + " (tolerance 0.08)"};
}

Outcome c4_monte_carlo() {
    RngStream rng = RngStream(kSeed).fork(4);
    std::size_t pairs = 0, inside = 0, draws = 0;
    std::string detail;
    while (pairs < 10) {
        ++draws;
        const std::size_t K = 2 + rng.below(5);
        const std::size_t d = 2 + rng.below(7);
        const auto truth = gaussian::make_sim_family(K, d, rng.uniform());
        const double scale = rng.uniform(0.02, 0.6);
        std::vector<std::vector<double>> phi, psi;
        for (std::size_t k = 1; k <= K; ++k) {
            const SourceLabel y(static_cast<int>(k));
            phi.push_back(truth.phi(y));
            psi.push_back(truth.psi(y));
            for (auto& v : phi.back()) v += scale * rng.normal();
            for (auto& v : psi.back()) v += scale * rng.normal();
        }
        const auto est = gaussian::GaussianFamily::single_estimate(d, phi, psi);
        const auto w = SourceWeights::uniform(K);
        const double exact = gaussian::avg_tv_exact(est, truth, w);
        if (exact < 0.05 || exact > 0.5) continue;
        const auto mc = gaussian::tv_monte_carlo_detail(est, truth, w, 200000, rng.fork(1000 + pairs));
        const double z = (mc.estimate - exact) / mc.std_error;
        if (std::abs(z) <= 3.0) ++inside;
        detail += fmt::format("{}{:+.2f}", pairs ? " " : "", z);
        ++pairs;
    }
    return {inside >= 9, fmt::format("{} of 10 within 3 SE (need >= 9); z = {}", inside, detail)};
}

Outcome c5_bracket() {
    const auto sweep = checks::gaussian_bracket_sweep(100, 10000, RngStream(kSeed).fork(5));
    const auto c81 = bracketing::gaussian_bracket_count(2, 1, 1, 1.0, 0.5, Strategy::multi);
    const double count = std::exp(c81.log_count);
    const auto counts = checks::gaussian_count_sweep(50, RngStream(kSeed).fork(6));
    const bool ok = sweep.dominance_violations == 0 && sweep.gap_exceeded == 0 && std::round(count) == 81.0 &&
                    !c81.estimated && counts.above_bound == 0;
    std::string detail = fmt::format(
        "{} dominance violations over {} probes; {} of {} configs with gap > eps (worst gap/eps {:.4f}: {}); "
        "count {:.0f} (need 81); {} of {} small configs above bound",
        sweep.dominance_violations, sweep.probes, sweep.gap_exceeded, sweep.configs, sweep.worst_gap_ratio,
        sweep.worst_case, count, counts.above_bound, counts.configs);
    return {ok, detail};
}

Outcome c6_ebm() {
    const auto s = checks::ebm_bracket_sweep(100, RngStream(kSeed).fork(7));
    return {s.dominance_violations == 0 && s.gap_exceeded == 0,
            fmt::format("{} energies: {} dominance violations, {} gaps over bound, worst gap/bound {:.4f}", s.energies,
                        s.dominance_violations, s.gap_exceeded, s.worst_gap_ratio)};
}

Outcome c7_lemmas() {
    using bracketing::LemmaKind;
    bool ok = true;
    std::string detail;
    const std::array kinds{std::pair{LemmaKind::input_lipschitz, "input Lipschitz"},
                           std::pair{LemmaKind::param_lipschitz, "parameter Lipschitz"},
                           std::pair{LemmaKind::output_supnorm, "output sup-norm"}};
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        // 100 networks x 100 draws = 1e4 trials per property.
        const double r = checks::mlp_lemma_sweep(kinds[i].first, 100, 100, RngStream(kSeed).fork({8, i}));
        ok = ok && r <= 1.0 + 1e-9;
        detail += fmt::format("{}{} {:.10f}", i ? ", " : "", kinds[i].second, r);
    }
    return {ok, "max observed/bound: " + detail + " (need <= 1 + 1e-9)"};
}

Outcome c8_ordering() {
    std::size_t violations = 0;
    for (auto inst : {bounds::Instantiation::gaussian, bounds::Instantiation::arm, bounds::Instantiation::ebm})
        violations += checks::ordering_violations(inst, 1000, RngStream(kSeed).fork({9, static_cast<std::uint64_t>(inst)}));
    const bounds::GaussianBoundParams p{.n = 500, .K = 5, .d = 10, .d1 = 5, .B = 5.0, .delta = 0.1, .epsilon = {}};
    const double multi = bounds::gaussian_bound(p, Strategy::multi).tv_bound;
    const double single = bounds::gaussian_bound(p, Strategy::single).tv_bound;
    // Hand-derived: 3 sqrt((30 ln 55001 + ln 10) / 500) and 3 sqrt((50 ln 55001 + ln 10) / 500).
    const double e_multi = 2.43630952886580981575, e_single = 3.14086652262630305887;
    const bool ok = violations == 0 && std::abs(multi - e_multi) <= 1e-6 && std::abs(single - e_single) <= 1e-6;
    return {ok, fmt::format("{} violations over 3 x 1000 tuples; multi {:.9f} (want {:.9f}), single {:.9f} (want {:.9f})",
                            violations, multi, e_multi, single, e_single)};
}

Outcome c9_gradient() {
    RngStream rng = RngStream(kSeed).fork(10);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const arm::ArmConfig cfg{.M = 2 + rng.below(3), .D = 2 + rng.below(4), .K = 1 + rng.below(3),
                                 .de = 2 + rng.below(4), .L = 1 + rng.below(3), .W = 2 + rng.below(6)};
        worst = std::max(worst, checks::arm_gradient_error(cfg, 8, rng.fork(100 + i)));
    }
    return {worst < 1e-4, fmt::format("max relative error {:.3e} over 10 instances (need < 1e-4)", worst)};
}

SweepConfig arm_config(Axis axis, std::vector<double> values, std::uint64_t master) {
    SweepConfig c;
    c.experiment = Experiment::arm;
    c.axis = axis;
    c.axis_values = std::move(values);
    auto& f = c.fixed;
    if (axis == Axis::K) f.n = 5000; else f.K = 3;
    f.M = 2;
    f.D = 8;
    f.de = 16;
    f.W = 16;
    f.L = 3;
    // Same optimiser settings for both strategies.
    f.lr = 0.2;
    f.batch = 100;
    f.iters = 20000;
    c.seeds = 3;
    c.master_seed = master;
    c.estimators = {Estimator::exact};
    c.emit_theory = false;
    return c;
}

Outcome c10_arm_trend() {
    const auto k_rows = experiments::run_arm_sweep(arm_config(Axis::K, {1, 3, 5}, kSeed + 11));
    const auto km = means(k_rows, Strategy::multi);
    const auto ks = means(k_rows, Strategy::single);
    const auto n_rows = experiments::run_arm_sweep(arm_config(Axis::n, {2000, 20000}, kSeed + 12));
    const auto nm = means(n_rows, Strategy::multi);
    const auto ns = means(n_rows, Strategy::single);
    const bool k_ok = km[1] <= ks[1] && km[2] <= ks[2];
    const bool n_ok = nm[1] < nm[0] && ns[1] < ns[0];
    return {k_ok && n_ok,
            fmt::format("multi/single K=1 {:.4f}/{:.4f}, K=3 {:.4f}/{:.4f}, K=5 {:.4f}/{:.4f}; "
                        "K=3 n=2000 -> 20000: multi {:.4f} -> {:.4f}, single {:.4f} -> {:.4f}",
                        km[0], ks[0], km[1], ks[1], km[2], ks[2], nm[0], nm[1], ns[0], ns[1])};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_command(const std::string& cmd, std::string* output = nullptr) {
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) throw std::runtime_error("cannot run " + cmd);
    std::array<char, 4096> buf{};
    std::string out;
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
    const int status = pclose(pipe);
    if (output) *output = out;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome c11_reproducibility(const Paths& paths) {
    std::filesystem::create_directories(paths.work);
    std::string selftest_out;
    const int rc = run_command(paths.msgm + " selftest", &selftest_out);
    std::string failed;
    std::istringstream lines(selftest_out);
    for (std::string line; std::getline(lines, line);)
        if (line.rfind("FAIL", 0) == 0) failed += "\n    " + line;

    const auto gaussian_cfg = gaussian_panel(Axis::K, {1, 3, 5, 10, 15}, 5, kSeed + 13);
    const auto arm_cfg = [] {
        auto c = arm_config(Axis::K, {1, 2}, kSeed + 14);
        c.fixed.n = 400;
        c.fixed.D = 5;
        c.fixed.de = c.fixed.W = 4;
        c.fixed.L = 2;
        c.fixed.iters = 300;
        c.fixed.batch = 32;
        return c;
    }();
    std::ofstream(paths.work / "gaussian.json") << gaussian_cfg.to_json();
    std::ofstream(paths.work / "arm.json") << arm_cfg.to_json();
    bool identical = true;
    for (const auto& [cmd, name] : {std::pair{"gaussian-sweep", "gaussian"}, std::pair{"arm-sweep", "arm"}}) {
        std::array<std::string, 2> text;
        for (int r = 0; r < 2; ++r) {
            const auto out = paths.work / fmt::format("{}_{}.csv", name, r);
            std::filesystem::remove(out);
            const int src = run_command(fmt::format("{} {} --config {} --out {}", paths.msgm, cmd,
                                                    (paths.work / (std::string(name) + ".json")).string(),
                                                    out.string()));
            if (src != 0) throw std::runtime_error(fmt::format("{} exited with {}", cmd, src));
            text[r] = slurp(out);
        }
        identical = identical && !text[0].empty() && text[0] == text[1];
    }
    return {rc == 0 && identical, fmt::format("selftest exit {}; sweep CSVs byte-identical: {}{}", rc,
                                              identical ? "yes" : "no", failed)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"msgm acceptance run"};
    Paths paths;
    paths.work = std::filesystem::temp_directory_path() / "msgm_acceptance";
    std::vector<int> only;
    app.add_option("--msgm", paths.msgm, "path to the msgm executable")->required();
    app.add_option("--work", paths.work, "scratch directory");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "Gaussian n-scaling", 30, c1_n_scaling},
        {2, "Gaussian K-scaling", 30, c2_k_scaling},
        {3, "advantage-ratio law", 60, c3_ratio_law},
        {4, "Monte-Carlo estimator soundness", 60, c4_monte_carlo},
        {5, "Gaussian bracket soundness", 60, c5_bracket},
        {6, "EBM bracket soundness", 30, c6_ebm},
        {7, "MLP lemma universality", 60, c7_lemmas},
        {8, "bound ordering and hand-derived values", 5, c8_ordering},
        {9, "ARM gradient correctness", 30, c9_gradient},
        {10, "ARM multi-vs-single trend", 1200, c10_arm_trend},
        {11, "reproducibility gate", 300, [&] { return c11_reproducibility(paths); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool passed = o.passed && in_time;
        if (!passed) ++failures;
        fmt::print("{} criterion {}: {}  ({}) [{:.1f} s of {:.0f} s{}]\n", passed ? "PASS" : "FAIL", c.id, c.title,
                   o.detail, secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    fmt::print("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
