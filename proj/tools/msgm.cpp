#include <cstdio>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "msgm/arm.hpp"
#include "msgm/experiments.hpp"
#include "msgm/queries.hpp"
#include "msgm/selftest.hpp"

namespace {

using msgm::experiments::ConfigError;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfig = 2;

msgm::experiments::SweepConfig load_sweep(const std::string& path, msgm::experiments::Experiment expected) {
    auto cfg = msgm::experiments::SweepConfig::from_file(path);
    if (cfg.experiment != expected) {
        throw ConfigError(fmt::format("config experiment is '{}' but this subcommand runs '{}'",
                                      msgm::experiments::to_string(cfg.experiment),
                                      msgm::experiments::to_string(expected)));
    }
    return cfg;
}

std::map<std::string, std::string> parse_params(const std::vector<std::string>& raw) {
    std::map<std::string, std::string> out;
    for (const auto& kv : raw) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
        if (!out.emplace(kv.substr(0, eq), kv.substr(eq + 1)).second)
            throw ConfigError("parameter '" + kv.substr(0, eq) + "' given twice");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-source vs single-source conditional MLE simulation lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(msgm::experiments::version()));

    std::string config, out, svg;
    auto* gs = app.add_subcommand("gaussian-sweep", "Run a Gaussian sweep and write CSV (and optionally SVG)");
    gs->add_option("--config", config, "Sweep configuration (JSON)")->required();
    gs->add_option("--out", out, "Output CSV path")->required();
    gs->add_option("--svg", svg, "Output SVG path");

    auto* as = app.add_subcommand("arm-sweep", "Run an autoregressive-model sweep and write CSV");
    as->add_option("--config", config, "Sweep configuration (JSON)")->required();
    as->add_option("--out", out, "Output CSV path")->required();

    std::string inst = "gaussian", mode = "multi";
    std::vector<std::string> params;
    auto* bd = app.add_subcommand("bounds", "Print the log-bracketing number and TV bound as JSON");
    bd->add_option("--instantiation", inst)->check(CLI::IsMember({"gaussian", "arm", "ebm"}));
    bd->add_option("--mode", mode)->check(CLI::IsMember({"multi", "single"}));
    bd->add_option("--param", params, "key=value (repeatable)");

    std::string family = "gaussian";
    double epsilon = 0.5;
    std::uint64_t seed = 0;
    auto* bv = app.add_subcommand("bracket-verify", "Build and check one bracket, print the report as JSON");
    bv->add_option("--family", family)->check(CLI::IsMember({"gaussian", "ebm1d", "constant"}));
    bv->add_option("--epsilon", epsilon);
    bv->add_option("--seed", seed);

    std::string fault = "none";
    bool extended = false;
    auto* st = app.add_subcommand("selftest", "Run every invariant check at fixed seeds");
    st->add_option("--fault", fault, "Inject a forward-pass fault (mutation check)")
        ->check(CLI::IsMember({"none", "softmax", "mask"}));
    st->add_flag("--extended", extended, "Include the long ARM statistical checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        namespace ex = msgm::experiments;
        if (*gs) {
            const auto cfg = load_sweep(config, ex::Experiment::gaussian);
            const auto rows = ex::run_gaussian_sweep(cfg);
            ex::emit_csv(rows, out, ex::provenance_line(cfg));
            if (!svg.empty()) ex::emit_svg(rows, svg);
            return kOk;
        }
        if (*as) {
            const auto cfg = load_sweep(config, ex::Experiment::arm);
            ex::emit_csv(ex::run_arm_sweep(cfg), out, ex::provenance_line(cfg));
            return kOk;
        }
        if (*bd) {
            fmt::print("{}\n", msgm::queries::bounds_json(msgm::bounds::parse_instantiation(inst),
                                                          msgm::bounds::parse_strategy(mode), parse_params(params)));
            return kOk;
        }
        if (*bv) {
            const auto rep = msgm::queries::bracket_verify(family, epsilon, seed);
            fmt::print("{}\n", msgm::queries::to_json(rep, family));
            return rep.sound() ? kOk : kFailed;
        }
        if (*st) {
            msgm::selftest::Options opt;
            opt.extended = extended;
            if (fault != "none") {
                const auto f = fault == "softmax" ? msgm::arm::testing::Fault::softmax_off_by_one
                                                  : msgm::arm::testing::Fault::mask_off_by_one;
                opt.forward = [f](const msgm::arm::ArmParams& p, std::span<const int> x, msgm::SourceLabel y,
                                  std::size_t pos) { return msgm::arm::testing::forward_position_with_fault(p, x, y, pos, f); };
            }
            opt.on_result = [](const msgm::selftest::PropertyResult& r) {
                fmt::print("{} {}: {}  ({})\n", r.passed ? "PASS" : "FAIL", r.module, r.name, r.detail);
                std::fflush(stdout);
            };
            std::size_t failed = 0;
            const auto results = msgm::selftest::run(opt);
            for (const auto& r : results) failed += r.passed ? 0 : 1;
            fmt::print("{} of {} properties passed\n", results.size() - failed, results.size());
            return failed == 0 ? kOk : kFailed;
        }
    } catch (const ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return kConfig;
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "invalid argument: {}\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kFailed;
    }
    return kOk;
}
