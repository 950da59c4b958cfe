#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <type_traits>

#include <json.hpp>

#include "msgm/experiments.hpp"
#include "msgm/queries.hpp"

namespace msgm::queries {

namespace {

using json = nlohmann::json;
using experiments::ConfigError;

class ParamReader {
public:
    explicit ParamReader(const std::map<std::string, std::string>& p) : p_(p) {}

    template <typename U>
        requires std::is_unsigned_v<U>
    void count(const char* key, U& out) {
        integer(key, [&](unsigned long long v) { out = static_cast<U>(v); });
    }
    void real(const char* key, double& out) {
        if (auto it = take(key)) out = parse_real(key, **it);
    }
    void real(const char* key, std::optional<double>& out) {
        if (auto it = take(key)) out = parse_real(key, **it);
    }
    void finish() const {
        for (const auto& [k, _] : p_) {
            if (!used_.contains(k)) throw ConfigError("unknown parameter '" + k + "' for this instantiation");
        }
    }

private:
    std::optional<const std::string*> take(const char* key) {
        const auto it = p_.find(key);
        if (it == p_.end()) return std::nullopt;
        used_.insert({key, true});
        return &it->second;
    }
    template <typename F>
    void integer(const char* key, F&& set) {
        if (auto it = take(key)) {
            const std::string& s = **it;
            std::size_t used = 0;
            unsigned long long v = 0;
            try {
                if (!s.empty() && s.front() == '-') throw std::invalid_argument("negative");
                v = std::stoull(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != s.size()) throw ConfigError("parameter '" + std::string(key) + "' must be a nonnegative integer");
            set(v);
        }
    }
    static double parse_real(const char* key, const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw ConfigError("parameter '" + std::string(key) + "' must be a number");
        return v;
    }

    const std::map<std::string, std::string>& p_;
    std::map<std::string, bool> used_;
};

template <typename P>
json evaluate(const P& p, bounds::Strategy mode, double (*log_bracketing)(const P&, bounds::Strategy),
              bounds::BoundValue (*bound)(const P&, bounds::Strategy), double exponent) {
    json j;
    try {
        j["log_bracketing"] = log_bracketing(p, mode);
        const bool at_default = !p.epsilon || *p.epsilon == 1.0 / static_cast<double>(p.n);
        j["tv_bound"] = at_default ? json(bound(p, mode).tv_bound) : json(nullptr);
        j["exponent"] = exponent;
        j["beta_sim"] = bounds::beta_sim(p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return j;
}

}  // namespace

std::string bounds_json(bounds::Instantiation inst, bounds::Strategy mode,
                        const std::map<std::string, std::string>& params) {
    ParamReader r(params);
    json out;
    switch (inst) {
        case bounds::Instantiation::gaussian: {
            bounds::GaussianBoundParams p;
            r.count("n", p.n);
            r.count("K", p.K);
            r.count("d", p.d);
            r.count("d1", p.d1);
            r.real("B", p.B);
            r.real("delta", p.delta);
            r.real("epsilon", p.epsilon);
            r.finish();
            out = evaluate<bounds::GaussianBoundParams>(p, mode, &bounds::gaussian_log_bracketing, &bounds::gaussian_bound,
                                                        bounds::gaussian_exponent(p.K, p.d, p.d1, mode));
            break;
        }
        case bounds::Instantiation::arm: {
            bounds::ArmBoundParams p;
            r.count("n", p.n);
            r.count("K", p.K);
            r.count("D", p.D);
            r.count("M", p.M);
            r.count("de", p.de);
            r.count("L", p.L);
            r.count("W", p.W);
            r.real("S", p.S);
            r.real("B", p.B);
            r.real("delta", p.delta);
            r.real("epsilon", p.epsilon);
            r.finish();
            out = evaluate<bounds::ArmBoundParams>(p, mode, &bounds::arm_log_bracketing, &bounds::arm_bound,
                                                   bounds::arm_exponent(p, mode));
            break;
        }
        case bounds::Instantiation::ebm: {
            bounds::EbmBoundParams p;
            r.count("n", p.n);
            r.count("K", p.K);
            r.count("de", p.de);
            r.count("L", p.L);
            r.count("W", p.W);
            r.real("S", p.S);
            r.real("B", p.B);
            r.real("delta", p.delta);
            r.real("epsilon", p.epsilon);
            r.finish();
            out = evaluate<bounds::EbmBoundParams>(p, mode, &bounds::ebm_log_bracketing, &bounds::ebm_bound,
                                                   bounds::ebm_exponent(p, mode));
            break;
        }
    }
    json full;
    full["instantiation"] = std::string(bounds::to_string(inst));
    full["mode"] = std::string(bounds::to_string(mode));
    for (auto& [k, v] : out.items()) full[k] = v;
    return full.dump(2);
}

bracketing::BracketReport bracket_verify(std::string_view family, double epsilon, std::uint64_t seed) {
    RngStream rng(seed, {3});
    if (family == "gaussian") {
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("--epsilon must lie in (0, 1]");
        const std::size_t K = 1 + rng.below(15);
        const std::size_t d = 1 + rng.below(10);
        const std::size_t d1 = rng.below(d + 1);
        const double B = 1.0 + static_cast<double>(rng.below(5));
        const auto mode = rng.below(2) == 0 ? gaussian::Mode::truth : gaussian::Mode::single_estimate;
        const auto target = bracketing::random_target(K, d, d1, B, mode, rng);
        const auto elem = bracketing::gaussian_bracket_cover(target, B, epsilon);
        return bracketing::gaussian_bracket_verify(elem, target, 10000, rng.fork(1));
    }
    if (family == "ebm1d") {
        if (!(epsilon > 0.0)) throw ConfigError("--epsilon must be positive");
        const auto u = bracketing::EnergyGrid1D::piecewise_linear(bracketing::kMinEnergyNodes, 2 + rng.below(15), -3.0, 3.0,
                                                                  rng.fork(0));
        return bracketing::ebm_bracket_verify_1d(u, epsilon, rng.fork(1));
    }
    if (family == "constant") {
        if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("--epsilon must lie in (0, 1]");
        return bracketing::constant_bracket_verify(epsilon, 10000, rng.fork(1));
    }
    throw ConfigError("unknown bracket family '" + std::string(family) + "'");
}

std::string to_json(const bracketing::BracketReport& report, std::string_view family) {
    json j;
    j["family"] = std::string(family);
    j["dominance_violations"] = report.dominance_violations;
    j["probes"] = report.probes;
    j["exact_l1_gap"] = report.exact_l1_gap;
    j["epsilon"] = report.epsilon;
    j["log_cardinality"] = report.log_cardinality ? json(*report.log_cardinality) : json(nullptr);
    j["cardinality_estimated"] = report.cardinality_estimated;
    j["sound"] = report.sound();
    return j.dump(2);
}

}  // namespace msgm::queries
