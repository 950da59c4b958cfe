#include "msgm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "msgm/arm.hpp"
#include "msgm/gaussian.hpp"
#include "msgm/parallel.hpp"
#include "msgm/rng.hpp"
#include "msgm/stats.hpp"
#include "msgm/types.hpp"

namespace msgm::experiments {

namespace {

using json = nlohmann::json;
using bounds::Strategy;

constexpr std::uint64_t kGaussianStream = 1;
constexpr std::uint64_t kArmStream = 2;
constexpr Strategy kStrategies[] = {Strategy::multi, Strategy::single};

template <typename T>
T read_field(const json& j, std::string_view name) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + std::string(name) + "': " + e.what());
    }
}

std::size_t read_count(const json& j, std::string_view name) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw ConfigError("field '" + std::string(name) + "' must be a nonnegative integer");
    }
    return j.get<std::size_t>();
}

double read_real(const json& j, std::string_view name) {
    if (!j.is_number()) throw ConfigError("field '" + std::string(name) + "' must be a number");
    return j.get<double>();
}

bool is_positive_integer(double v) { return v >= 1.0 && std::floor(v) == v && v < 9.0e15; }

std::size_t as_count(double v) { return static_cast<std::size_t>(v); }

// Parameter value for a cell: the axis value when the axis names it, else the fixed one.
template <typename T>
T param(const SweepConfig& cfg, Axis axis, const std::optional<T>& fixed, double axis_value) {
    if (cfg.axis == axis) return static_cast<T>(axis_value);
    return *fixed;
}

std::size_t d1_from_beta(std::size_t d, double beta) {
    return d - static_cast<std::size_t>(std::floor(beta * static_cast<double>(d)));
}

void require(bool present, const char* field, std::string_view experiment) {
    if (!present) throw ConfigError("fixed." + std::string(field) + " is required for " + std::string(experiment) + " sweeps");
}

void forbid(bool present, const char* field, std::string_view experiment) {
    if (present) throw ConfigError("fixed." + std::string(field) + " is not used by " + std::string(experiment) + " sweeps");
}

std::vector<SweepRow> aggregate(const SweepConfig& cfg, const std::vector<CellValue>& cells,
                                const std::vector<Estimator>& estimators,
                                double (*theory)(const SweepConfig&, double, Strategy)) {
    std::vector<SweepRow> rows;
    for (std::size_t a = 0; a < cfg.axis_values.size(); ++a) {
        for (const Estimator est : estimators) {
            for (const Strategy s : kStrategies) {
                std::vector<double> vals;
                for (const auto& c : cells) {
                    if (c.axis_index == a && c.strategy == s && c.estimator == est) vals.push_back(c.tv);
                }
                const auto ms = mean_and_std(vals);
                SweepRow row;
                row.axis = std::string(to_string(cfg.axis));
                row.axis_value = cfg.axis_values[a];
                row.strategy = s;
                row.estimator = est;
                row.mean_tv = ms.mean;
                row.std_tv = ms.std;
                row.n_runs = vals.size();
                if (cfg.emit_theory) row.theory_bound = theory(cfg, cfg.axis_values[a], s);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::string fmt6(double v) { return fmt::format("{:.6g}", v); }

}  // namespace

std::string_view version() { return "0.1.0"; }

std::string_view to_string(Experiment e) { return e == Experiment::gaussian ? "gaussian" : "arm"; }

std::string_view to_string(Axis a) {
    switch (a) {
        case Axis::K: return "K";
        case Axis::n: return "n";
        case Axis::beta_sim: return "beta_sim";
        case Axis::D: return "D";
    }
    return "?";
}

std::string_view to_string(Estimator e) { return e == Estimator::exact ? "exact" : "monte_carlo"; }

Axis parse_axis(std::string_view s) {
    if (s == "K") return Axis::K;
    if (s == "n") return Axis::n;
    if (s == "beta_sim") return Axis::beta_sim;
    if (s == "D") return Axis::D;
    throw ConfigError("unknown axis '" + std::string(s) + "'");
}

Estimator parse_estimator(std::string_view s) {
    if (s == "exact") return Estimator::exact;
    if (s == "monte_carlo") return Estimator::monte_carlo;
    throw ConfigError("unknown estimator '" + std::string(s) + "'");
}

SweepConfig SweepConfig::from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> top_keys{"experiment", "axis",  "axis_values", "fixed",      "seeds",
                                                   "master_seed", "delta", "emit_theory", "estimators"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(top_keys.begin(), top_keys.end(), key) == top_keys.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    for (const char* key : {"experiment", "axis", "axis_values", "fixed", "seeds", "master_seed"}) {
        if (!j.contains(key)) throw ConfigError(std::string("missing config key '") + key + "'");
    }
    SweepConfig cfg;
    const auto exp = read_field<std::string>(j["experiment"], "experiment");
    if (exp == "gaussian") {
        cfg.experiment = Experiment::gaussian;
    } else if (exp == "arm") {
        cfg.experiment = Experiment::arm;
        cfg.estimators = {Estimator::exact};
    } else {
        throw ConfigError("field 'experiment' must be \"gaussian\" or \"arm\"");
    }
    cfg.axis = parse_axis(read_field<std::string>(j["axis"], "axis"));
    if (!j["axis_values"].is_array()) throw ConfigError("field 'axis_values' must be an array");
    for (const auto& v : j["axis_values"]) cfg.axis_values.push_back(read_real(v, "axis_values"));
    cfg.seeds = read_count(j["seeds"], "seeds");
    if (!j["master_seed"].is_number_unsigned() && !(j["master_seed"].is_number_integer() && j["master_seed"].get<long long>() >= 0)) {
        throw ConfigError("field 'master_seed' must be a nonnegative integer");
    }
    cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("delta")) cfg.delta = read_real(j["delta"], "delta");
    if (j.contains("emit_theory")) {
        if (!j["emit_theory"].is_boolean()) throw ConfigError("field 'emit_theory' must be a boolean");
        cfg.emit_theory = j["emit_theory"].get<bool>();
    }
    if (j.contains("estimators")) {
        if (!j["estimators"].is_array()) throw ConfigError("field 'estimators' must be an array");
        cfg.estimators.clear();
        for (const auto& e : j["estimators"]) cfg.estimators.push_back(parse_estimator(read_field<std::string>(e, "estimators")));
    }

    const json& f = j["fixed"];
    if (!f.is_object()) throw ConfigError("field 'fixed' must be an object");
    auto& fx = cfg.fixed;
    for (const auto& [key, v] : f.items()) {
        const std::string name = "fixed." + key;
        if (key == "n") fx.n = read_count(v, name);
        else if (key == "K") fx.K = read_count(v, name);
        else if (key == "d") fx.d = read_count(v, name);
        else if (key == "beta_sim") fx.beta_sim = read_real(v, name);
        else if (key == "n_test") fx.n_test = read_count(v, name);
        else if (key == "M") fx.M = read_count(v, name);
        else if (key == "D") fx.D = read_count(v, name);
        else if (key == "de") fx.de = read_count(v, name);
        else if (key == "L") fx.L = read_count(v, name);
        else if (key == "W") fx.W = read_count(v, name);
        else if (key == "lr") fx.lr = read_real(v, name);
        else if (key == "batch") fx.batch = read_count(v, name);
        else if (key == "iters") fx.iters = read_count(v, name);
        else if (key == "concentration") fx.concentration = read_real(v, name);
        else if (key == "coupling") fx.coupling = read_real(v, name);
        else throw ConfigError("unknown config key 'fixed." + key + "'");
    }
    cfg.validate();
    return cfg;
}

SweepConfig SweepConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string SweepConfig::to_json() const {
    json j;
    j["experiment"] = std::string(experiments::to_string(experiment));
    j["axis"] = std::string(experiments::to_string(axis));
    j["axis_values"] = axis_values;
    json f = json::object();
    auto put = [&](const char* k, const auto& opt) {
        if (opt) f[k] = *opt;
    };
    put("n", fixed.n);
    put("K", fixed.K);
    put("d", fixed.d);
    put("beta_sim", fixed.beta_sim);
    put("n_test", fixed.n_test);
    put("M", fixed.M);
    put("D", fixed.D);
    put("de", fixed.de);
    put("L", fixed.L);
    put("W", fixed.W);
    put("lr", fixed.lr);
    put("batch", fixed.batch);
    put("iters", fixed.iters);
    put("concentration", fixed.concentration);
    put("coupling", fixed.coupling);
    j["fixed"] = f;
    j["seeds"] = seeds;
    j["master_seed"] = master_seed;
    j["delta"] = delta;
    j["emit_theory"] = emit_theory;
    json ests = json::array();
    for (auto e : estimators) ests.push_back(std::string(experiments::to_string(e)));
    j["estimators"] = ests;
    return j.dump();
}

void SweepConfig::validate() const {
    if (axis_values.empty()) throw ConfigError("axis_values must be nonempty");
    for (std::size_t i = 1; i < axis_values.size(); ++i) {
        if (!(axis_values[i] > axis_values[i - 1])) throw ConfigError("axis_values must be strictly increasing");
    }
    if (seeds < 1) throw ConfigError("seeds must be >= 1");
    if (!(delta > 0.0 && delta <= 0.5)) throw ConfigError("delta must lie in (0, 1/2]");
    if (estimators.empty()) throw ConfigError("estimators must be nonempty");
    for (std::size_t i = 0; i < estimators.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (estimators[i] == estimators[k]) throw ConfigError("estimators lists a value twice");
        }
    }
    for (double v : axis_values) {
        if (axis == Axis::beta_sim) {
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("beta_sim axis values must lie in [0, 1]");
        } else if (!is_positive_integer(v)) {
            throw ConfigError(std::string(to_string(axis)) + " axis values must be positive integers");
        }
    }
    const auto& f = fixed;
    const auto name = to_string(experiment);
    auto need = [&](bool present, Axis a, const char* field) {
        if (axis == a) {
            if (present) throw ConfigError(std::string("fixed.") + field + " conflicts with the sweep axis");
        } else {
            require(present, field, name);
        }
    };
    auto positive = [](const std::optional<std::size_t>& v, const char* field) {
        if (v && *v < 1) throw ConfigError(std::string("fixed.") + field + " must be >= 1");
    };
    if (experiment == Experiment::gaussian) {
        if (axis == Axis::D) throw ConfigError("gaussian sweeps support axes K, n, beta_sim");
        need(f.n.has_value(), Axis::n, "n");
        need(f.K.has_value(), Axis::K, "K");
        need(f.beta_sim.has_value(), Axis::beta_sim, "beta_sim");
        require(f.d.has_value(), "d", name);
        forbid(f.M.has_value(), "M", name);
        forbid(f.D.has_value(), "D", name);
        forbid(f.de.has_value(), "de", name);
        forbid(f.L.has_value(), "L", name);
        forbid(f.W.has_value(), "W", name);
        forbid(f.lr.has_value(), "lr", name);
        forbid(f.batch.has_value(), "batch", name);
        forbid(f.iters.has_value(), "iters", name);
        forbid(f.concentration.has_value(), "concentration", name);
        forbid(f.coupling.has_value(), "coupling", name);
        positive(f.K, "K");
        positive(f.d, "d");
        positive(f.n_test, "n_test");
        if (f.n && *f.n < 1) throw ConfigError("fixed.n must be >= 1");
        if (f.beta_sim && !(*f.beta_sim >= 0.0 && *f.beta_sim <= 1.0)) throw ConfigError("fixed.beta_sim must lie in [0, 1]");
    } else {
        if (axis == Axis::beta_sim) throw ConfigError("arm sweeps support axes K, n, D");
        need(f.n.has_value(), Axis::n, "n");
        need(f.K.has_value(), Axis::K, "K");
        need(f.D.has_value(), Axis::D, "D");
        for (auto [present, field] : {std::pair{f.M.has_value(), "M"}, {f.de.has_value(), "de"}, {f.L.has_value(), "L"},
                                      {f.W.has_value(), "W"}, {f.lr.has_value(), "lr"}, {f.batch.has_value(), "batch"},
                                      {f.iters.has_value(), "iters"}}) {
            require(present, field, name);
        }
        forbid(f.d.has_value(), "d", name);
        forbid(f.beta_sim.has_value(), "beta_sim", name);
        forbid(f.n_test.has_value(), "n_test", name);
        for (auto e : estimators) {
            if (e != Estimator::exact) throw ConfigError("arm sweeps support only the exact estimator");
        }
        positive(f.K, "K");
        positive(f.D, "D");
        positive(f.de, "de");
        positive(f.L, "L");
        positive(f.W, "W");
        positive(f.batch, "batch");
        if (f.n && *f.n < 1) throw ConfigError("fixed.n must be >= 1");
        if (*f.M < 2) throw ConfigError("fixed.M must be >= 2");
        if (!(*f.lr >= 0.0)) throw ConfigError("fixed.lr must be >= 0");
        if (f.concentration && !(*f.concentration > 0.0)) throw ConfigError("fixed.concentration must be positive");
        if (f.coupling && !(*f.coupling >= 0.0 && *f.coupling <= 1.0)) throw ConfigError("fixed.coupling must lie in [0, 1]");
        const auto check_support = [&](std::size_t D) {
            try {
                (void)arm::ArmConfig{.M = *f.M, .D = D}.support_size();
            } catch (const std::length_error&) {
                throw ConfigError("M^D = " + std::to_string(*f.M) + "^" + std::to_string(D) +
                                  " exceeds the enumeration guard of 2^21");
            }
        };
        if (axis == Axis::D) {
            for (double v : axis_values) check_support(as_count(v));
        } else {
            check_support(*f.D);
        }
    }
}

double gaussian_theory(const SweepConfig& cfg, double axis_value, Strategy s) {
    const auto K = param<std::size_t>(cfg, Axis::K, cfg.fixed.K, axis_value);
    const auto n = param<std::uint64_t>(cfg, Axis::n, cfg.fixed.n, axis_value);
    const double beta = param<double>(cfg, Axis::beta_sim, cfg.fixed.beta_sim, axis_value);
    const std::size_t d = *cfg.fixed.d;
    bounds::GaussianBoundParams p{.n = n, .K = K, .d = d, .d1 = d1_from_beta(d, beta),
                                  .B = static_cast<double>(K), .delta = cfg.delta, .epsilon = {}};
    return bounds::gaussian_bound(p, s).tv_bound;
}

double arm_theory(const SweepConfig& cfg, double axis_value, Strategy s) {
    const auto& f = cfg.fixed;
    const auto K = param<std::size_t>(cfg, Axis::K, f.K, axis_value);
    const auto n = param<std::uint64_t>(cfg, Axis::n, f.n, axis_value);
    const auto D = param<std::size_t>(cfg, Axis::D, f.D, axis_value);
    const arm::ArmConfig ac{.M = *f.M, .D = D, .K = K, .de = *f.de, .L = *f.L, .W = *f.W};
    bounds::ArmBoundParams p{.n = n, .K = K, .D = D, .M = *f.M, .de = *f.de, .L = *f.L, .W = *f.W,
                             .S = static_cast<double>(ac.mlp_parameter_count()), .B = 1.0, .delta = cfg.delta, .epsilon = {}};
    return bounds::arm_bound(p, s).tv_bound;
}

SweepResult run_gaussian_sweep_detailed(const SweepConfig& cfg) {
    cfg.validate();
    if (cfg.experiment != Experiment::gaussian) throw ConfigError("not a gaussian sweep config");
    const std::size_t n_cells = cfg.axis_values.size() * cfg.seeds;
    const std::size_t n_test = cfg.fixed.n_test.value_or(500);
    std::vector<std::vector<CellValue>> per_cell(n_cells);
    parallel_for(n_cells, [&](std::size_t c) {
        const std::size_t a = c / cfg.seeds, s = c % cfg.seeds;
        const double av = cfg.axis_values[a];
        const auto K = param<std::size_t>(cfg, Axis::K, cfg.fixed.K, av);
        const auto n = param<std::uint64_t>(cfg, Axis::n, cfg.fixed.n, av);
        const double beta = param<double>(cfg, Axis::beta_sim, cfg.fixed.beta_sim, av);
        const RngStream rng(cfg.master_seed, {kGaussianStream, a, s});
        const auto truth = gaussian::make_sim_family(K, *cfg.fixed.d, beta);
        const auto w = SourceWeights::uniform(K);
        const auto ds = gaussian::sample_dataset(truth, w, n, rng.fork(0));
        for (const Strategy st : kStrategies) {
            const auto est = st == Strategy::multi ? gaussian::fit_multi(ds, truth.d1()) : gaussian::fit_single(ds, truth.d1());
            for (const Estimator e : cfg.estimators) {
                const double tv = e == Estimator::exact ? gaussian::avg_tv_exact(est, truth, w)
                                                        : gaussian::tv_monte_carlo(est, truth, w, n_test, rng.fork(1));
                per_cell[c].push_back({a, s, st, e, tv});
            }
        }
    });
    SweepResult res;
    for (auto& v : per_cell) res.cells.insert(res.cells.end(), v.begin(), v.end());
    res.rows = aggregate(cfg, res.cells, cfg.estimators, &gaussian_theory);
    return res;
}

std::vector<SweepRow> run_gaussian_sweep(const SweepConfig& cfg) { return run_gaussian_sweep_detailed(cfg).rows; }

SweepResult run_arm_sweep_detailed(const SweepConfig& cfg) {
    cfg.validate();
    if (cfg.experiment != Experiment::arm) throw ConfigError("not an arm sweep config");
    const auto& f = cfg.fixed;
    const std::size_t n_cells = cfg.axis_values.size() * cfg.seeds;
    // One job per trained model: index 0 is the multi-source model, k >= 1 the single-source model of source k.
    struct Job {
        std::size_t cell;
        std::size_t model;
    };
    std::vector<Job> jobs;
    std::vector<std::size_t> cell_K(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
        cell_K[c] = param<std::size_t>(cfg, Axis::K, f.K, cfg.axis_values[c / cfg.seeds]);
        for (std::size_t m = 0; m <= cell_K[c]; ++m) jobs.push_back({c, m});
    }
    std::vector<std::vector<arm::ArmParams>> models(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) models[c].resize(cell_K[c] + 1);

    auto cell_setup = [&](std::size_t c) {
        const std::size_t a = c / cfg.seeds, s = c % cfg.seeds;
        const double av = cfg.axis_values[a];
        const arm::ArmConfig ac{.M = *f.M,
                                .D = param<std::size_t>(cfg, Axis::D, f.D, av),
                                .K = cell_K[c],
                                .de = *f.de,
                                .L = *f.L,
                                .W = *f.W};
        const RngStream rng(cfg.master_seed, {kArmStream, a, s});
        auto truths = arm::make_truth_tables(ac.K, ac.M, ac.D, f.concentration.value_or(1.0), rng.fork(0),
                                             f.coupling.value_or(0.0));
        return std::tuple{ac, rng, std::move(truths)};
    };

    parallel_for(jobs.size(), [&](std::size_t j) {
        const auto [c, m] = jobs[j];
        const auto [ac, rng, truths] = cell_setup(c);
        const auto n = param<std::uint64_t>(cfg, Axis::n, f.n, cfg.axis_values[c / cfg.seeds]);
        const auto w = SourceWeights::uniform(ac.K);
        const auto ds = arm::sample_sequences(truths, w, n, rng.fork(1));
        const arm::TrainOptions opt{.lr = *f.lr, .batch_size = *f.batch, .iters = *f.iters};
        if (m == 0) {
            models[c][0] = arm::train(arm::init_params(ac, rng.fork(2)), ds, opt, rng.fork(3)).params;
        } else {
            const SourceLabel y(static_cast<int>(m));
            if (ds.count(y) == 0) {
                throw std::runtime_error("source " + std::to_string(m) + " has no samples; single-source training is undefined");
            }
            models[c][m] = arm::train(arm::init_params(ac, rng.fork({4, m})), select_source(ds, y), opt,
                                      rng.fork({5, m}))
                               .params;
        }
    });

    std::vector<std::vector<CellValue>> per_cell(n_cells);
    parallel_for(n_cells, [&](std::size_t c) {
        const auto [ac, rng, truths] = cell_setup(c);
        const auto w = SourceWeights::uniform(ac.K);
        const std::size_t a = c / cfg.seeds, s = c % cfg.seeds;
        const std::span<const arm::ArmParams> all(models[c]);
        per_cell[c].push_back({a, s, Strategy::multi, Estimator::exact, arm::exact_avg_tv(all.first(1), truths, w)});
        per_cell[c].push_back({a, s, Strategy::single, Estimator::exact, arm::exact_avg_tv(all.subspan(1), truths, w)});
    });
    SweepResult res;
    for (auto& v : per_cell) res.cells.insert(res.cells.end(), v.begin(), v.end());
    res.rows = aggregate(cfg, res.cells, {Estimator::exact}, &arm_theory);
    return res;
}

std::vector<SweepRow> run_arm_sweep(const SweepConfig& cfg) { return run_arm_sweep_detailed(cfg).rows; }

std::string provenance_line(const SweepConfig& cfg) {
    return fmt::format("# msgm {} config={}", version(), cfg.to_json());
}

std::string format_csv(const std::vector<SweepRow>& rows, const std::optional<std::string>& provenance) {
    std::string out;
    if (provenance) out += *provenance + "\n";
    out += kCsvHeader;
    out += "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.axis, fmt6(r.axis_value), bounds::to_string(r.strategy),
                           to_string(r.estimator), fmt6(r.mean_tv), fmt6(r.std_tv), r.n_runs,
                           r.theory_bound ? fmt6(*r.theory_bound) : std::string());
    }
    return out;
}

void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path,
              const std::optional<std::string>& provenance) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << format_csv(rows, provenance);
    if (!out.flush()) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<SweepRow> parse_csv(std::string_view text) {
    std::vector<SweepRow> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    bool header_seen = false;
    auto number = [](const std::string& s) {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
        return v;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kCsvHeader) throw std::invalid_argument("unexpected CSV header: " + line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
            f.push_back(line.substr(start, pos - start));
        }
        f.push_back(line.substr(start));
        if (f.size() != 8) throw std::invalid_argument("CSV row needs 8 fields: " + line);
        SweepRow r;
        r.axis = f[0];
        r.axis_value = number(f[1]);
        r.strategy = bounds::parse_strategy(f[2]);
        r.estimator = parse_estimator(f[3]);
        r.mean_tv = number(f[4]);
        r.std_tv = number(f[5]);
        r.n_runs = static_cast<std::size_t>(std::stoull(f[6]));
        if (!f[7].empty()) r.theory_bound = number(f[7]);
        rows.push_back(std::move(r));
    }
    if (!header_seen) throw std::invalid_argument("CSV has no header");
    return rows;
}

}  // namespace msgm::experiments
