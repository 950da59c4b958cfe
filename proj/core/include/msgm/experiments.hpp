#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msgm/bounds.hpp"

namespace msgm::experiments {

// Invalid configuration or CLI arguments (exit status 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { gaussian, arm };
enum class Axis { K, n, beta_sim, D };
enum class Estimator { exact, monte_carlo };

std::string_view to_string(Experiment e);
std::string_view to_string(Axis a);
std::string_view to_string(Estimator e);
Axis parse_axis(std::string_view s);
Estimator parse_estimator(std::string_view s);

struct FixedParams {
    std::optional<std::uint64_t> n;
    std::optional<std::size_t> K;
    std::optional<std::size_t> d;
    std::optional<double> beta_sim;
    std::optional<std::size_t> n_test;
    std::optional<std::size_t> M;
    std::optional<std::size_t> D;
    std::optional<std::size_t> de;
    std::optional<std::size_t> L;
    std::optional<std::size_t> W;
    std::optional<double> lr;
    std::optional<std::size_t> batch;
    std::optional<std::size_t> iters;
    std::optional<double> concentration;
    std::optional<double> coupling;
};

struct SweepConfig {
    Experiment experiment = Experiment::gaussian;
    Axis axis = Axis::K;
    std::vector<double> axis_values;
    FixedParams fixed;
    std::size_t seeds = 1;
    std::uint64_t master_seed = 0;
    double delta = 0.1;
    bool emit_theory = true;
    // Gaussian only; ARM sweeps always use the exact estimator.
    std::vector<Estimator> estimators{Estimator::monte_carlo, Estimator::exact};

    static SweepConfig from_json(std::string_view text);
    static SweepConfig from_file(const std::filesystem::path& path);
    [[nodiscard]] std::string to_json() const;
    // Throws ConfigError naming the offending field.
    void validate() const;
};

struct SweepRow {
    std::string axis;
    double axis_value = 0.0;
    bounds::Strategy strategy = bounds::Strategy::multi;
    Estimator estimator = Estimator::exact;
    double mean_tv = 0.0;
    double std_tv = 0.0;
    std::size_t n_runs = 0;
    std::optional<double> theory_bound;

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

// One (axis value, seed, strategy, estimator) measurement.
struct CellValue {
    std::size_t axis_index;
    std::size_t seed_index;
    bounds::Strategy strategy;
    Estimator estimator;
    double tv;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<CellValue> cells;
};

SweepResult run_gaussian_sweep_detailed(const SweepConfig& cfg);
std::vector<SweepRow> run_gaussian_sweep(const SweepConfig& cfg);
SweepResult run_arm_sweep_detailed(const SweepConfig& cfg);
std::vector<SweepRow> run_arm_sweep(const SweepConfig& cfg);

// Theory curve value for one row of a sweep.
double gaussian_theory(const SweepConfig& cfg, double axis_value, bounds::Strategy s);
double arm_theory(const SweepConfig& cfg, double axis_value, bounds::Strategy s);

inline constexpr std::string_view kCsvHeader = "axis,axis_value,strategy,estimator,mean_tv,std_tv,n_runs,theory_bound";

std::string format_csv(const std::vector<SweepRow>& rows, const std::optional<std::string>& provenance = {});
void emit_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path,
              const std::optional<std::string>& provenance = {});
std::vector<SweepRow> parse_csv(std::string_view text);
// "# msgm <version> config=<json>"
std::string provenance_line(const SweepConfig& cfg);

struct SvgStyle {
    std::optional<Estimator> estimator;  // defaults to monte_carlo when present
    int width = 720;
    int height = 440;
    std::string title;
};

std::string format_svg(const std::vector<SweepRow>& rows, const SvgStyle& style = {});
void emit_svg(const std::vector<SweepRow>& rows, const std::filesystem::path& path, const SvgStyle& style = {});

std::string_view version();

}  // namespace msgm::experiments
