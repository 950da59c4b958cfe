#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace msgm::bounds {

enum class Strategy { multi, single };
enum class Instantiation { gaussian, arm, ebm };

Strategy parse_strategy(std::string_view s);
std::string_view to_string(Strategy s);
Instantiation parse_instantiation(std::string_view s);
std::string_view to_string(Instantiation i);

struct GaussianBoundParams {
    std::uint64_t n = 1;
    std::size_t K = 1;
    std::size_t d = 1;
    std::size_t d1 = 0;
    double B = 1.0;
    double delta = 0.1;
    std::optional<double> epsilon;  // defaults to 1/n

    void validate() const;
    [[nodiscard]] double eps() const { return epsilon.value_or(1.0 / static_cast<double>(n)); }
};

struct ArmBoundParams {
    std::uint64_t n = 1;
    std::size_t K = 1;
    std::size_t D = 1;
    std::size_t M = 2;
    std::size_t de = 1;
    std::size_t L = 1;
    std::size_t W = 1;
    double S = 1.0;
    double B = 1.0;
    double delta = 0.1;
    std::optional<double> epsilon;

    void validate() const;
    [[nodiscard]] double eps() const { return epsilon.value_or(1.0 / static_cast<double>(n)); }
};

struct EbmBoundParams {
    std::uint64_t n = 1;
    std::size_t K = 1;
    std::size_t de = 1;
    std::size_t L = 1;
    std::size_t W = 1;
    double S = 1.0;
    double B = 1.0;
    double delta = 0.1;
    std::optional<double> epsilon;

    void validate() const;
    [[nodiscard]] double eps() const { return epsilon.value_or(1.0 / static_cast<double>(n)); }
};

struct BoundValue {
    double log_bracketing;
    double tv_bound;
};

// 3 sqrt((log_N + log(1/delta)) / n)
double generic_mle_bound(double log_N, std::uint64_t n, double delta);

// Constant-free exponents of the bracketing numbers.
double gaussian_exponent(std::size_t K, std::size_t d, std::size_t d1, Strategy s);
double arm_exponent(const ArmBoundParams& p, Strategy s);
double ebm_exponent(const EbmBoundParams& p, Strategy s);

double gaussian_log_bracketing(const GaussianBoundParams& p, Strategy s);
double arm_log_bracketing(const ArmBoundParams& p, Strategy s);
double ebm_log_bracketing(const EbmBoundParams& p, Strategy s);

// Explicit bounds at epsilon = 1/n; a different epsilon is rejected.
BoundValue gaussian_bound(const GaussianBoundParams& p, Strategy s);
BoundValue arm_bound(const ArmBoundParams& p, Strategy s);
BoundValue ebm_bound(const EbmBoundParams& p, Strategy s);

// S log(2B/delta + 1) with delta = eps / (L (B v 1)^(L-1) (W+1)^L).
double mlp_log_covering(double eps, std::size_t L, std::size_t W, double S, double B);
// B^L W^L
double mlp_lipschitz_const(std::size_t L, std::size_t W, double B);

double beta_sim(const GaussianBoundParams& p);
double beta_sim(const ArmBoundParams& p);
double beta_sim(const EbmBoundParams& p);

// sqrt(1 - (K-1)/K * beta)
double advantage_ratio(std::size_t K, double beta);

}  // namespace msgm::bounds
