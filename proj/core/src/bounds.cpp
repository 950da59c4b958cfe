#include "msgm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace msgm::bounds {

namespace {

void check_common(std::uint64_t n, std::size_t K, double delta, double eps) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (!(delta > 0.0 && delta <= 0.5)) throw std::invalid_argument("delta must lie in (0, 1/2]");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
}

void check_network(std::size_t L, std::size_t W, double S, double B, std::size_t de) {
    if (L < 1 || W < 1) throw std::invalid_argument("L and W must be >= 1");
    if (!(S >= 1.0)) throw std::invalid_argument("S must be >= 1");
    if (!(B > 0.0)) throw std::invalid_argument("B must be positive");
    if (de < 1) throw std::invalid_argument("de must be >= 1");
}

void require_default_eps(const std::optional<double>& eps, std::uint64_t n) {
    if (eps && *eps != 1.0 / static_cast<double>(n)) {
        throw std::invalid_argument("explicit bounds are defined at epsilon = 1/n");
    }
}

double log_bvee1(double B) { return std::log(std::max(B, 1.0)); }

double dbl(std::size_t v) { return static_cast<double>(v); }

}  // namespace

Strategy parse_strategy(std::string_view s) {
    if (s == "multi") return Strategy::multi;
    if (s == "single") return Strategy::single;
    throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

std::string_view to_string(Strategy s) { return s == Strategy::multi ? "multi" : "single"; }

Instantiation parse_instantiation(std::string_view s) {
    if (s == "gaussian") return Instantiation::gaussian;
    if (s == "arm") return Instantiation::arm;
    if (s == "ebm") return Instantiation::ebm;
    throw std::invalid_argument("unknown instantiation '" + std::string(s) + "'");
}

std::string_view to_string(Instantiation i) {
    switch (i) {
        case Instantiation::gaussian: return "gaussian";
        case Instantiation::arm: return "arm";
        case Instantiation::ebm: return "ebm";
    }
    return "?";
}

void GaussianBoundParams::validate() const {
    check_common(n, K, delta, eps());
    if (d < 1) throw std::invalid_argument("d must be >= 1");
    if (d1 > d) throw std::invalid_argument("d1 must not exceed d");
    if (!(B > 0.0)) throw std::invalid_argument("B must be positive");
}

void ArmBoundParams::validate() const {
    check_common(n, K, delta, eps());
    check_network(L, W, S, B, de);
    if (D < 1) throw std::invalid_argument("D must be >= 1");
    if (M < 2) throw std::invalid_argument("M must be >= 2");
}

void EbmBoundParams::validate() const {
    check_common(n, K, delta, eps());
    check_network(L, W, S, B, de);
}

double generic_mle_bound(double log_N, std::uint64_t n, double delta) {
    if (!(delta > 0.0 && delta <= 0.5)) throw std::invalid_argument("delta must lie in (0, 1/2]");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(log_N >= 0.0)) throw std::invalid_argument("log_N must be >= 0");
    return 3.0 * std::sqrt((log_N + std::log(1.0 / delta)) / static_cast<double>(n));
}

double gaussian_exponent(std::size_t K, std::size_t d, std::size_t d1, Strategy s) {
    return s == Strategy::multi ? dbl(K - 1) * dbl(d1) + dbl(d) : dbl(K) * dbl(d);
}

double arm_exponent(const ArmBoundParams& p, Strategy s) {
    const double base = p.S + dbl(p.D);
    if (s == Strategy::multi) return base + dbl(p.D + p.M + p.K) * dbl(p.de);
    return dbl(p.K) * (base + dbl(p.D + p.M + 1) * dbl(p.de));
}

double ebm_exponent(const EbmBoundParams& p, Strategy s) {
    if (s == Strategy::multi) return p.S + dbl(p.K) * dbl(p.de);
    return dbl(p.K) * (p.S + dbl(p.de));
}

double gaussian_log_bracketing(const GaussianBoundParams& p, Strategy s) {
    p.validate();
    const double per_coord = std::log(2.0 * (1.0 + dbl(p.d)) * p.B / p.eps() + 1.0);
    return gaussian_exponent(p.K, p.d, p.d1, s) * per_coord;
}

double arm_log_bracketing(const ArmBoundParams& p, Strategy s) {
    p.validate();
    // log(3 (L+3) (B v 1)^(L+2) (W+1)^L * 8 e D / eps)
    const double per_param = std::log(3.0) + std::log(dbl(p.L) + 3.0) + dbl(p.L + 2) * log_bvee1(p.B) +
                             dbl(p.L) * std::log(dbl(p.W) + 1.0) + std::log(8.0 * std::numbers::e * dbl(p.D)) -
                             std::log(p.eps());
    return arm_exponent(p, s) * per_param;
}

double ebm_log_bracketing(const EbmBoundParams& p, Strategy s) {
    p.validate();
    // log(3 (L+1) (B v 1)^(L+1) (W+1)^L * 4 e / eps)
    const double per_param = std::log(3.0) + std::log(dbl(p.L) + 1.0) + dbl(p.L + 1) * log_bvee1(p.B) +
                             dbl(p.L) * std::log(dbl(p.W) + 1.0) + std::log(4.0 * std::numbers::e) -
                             std::log(p.eps());
    return ebm_exponent(p, s) * per_param;
}

BoundValue gaussian_bound(const GaussianBoundParams& p, Strategy s) {
    require_default_eps(p.epsilon, p.n);
    const double logN = gaussian_log_bracketing(p, s);
    return {logN, generic_mle_bound(logN, p.n, p.delta)};
}

BoundValue arm_bound(const ArmBoundParams& p, Strategy s) {
    require_default_eps(p.epsilon, p.n);
    const double logN = arm_log_bracketing(p, s);
    return {logN, generic_mle_bound(logN, p.n, p.delta)};
}

BoundValue ebm_bound(const EbmBoundParams& p, Strategy s) {
    require_default_eps(p.epsilon, p.n);
    const double logN = ebm_log_bracketing(p, s);
    return {logN, generic_mle_bound(logN, p.n, p.delta)};
}

double mlp_log_covering(double eps, std::size_t L, std::size_t W, double S, double B) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    check_network(L, W, S, B, 1);
    const double log_scale = std::log(dbl(L)) + dbl(L - 1) * log_bvee1(B) + dbl(L) * std::log(dbl(W) + 1.0);
    // log(2B/delta + 1) with delta = eps / scale, kept in log space
    const double t = std::log(2.0 * B) + log_scale - std::log(eps);
    return S * (t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)));
}

double mlp_lipschitz_const(std::size_t L, std::size_t W, double B) {
    if (L < 1 || W < 1) throw std::invalid_argument("L and W must be >= 1");
    if (!(B > 0.0)) throw std::invalid_argument("B must be positive");
    return std::pow(B * dbl(W), dbl(L));
}

double beta_sim(const GaussianBoundParams& p) {
    if (p.d == 0) throw std::invalid_argument("beta_sim needs d >= 1");
    if (p.d1 > p.d) throw std::invalid_argument("d1 must not exceed d");
    return dbl(p.d - p.d1) / dbl(p.d);
}

double beta_sim(const ArmBoundParams& p) {
    const double de = dbl(p.de);
    const double num = p.S + dbl(p.D) + dbl(p.D + p.M) * de;
    const double den = p.S + dbl(p.D) + dbl(p.D + p.M + p.K) * de + de;
    if (!(den > 0.0)) throw std::invalid_argument("beta_sim: empty architecture");
    return num / den;
}

double beta_sim(const EbmBoundParams& p) {
    const double den = p.S + dbl(p.de);
    if (!(den > 0.0)) throw std::invalid_argument("beta_sim needs S + de > 0");
    return p.S / den;
}

double advantage_ratio(std::size_t K, double beta) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in [0, 1]");
    return std::sqrt(1.0 - (dbl(K) - 1.0) / dbl(K) * beta);
}

}  // namespace msgm::bounds
