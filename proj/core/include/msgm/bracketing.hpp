#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "msgm/bounds.hpp"
#include "msgm/gaussian.hpp"
#include "msgm/mlp.hpp"
#include "msgm/rng.hpp"

namespace msgm::bracketing {

struct BracketReport {
    std::size_t dominance_violations = 0;
    std::size_t probes = 0;
    double exact_l1_gap = 0.0;
    double epsilon = 0.0;  // the gap the construction promises
    std::optional<double> log_cardinality;
    bool cardinality_estimated = false;

    [[nodiscard]] bool sound() const { return dominance_violations == 0 && exact_l1_gap <= epsilon; }
};

// One element of the grid bracket: snapped means with the inflated density
// p'(x, y) = (2 pi)^(-d/2) exp(-c1/2 |x - m_y|^2 + c2).
class GaussianBracketElement {
public:
    GaussianBracketElement(std::size_t d, double B, double eps, bounds::Strategy strategy,
                           std::vector<std::vector<double>> phi_bar, std::vector<std::vector<double>> psi_bar);

    [[nodiscard]] std::size_t K() const noexcept { return phi_bar_.size(); }
    [[nodiscard]] std::size_t d() const noexcept { return d_; }
    [[nodiscard]] std::size_t d1() const noexcept { return d1_; }
    [[nodiscard]] double B() const noexcept { return B_; }
    [[nodiscard]] double epsilon() const noexcept { return eps_; }
    [[nodiscard]] double eta() const noexcept { return eta_; }
    [[nodiscard]] double c1() const noexcept { return c1_; }
    [[nodiscard]] double c2() const noexcept { return c2_; }
    [[nodiscard]] bounds::Strategy strategy() const noexcept { return strategy_; }
    [[nodiscard]] std::vector<double> mean_of(SourceLabel y) const;

    [[nodiscard]] double log_density(std::span<const double> x, SourceLabel y) const;
    // Total mass minus one: c1^(-d/2) e^c2 - 1.
    [[nodiscard]] double exact_l1_gap() const;

private:
    std::size_t d_;
    std::size_t d1_;
    double B_;
    double eps_;
    double eta_;
    double c1_;
    double c2_;
    bounds::Strategy strategy_;
    std::vector<std::vector<double>> phi_bar_;
    std::vector<std::vector<double>> psi_bar_;
};

// Largest point of [-B, B] ∩ eta Z that is <= v (v itself when on the grid).
double snap_down(double v, double eta, double B);

// Means drawn uniformly from [-B, B]; shared psi unless single_estimate.
gaussian::GaussianFamily random_target(std::size_t K, std::size_t d, std::size_t d1, double B, gaussian::Mode mode,
                                       RngStream& rng);

GaussianBracketElement gaussian_bracket_cover(const gaussian::GaussianFamily& target, double B, double eps);

BracketReport gaussian_bracket_verify(const GaussianBracketElement& elem, const gaussian::GaussianFamily& target,
                                      std::size_t n_probe, RngStream rng);

struct BracketCount {
    double log_count;
    bool estimated;  // true when the count exceeded the enumeration limit
};

inline constexpr double kEnumerationLimit = 1e7;

// Number of points of [-B, B] ∩ eta Z.
std::size_t grid_points_per_coordinate(double B, double eta);

BracketCount gaussian_bracket_count(std::size_t K, std::size_t d, std::size_t d1, double B, double eps,
                                    bounds::Strategy strategy);

// Levels k eps for k = 1..ceil(1/eps).
std::vector<double> constant_function_bracket(double eps);
BracketReport constant_bracket_verify(double eps, std::size_t n_probe, RngStream rng);

class EnergyGrid1D {
public:
    explicit EnergyGrid1D(std::vector<double> u_values);
    static EnergyGrid1D piecewise_linear(std::size_t nodes, std::size_t knots, double lo, double hi, RngStream rng);

    [[nodiscard]] std::size_t size() const noexcept { return u_.size(); }
    [[nodiscard]] double step() const noexcept { return 1.0 / static_cast<double>(u_.size() - 1); }
    [[nodiscard]] double node(std::size_t i) const noexcept { return static_cast<double>(i) * step(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return u_; }

private:
    std::vector<double> u_;
};

inline constexpr std::size_t kMinEnergyNodes = 4097;

double trapezoid(std::span<const double> f, double h);

// 3 eps e^(4 eps) + eps e^eps
double ebm_gap_bound(double eps_u);

// Bracket p' = e^(-u' + 2 eps) / int e^(-u') against p = e^(-u) / int e^(-u). Requires |u - u'| <= eps pointwise.
BracketReport ebm_bracket_from_energies(const EnergyGrid1D& u, std::span<const double> u_prime, double eps_u);
// Draws a random u' with |u - u'|_inf <= eps_u, then verifies.
BracketReport ebm_bracket_verify_1d(const EnergyGrid1D& u, double eps_u, RngStream rng);

enum class LemmaKind { input_lipschitz, param_lipschitz, output_supnorm };

// Widths drawn from [1, W], entries from [-B, B] (half of them at +-B).
Mlp random_mlp(std::size_t L, std::size_t W, double B, RngStream& rng);
// Every entry moved by at most delta, staying inside [-B, B].
Mlp perturb_mlp(const Mlp& f, double delta, double B, RngStream& rng);

// Ratios of observed quantity to the lemma bound, maximised over layers.
double input_lipschitz_ratio(const Mlp& f, std::span<const double> x, std::span<const double> x_prime, double B,
                             std::size_t W);
double param_lipschitz_ratio(const Mlp& f, const Mlp& g, std::span<const double> x, double delta, double B,
                             std::size_t W);
double output_supnorm_ratio(const Mlp& f, std::span<const double> x, double B, std::size_t W);

double mlp_lemma_check(LemmaKind kind, std::size_t L, std::size_t W, double B, std::size_t trials, RngStream rng);

}  // namespace msgm::bracketing
