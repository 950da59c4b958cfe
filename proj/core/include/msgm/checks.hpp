#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "msgm/arm.hpp"
#include "msgm/bounds.hpp"
#include "msgm/bracketing.hpp"
#include "msgm/rng.hpp"

// Randomised invariant checks shared by the selftest and the test suites.
namespace msgm::checks {

// |a - b| / max(|a|, |b|, 1e-6)
double relative_error(double a, double b);

// Max relative error of grad_nll against central differences (step 1e-5)
// over every parameter of a random instance.
double arm_gradient_error(const arm::ArmConfig& cfg, std::size_t batch, RngStream rng);

// Count of (instance, position) pairs whose output changed after tokens at or after the position changed.
// A config with D == 0 draws a small random config per trial.
std::size_t arm_masking_violations(const arm::ForwardFn& fwd, const arm::ArmConfig& cfg, std::size_t trials,
                                   RngStream rng);

// Max |sum - 1| of the enumerated distribution over random parameter draws.
double arm_normalization_error(const arm::ForwardFn& fwd, const arm::ArmConfig& cfg, std::size_t draws, RngStream rng);

inline const std::vector<double> kGaussianBracketEps{1.0, 0.5, 0.1, 1.0 / 500.0};

struct GaussianBracketSweep {
    std::size_t configs = 0;
    std::size_t probes = 0;
    std::size_t dominance_violations = 0;
    std::size_t gap_exceeded = 0;  // configurations with gap > eps
    double worst_gap_ratio = 0.0;  // max gap / eps
    std::string worst_case;
};

// Random (d <= 10, K <= 15, eps from kGaussianBracketEps) configurations.
GaussianBracketSweep gaussian_bracket_sweep(std::size_t configs, std::size_t probes, RngStream rng);

struct CountSweep {
    std::size_t configs = 0;
    std::size_t above_bound = 0;
    std::size_t equality_checked = 0;
    std::size_t equality_failed = 0;
};

// Enumerated cardinality vs. the closed-form bound on small configurations.
CountSweep gaussian_count_sweep(std::size_t configs, RngStream rng);

struct EbmSweep {
    std::size_t energies = 0;
    std::size_t dominance_violations = 0;
    std::size_t gap_exceeded = 0;
    double worst_gap_ratio = 0.0;
};

// Random piecewise-linear energies in [-3, 3], eps_u in {0.01, 0.1, 0.25}.
EbmSweep ebm_bracket_sweep(std::size_t energies, RngStream rng);

// Max observed/bound ratio over random (L <= 4, W <= 16, B <= 3) networks, `trials` draws each.
double mlp_lemma_sweep(bracketing::LemmaKind kind, std::size_t configs, std::size_t trials, RngStream rng);

// Violations of the multi <= single ordering on random parameter tuples of one instantiation; equality cases
// (K == 1, and d1 == d for the Gaussian model) are required to hold with equality.
std::size_t ordering_violations(bounds::Instantiation inst, std::size_t tuples, RngStream rng);

}  // namespace msgm::checks
