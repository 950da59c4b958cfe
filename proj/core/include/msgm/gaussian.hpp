#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "msgm/rng.hpp"
#include "msgm/types.hpp"

namespace msgm::gaussian {

enum class Mode { truth, multi_estimate, single_estimate };

// K unit-covariance Gaussians with means (phi_k, psi) or (phi_k, psi_k).
class GaussianFamily {
public:
    static GaussianFamily truth(std::size_t d, std::vector<std::vector<double>> phi, std::vector<double> psi);
    static GaussianFamily multi_estimate(std::size_t d, std::vector<std::vector<double>> phi, std::vector<double> psi);
    static GaussianFamily single_estimate(std::size_t d, std::vector<std::vector<double>> phi,
                                          std::vector<std::vector<double>> psi);

    [[nodiscard]] std::size_t K() const noexcept { return phi_.size(); }
    [[nodiscard]] std::size_t d() const noexcept { return d_; }
    [[nodiscard]] std::size_t d1() const noexcept { return d1_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] const std::vector<double>& phi(SourceLabel y) const { return phi_.at(y.index()); }
    [[nodiscard]] const std::vector<double>& psi(SourceLabel y) const;
    [[nodiscard]] std::vector<double> mean_of(SourceLabel y) const;
    [[nodiscard]] double max_abs_entry() const;

    friend bool operator==(const GaussianFamily&, const GaussianFamily&) = default;

private:
    GaussianFamily(std::size_t d, Mode mode, std::vector<std::vector<double>> phi,
                   std::vector<std::vector<double>> psi);

    std::size_t d_;
    std::size_t d1_;
    Mode mode_;
    std::vector<std::vector<double>> phi_;
    std::vector<std::vector<double>> psi_;  // one shared entry unless single_estimate
};

// d1 = d - floor(beta d), phi_k = k * 1, psi = 0.
GaussianFamily make_sim_family(std::size_t K, std::size_t d, double beta_sim);

GaussianDataset sample_dataset(const GaussianFamily& truth, const SourceWeights& w, std::size_t n, RngStream rng);

GaussianFamily fit_multi(const GaussianDataset& ds, std::size_t d1);
GaussianFamily fit_single(const GaussianDataset& ds, std::size_t d1);

// Conditional log-likelihood sum_i log p(x_i | y_i).
double log_likelihood(const GaussianFamily& fam, const GaussianDataset& ds);

// 2 Phi(|a - b| / 2) - 1.
double tv_exact_pair(std::span<const double> mu_a, std::span<const double> mu_b);

double avg_tv_exact(const GaussianFamily& est, const GaussianFamily& truth, std::span<const double> weights);
double avg_tv_exact(const GaussianFamily& est, const GaussianFamily& truth, const SourceWeights& w);

struct MonteCarloTv {
    double estimate;
    double std_error;
};

MonteCarloTv tv_monte_carlo_detail(const GaussianFamily& est, const GaussianFamily& truth, const SourceWeights& w,
                                   std::size_t n_test, RngStream rng);
double tv_monte_carlo(const GaussianFamily& est, const GaussianFamily& truth, const SourceWeights& w,
                      std::size_t n_test, RngStream rng);

}  // namespace msgm::gaussian
