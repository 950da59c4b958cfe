#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "msgm/mlp.hpp"
#include "msgm/rng.hpp"
#include "msgm/types.hpp"

// Conditional autoregressive model over token sequences in {0..M-1}^D.
// Position d (1-based) sees the source embedding and tokens x_1..x_{d-1}.
namespace msgm::arm {

inline constexpr std::size_t kMaxSupport = std::size_t{1} << 21;

struct ArmConfig {
    std::size_t M = 2;
    std::size_t D = 1;
    std::size_t K = 1;
    std::size_t de = 1;
    std::size_t L = 1;
    std::size_t W = 1;

    void validate() const;
    [[nodiscard]] std::size_t mlp_parameter_count() const;
    [[nodiscard]] std::size_t parameter_count() const;
    // M^D; throws past the enumeration guard.
    [[nodiscard]] std::size_t support_size() const;

    friend bool operator==(const ArmConfig&, const ArmConfig&) = default;
};

struct ArmParams {
    ArmConfig cfg;
    std::vector<double> VY;  // K x de
    std::vector<double> VX;  // M x de
    std::vector<double> A0;  // D x de
    std::vector<double> b0;  // D
    Mlp mlp;                 // widths D, W, ..., W, M

    static ArmParams zeros(const ArmConfig& cfg);

    [[nodiscard]] std::vector<std::span<double>> blocks();
    [[nodiscard]] std::vector<std::span<const double>> blocks() const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] bool all_finite() const;
    // this += a * g
    void axpy(double a, const ArmParams& g);

    friend bool operator==(const ArmParams&, const ArmParams&) = default;
};

// Embeddings U[0,1]; A0, b0 and MLP U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
ArmParams init_params(const ArmConfig& cfg, RngStream rng);

std::vector<double> softmax(std::span<const double> logits);

// pos is 1-based.
std::vector<double> forward_position(const ArmParams& p, std::span<const int> x, SourceLabel y, std::size_t pos);
double log_prob(const ArmParams& p, std::span<const int> x, SourceLabel y);

using ForwardFn = std::function<std::vector<double>(const ArmParams&, std::span<const int>, SourceLabel, std::size_t)>;

// Gradient of the mean negative log-likelihood.
ArmParams grad_nll(const ArmParams& p, const TokenDataset& batch);
ArmParams grad_nll(const ArmParams& p, const TokenDataset& ds, std::span<const std::size_t> indices);
double mean_nll(const ArmParams& p, const TokenDataset& ds);

struct TrainOptions {
    double lr = 0.1;
    std::size_t batch_size = 100;
    std::size_t iters = 1000;
};

struct TrainResult {
    ArmParams params;
    double initial_nll;
    double final_nll;
};

// Plain minibatch gradient descent; batches drawn with replacement.
TrainResult train(const ArmParams& init, const TokenDataset& ds, const TrainOptions& opt, RngStream rng);

// Sequence index: x_1 is the most significant digit.
std::size_t sequence_index(std::span<const int> x, std::size_t M);
std::vector<int> sequence_at(std::size_t index, std::size_t M, std::size_t D);

std::vector<double> enumerate_distribution(const ArmParams& p, SourceLabel y);
std::vector<double> enumerate_distribution(const ForwardFn& fwd, const ArmParams& p, SourceLabel y);

class CategoricalTable {
public:
    CategoricalTable(std::size_t M, std::size_t D, std::vector<double> probabilities);

    [[nodiscard]] std::size_t M() const noexcept { return M_; }
    [[nodiscard]] std::size_t D() const noexcept { return D_; }
    [[nodiscard]] std::span<const double> probabilities() const noexcept { return p_; }

private:
    std::size_t M_;
    std::size_t D_;
    std::vector<double> p_;
};

// K tables from a symmetric Dirichlet(concentration); coupling c mixes each
// with a shared draw: (1 - c) own + c shared.
std::vector<CategoricalTable> make_truth_tables(std::size_t K, std::size_t M, std::size_t D, double concentration,
                                                RngStream rng, double coupling = 0.0);

TokenDataset sample_sequences(const std::vector<CategoricalTable>& truths, const SourceWeights& w, std::size_t n,
                              RngStream rng);

double tv_distance(std::span<const double> p, std::span<const double> q);

// models has one entry (shared by all sources) or one per source.
double exact_avg_tv(std::span<const ArmParams> models, const std::vector<CategoricalTable>& truths,
                    const SourceWeights& w);

namespace testing {

enum class Fault { none, softmax_off_by_one, mask_off_by_one };

// forward_position with a deliberate defect, for mutation checks.
std::vector<double> forward_position_with_fault(const ArmParams& p, std::span<const int> x, SourceLabel y,
                                                std::size_t pos, Fault fault);

}  // namespace testing

}  // namespace msgm::arm
