#include "msgm/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msgm {

SourceLabel::SourceLabel(int value) : value_(value) {
    if (value < 1) throw std::invalid_argument("source label must be >= 1, got " + std::to_string(value));
}

void SourceLabel::check(std::size_t K) const {
    if (static_cast<std::size_t>(value_) > K) {
        throw std::out_of_range("source label " + std::to_string(value_) + " outside [1, " + std::to_string(K) + "]");
    }
}

SourceWeights::SourceWeights(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw std::invalid_argument("source weights are empty");
    for (std::size_t k = 0; k < w_.size(); ++k) {
        if (!(w_[k] > 0.0) || !std::isfinite(w_[k])) {
            throw std::invalid_argument("weight of source " + std::to_string(k + 1) + " must be positive");
        }
    }
    const double total = std::accumulate(w_.begin(), w_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("source weights sum to " + std::to_string(total) + ", not 1");
    }
}

SourceWeights SourceWeights::uniform(std::size_t K) {
    if (K == 0) throw std::invalid_argument("uniform weights need K >= 1");
    return SourceWeights(std::vector<double>(K, 1.0 / static_cast<double>(K)));
}

std::vector<SourceLabel> sample_labels(const SourceWeights& weights, std::size_t n, RngStream rng) {
    if (n == 0) throw std::invalid_argument("sample_labels needs n >= 1");
    const auto w = weights.values();
    std::vector<double> cdf(w.size());
    std::partial_sum(w.begin(), w.end(), cdf.begin());
    std::vector<SourceLabel> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), w.size() - 1);
        out.emplace_back(static_cast<int>(k + 1));
    }
    return out;
}

}  // namespace msgm
