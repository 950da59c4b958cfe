#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgm/rng.hpp"

namespace msgm {

// 1-indexed source label.
class SourceLabel {
public:
    explicit SourceLabel(int value);

    [[nodiscard]] int value() const noexcept { return value_; }
    [[nodiscard]] std::size_t index() const noexcept { return static_cast<std::size_t>(value_ - 1); }
    void check(std::size_t K) const;

    auto operator<=>(const SourceLabel&) const = default;

private:
    int value_;
};

// Probability of each source; entries strictly positive, summing to 1.
class SourceWeights {
public:
    explicit SourceWeights(std::vector<double> weights);
    static SourceWeights uniform(std::size_t K);

    [[nodiscard]] std::size_t K() const noexcept { return w_.size(); }
    [[nodiscard]] double operator[](SourceLabel y) const { return w_.at(y.index()); }
    [[nodiscard]] std::span<const double> values() const noexcept { return w_; }

private:
    std::vector<double> w_;
};

// Fixed-width observations (real vectors or token sequences) stored row-major.
template <typename T>
class LabeledDataset {
public:
    LabeledDataset(std::size_t K, std::size_t width) : K_(K), width_(width), counts_(K, 0) {
        if (K == 0) throw std::invalid_argument("dataset needs K >= 1");
    }

    void push_back(std::span<const T> observation, SourceLabel y) {
        if (observation.size() != width_) {
            throw std::invalid_argument("observation has length " + std::to_string(observation.size()) +
                                        ", expected " + std::to_string(width_));
        }
        y.check(K_);
        values_.insert(values_.end(), observation.begin(), observation.end());
        labels_.push_back(y);
        ++counts_[y.index()];
    }

    void reserve(std::size_t n) {
        values_.reserve(n * width_);
        labels_.reserve(n);
    }

    [[nodiscard]] std::size_t K() const noexcept { return K_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] bool empty() const noexcept { return labels_.empty(); }
    [[nodiscard]] std::span<const T> observation(std::size_t i) const {
        return std::span<const T>(values_).subspan(i * width_, width_);
    }
    [[nodiscard]] SourceLabel label(std::size_t i) const { return labels_.at(i); }
    [[nodiscard]] std::span<const SourceLabel> labels() const noexcept { return labels_; }
    [[nodiscard]] std::size_t count(SourceLabel y) const { return counts_.at(y.index()); }
    [[nodiscard]] std::span<const std::size_t> counts() const noexcept { return counts_; }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    std::size_t K_;
    std::size_t width_;
    std::vector<T> values_;
    std::vector<SourceLabel> labels_;
    std::vector<std::size_t> counts_;
};

using GaussianDataset = LabeledDataset<double>;
using TokenDataset = LabeledDataset<int>;

std::vector<SourceLabel> sample_labels(const SourceWeights& weights, std::size_t n, RngStream rng);

// Group g holds views into ds for label g+1, in dataset order.
template <typename T>
std::vector<std::vector<std::span<const T>>> split_by_source(const LabeledDataset<T>& ds) {
    std::vector<std::vector<std::span<const T>>> groups(ds.K());
    for (std::size_t k = 0; k < ds.K(); ++k) groups[k].reserve(ds.counts()[k]);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        groups[ds.label(i).index()].push_back(ds.observation(i));
    }
    return groups;
}

}  // namespace msgm

namespace msgm {

// Samples of source y only, labels preserved, order preserved.
template <typename T>
LabeledDataset<T> select_source(const LabeledDataset<T>& ds, SourceLabel y) {
    y.check(ds.K());
    LabeledDataset<T> out(ds.K(), ds.width());
    out.reserve(ds.count(y));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.label(i) == y) out.push_back(ds.observation(i), y);
    }
    return out;
}

}  // namespace msgm
