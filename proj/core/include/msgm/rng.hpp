#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

namespace msgm {

// Counter-based stream: the key is a hash of (master_seed, path) and draw i
// is a pure function of (key, i). Satisfies UniformRandomBitGenerator.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path = {});

    [[nodiscard]] RngStream fork(std::uint64_t child) const;
    [[nodiscard]] RngStream fork(std::initializer_list<std::uint64_t> children) const;

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return seed_; }
    [[nodiscard]] const std::vector<std::uint64_t>& path() const noexcept { return path_; }
    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

    result_type operator()() noexcept;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    // [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    // [0, bound), bound >= 1.
    std::uint64_t below(std::uint64_t bound) noexcept;
    double normal();

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::normal_distribution<double> normal_;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

}  // namespace msgm
