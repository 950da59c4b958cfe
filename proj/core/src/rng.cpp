#include "msgm/rng.hpp"

namespace msgm {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t derive_key(std::uint64_t seed, const std::vector<std::uint64_t>& path) noexcept {
    std::uint64_t k = splitmix64_mix(seed ^ 0x6a09e667f3bcc908ULL);
    // Length is folded in so that {} and {0} give different keys.
    k = splitmix64_mix(k + kGamma * (path.size() + 1));
    for (std::uint64_t p : path) {
        k = splitmix64_mix(k ^ splitmix64_mix(p + kGamma));
    }
    return k;
}

}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::vector<std::uint64_t> path)
    : seed_(master_seed), path_(std::move(path)), key_(derive_key(seed_, path_)) {}

RngStream RngStream::fork(std::uint64_t child) const {
    auto p = path_;
    p.push_back(child);
    return RngStream(seed_, std::move(p));
}

RngStream RngStream::fork(std::initializer_list<std::uint64_t> children) const {
    auto p = path_;
    p.insert(p.end(), children.begin(), children.end());
    return RngStream(seed_, std::move(p));
}

RngStream::result_type RngStream::operator()() noexcept {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * kGamma);
}

double RngStream::uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) noexcept {
    const u128 wide = static_cast<u128>((*this)()) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
}

double RngStream::normal() {
    return normal_(*this);
}

}  // namespace msgm
