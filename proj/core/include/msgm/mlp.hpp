#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace msgm {

// out = W x + b, W stored row-major (out x in).
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    DenseLayer() = default;
    DenseLayer(std::size_t in_width, std::size_t out_width)
        : in(in_width), out(out_width), weight(in_width * out_width, 0.0), bias(out_width, 0.0) {}

    [[nodiscard]] double& w(std::size_t r, std::size_t c) { return weight[r * in + c]; }
    [[nodiscard]] double w(std::size_t r, std::size_t c) const { return weight[r * in + c]; }
    void apply(std::span<const double> x, std::span<double> y) const;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// ReLU network: affine layers with ReLU between them, none after the last.
struct Mlp {
    std::vector<DenseLayer> layers;

    [[nodiscard]] std::size_t depth() const noexcept { return layers.size(); }
    [[nodiscard]] std::size_t input_width() const { return layers.front().in; }
    [[nodiscard]] std::size_t output_width() const { return layers.back().out; }
    [[nodiscard]] std::size_t max_width() const;
    [[nodiscard]] std::size_t parameter_count() const;

    [[nodiscard]] std::vector<double> forward(std::span<const double> x) const;
    // Pre-activation output of every layer: f_1(x), ..., f_L(x).
    [[nodiscard]] std::vector<std::vector<double>> forward_layers(std::span<const double> x) const;

    friend bool operator==(const Mlp&, const Mlp&) = default;
};

// widths = {W_0, W_1, ..., W_L}; all parameters zero.
Mlp make_mlp(std::span<const std::size_t> widths);

}  // namespace msgm
