#include "msgm/mlp.hpp"

#include <algorithm>
#include <stdexcept>

namespace msgm {

void DenseLayer::apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < out; ++r) {
        const double* row = weight.data() + r * in;
        double acc = bias[r];
        for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

std::size_t Mlp::max_width() const {
    std::size_t w = layers.empty() ? 0 : layers.front().in;
    for (const auto& l : layers) w = std::max(w, l.out);
    return w;
}

std::size_t Mlp::parameter_count() const {
    std::size_t s = 0;
    for (const auto& l : layers) s += l.weight.size() + l.bias.size();
    return s;
}

std::vector<std::vector<double>> Mlp::forward_layers(std::span<const double> x) const {
    if (layers.empty()) throw std::logic_error("empty MLP");
    if (x.size() != input_width()) throw std::invalid_argument("MLP input width mismatch");
    std::vector<std::vector<double>> outs;
    outs.reserve(layers.size());
    std::vector<double> act(x.begin(), x.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<double> z(layers[l].out);
        layers[l].apply(act, z);
        outs.push_back(z);
        act = std::move(z);
        for (double& v : act) v = std::max(v, 0.0);
    }
    return outs;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    return std::move(forward_layers(x).back());
}

Mlp make_mlp(std::span<const std::size_t> widths) {
    if (widths.size() < 2) throw std::invalid_argument("MLP needs at least one layer");
    Mlp m;
    for (std::size_t l = 1; l < widths.size(); ++l) m.layers.emplace_back(widths[l - 1], widths[l]);
    return m;
}

}  // namespace msgm
