#include "msgm/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace msgm {

MeanStd mean_and_std(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean_and_std of an empty list");
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope needs >= 2 paired points");
    const double mx = mean_and_std(x).mean;
    const double my = mean_and_std(y).mean;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("ols_slope: x has no spread");
    return sxy / sxx;
}

}  // namespace msgm
