#pragma once

#include <span>

namespace msgm {

struct MeanStd {
    double mean;
    double std;  // sample standard deviation (n - 1); 0 for a singleton
};

MeanStd mean_and_std(std::span<const double> values);

// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace msgm
