#pragma once

#include <functional>
#include <string>
#include <vector>

#include "msgm/arm.hpp"

namespace msgm::selftest {

struct PropertyResult {
    std::string module;
    std::string name;
    bool passed;
    std::string detail;
};

struct Options {
    // Forward pass used by the masking and normalization properties.
    arm::ForwardFn forward = &arm::forward_position;
    // Adds the full-scale ARM statistical properties (long running).
    bool extended = false;
    // Called as each property finishes.
    std::function<void(const PropertyResult&)> on_result;
};

std::vector<PropertyResult> run(const Options& options = {});

}  // namespace msgm::selftest
