#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "msgm/bounds.hpp"
#include "msgm/bracketing.hpp"

// JSON-producing entry points behind the `bounds` and `bracket-verify` commands.
namespace msgm::queries {

// params holds key=value pairs; unknown or malformed keys raise ConfigError.
std::string bounds_json(bounds::Instantiation inst, bounds::Strategy mode,
                        const std::map<std::string, std::string>& params);

// family: gaussian | ebm1d | constant. Instances are drawn from the seed.
bracketing::BracketReport bracket_verify(std::string_view family, double epsilon, std::uint64_t seed);
std::string to_json(const bracketing::BracketReport& report, std::string_view family);

}  // namespace msgm::queries
