#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpm/montecarlo.hpp"

namespace kpm {

// Invalid or unknown configuration content.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parses a JSON config document. Sections: "scenario", "filter", "guidance", "mc".
/// Every key is optional; missing keys keep their defaults and unknown keys are
/// rejected. Accelerations may be given in g via a "_g" suffix (e.g. "a_t_max_g").
McConfig config_from_json(const std::string& text);
McConfig load_config(const std::string& path);

// Canonical form: SI units, every field present, keys sorted.
std::string canonical_json(const McConfig& cfg);

// 64-bit FNV-1a of the canonical form, as 16 hex digits.
std::string config_digest(const McConfig& cfg);

struct RunManifest {
    std::string digest;
    std::string tool_version;
    std::uint64_t base_seed = 0;
    std::string started_utc;
    std::string finished_utc;
    std::string command;
    std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& m, const McConfig& cfg);
std::string utc_now();

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace kpm
