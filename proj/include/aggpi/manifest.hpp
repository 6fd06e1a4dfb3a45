#pragma once

#include "aggpi/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace aggpi {

/// Record written next to every command's outputs. Only the two timestamps
/// change between reruns of the same command.
struct RunManifest {
    std::string command;
    /// SHA-256 of the canonical effective configuration.
    std::string config_digest;
    std::uint64_t rng_seed = 0;
    std::string tool_version;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;
};

std::string sha256_hex(const std::string& bytes);
std::string config_digest(const config::Json& effective_config);
/// UTC, ISO-8601 with a trailing Z.
std::string utc_timestamp();
std::string tool_version();

config::Json to_json(const RunManifest& m);

}  // namespace aggpi
